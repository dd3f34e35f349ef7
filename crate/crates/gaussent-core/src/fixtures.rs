//! Reference fixtures: the integer bound-entanglement CM and its printed
//! decomposition, the worked-example matrices (printed to three significant
//! figures), and the embedded numeric tables with their CSV schema
//! (d, m, r_tilde, ...per-table value columns...).

use crate::mpnum::{Matrix, PrecisionContext};
use rug::Rational;

pub const TABLE_S1_CSV: &str = include_str!("../data/table_s1.csv");
pub const TABLE_S2_CSV: &str = include_str!("../data/table_s2.csv");
pub const TABLE_S3_CSV: &str = include_str!("../data/table_s3.csv");
pub const TABLE_S4_CSV: &str = include_str!("../data/table_s4.csv");

/// The integer-element bound-entangled (2x2)-mode CM, interleaved basis,
/// modes (A1, A2, B1, B2).
pub const WERNER_SIGMA_BE: [[i64; 8]; 8] = [
    [2, 0, 0, 0, 1, 0, 0, 0],
    [0, 1, 0, 0, 0, 0, 0, -1],
    [0, 0, 2, 0, 0, 0, -1, 0],
    [0, 0, 0, 1, 0, -1, 0, 0],
    [1, 0, 0, 0, 2, 0, 0, 0],
    [0, 0, 0, -1, 0, 4, 0, 0],
    [0, 0, -1, 0, 0, 0, 2, 0],
    [0, -1, 0, 0, 0, 0, 0, 4],
];

pub fn werner_sigma_be(ctx: &PrecisionContext) -> Matrix {
    Matrix::from_fn(8, 8, ctx, |i, j| ctx.real(WERNER_SIGMA_BE[i][j]))
}

/// sigma_BE reordered to modes (1, 4, 2, 3), exact rationals.
pub fn werner_sigma_be_rational_reordered() -> Vec<Vec<Rational>> {
    let order = [0usize, 3, 1, 2];
    let mut out = vec![vec![Rational::new(); 8]; 8];
    for (ni, &oi) in order.iter().enumerate() {
        for (nj, &oj) in order.iter().enumerate() {
            for qa in 0..2 {
                for qb in 0..2 {
                    out[2 * ni + qa][2 * nj + qb] =
                        Rational::from(WERNER_SIGMA_BE[2 * oi + qa][2 * oj + qb]);
                }
            }
        }
    }
    out
}

/// The printed pair CM sigma_14 = sigma_23.
pub fn werner_pair_rational() -> Vec<Vec<Rational>> {
    let t = |n: i64, d: u32| Rational::from((n, d));
    vec![
        vec![t(4, 3), t(0, 1), t(1, 3), t(0, 1)],
        vec![t(0, 1), t(1, 1), t(0, 1), t(-1, 1)],
        vec![t(1, 3), t(0, 1), t(1, 3), t(0, 1)],
        vec![t(0, 1), t(-1, 1), t(0, 1), t(4, 1)],
    ]
}

/// The printed classical noise Y with sigma_BE^(1,4,2,3) = sigma_14 (+)
/// sigma_23 + Y.
pub fn werner_noise_rational() -> Vec<Vec<Rational>> {
    let t = |n: i64, d: u32| Rational::from((n, d));
    let z = || Rational::new();
    vec![
        vec![t(2, 3), z(), t(-1, 3), z(), z(), z(), t(1, 1), z()],
        vec![z(), z(), z(), z(), z(), z(), z(), z()],
        vec![t(-1, 3), z(), t(5, 3), z(), t(-1, 1), z(), z(), z()],
        vec![z(), z(), z(), z(), z(), z(), z(), z()],
        vec![z(), z(), t(-1, 1), z(), t(2, 3), z(), t(-1, 3), z()],
        vec![z(), z(), z(), z(), z(), z(), z(), z()],
        vec![t(1, 1), z(), z(), z(), t(-1, 3), z(), t(5, 3), z()],
        vec![z(), z(), z(), z(), z(), z(), z(), z()],
    ]
}

/// Printed d=2, r=0, m=0.003 vacuum CM (three significant figures).
pub const APP_D1_SIGMA: [[&str; 8]; 8] = [
    ["2.51", "0", "1.87", "0", "1.66", "0", "1.53", "0"],
    ["0", "1.27", "0", "-0.424", "0", "-0.0849", "0", "-0.0364"],
    ["1.87", "0", "2.51", "0", "1.87", "0", "1.66", "0"],
    ["0", "-0.424", "0", "1.27", "0", "-0.424", "0", "-0.0849"],
    ["1.66", "0", "1.87", "0", "2.51", "0", "1.87", "0"],
    ["0", "-0.0849", "0", "-0.424", "0", "1.27", "0", "-0.424"],
    ["1.53", "0", "1.66", "0", "1.87", "0", "2.51", "0"],
    ["0", "-0.0364", "0", "-0.0849", "0", "-0.424", "0", "1.27"],
];

/// Printed seed transform from the correlator-product eigenvectors.
pub const APP_D1_SA_BAR: [[&str; 4]; 4] = [
    ["0.0607", "0", "0.683", "0"],
    ["0", "0.321", "0", "0.704"],
    ["0.762", "0", "-0.347", "0"],
    ["0", "0.631", "0", "-0.0560"],
];

/// Printed symplectic local transform after Gram-Schmidt.
pub const APP_D1_SA: [[&str; 4]; 4] = [
    ["0.0858", "0", "0.965", "0"],
    ["0", "0.454", "0", "0.995"],
    ["1.08", "0", "-0.491", "0"],
    ["0", "0.892", "0", "-0.0793"],
];

/// Printed transformed CM sigma' = S sigma S^T.
pub const APP_D1_SIGMA_PRIME: [[&str; 8]; 8] = [
    ["2.67", "0", "0.912", "0", "0.912", "0", "2.03", "0"],
    ["0", "1.14", "0", "0.0536", "0", "-0.0536", "0", "-0.505"],
    ["0.912", "0", "1.54", "0", "0.474", "0", "0.912", "0"],
    ["0", "0.0536", "0", "1.08", "0", "-0.0196", "0", "-0.0536"],
    ["0.912", "0", "0.474", "0", "1.54", "0", "0.912", "0"],
    ["0", "-0.0536", "0", "-0.0196", "0", "1.08", "0", "0.0536"],
    ["2.03", "0", "0.912", "0", "0.912", "0", "2.67", "0"],
    ["0", "-0.505", "0", "-0.0536", "0", "0.0536", "0", "1.14"],
];

/// Printed d=4 local transform.
pub const APP_D1_SA_D4: [[&str; 8]; 8] = [
    ["0.0286", "0", "-0.0736", "0", "-0.190", "0", "-0.818", "0"],
    ["0", "-0.244", "0", "-0.460", "0", "-0.693", "0", "-1.03"],
    ["0.373", "0", "-0.433", "0", "-0.803", "0", "0.645", "0"],
    ["0", "0.0505", "0", "-0.559", "0", "-0.741", "0", "0.224"],
    ["0.386", "0", "-1.03", "0", "0.759", "0", "-0.143", "0"],
    ["0", "0.112", "0", "-0.646", "0", "0.379", "0", "-0.0260"],
    ["0.984", "0", "0.124", "0", "-0.0943", "0", "-0.225", "0"],
    ["0", "0.960", "0", "0.479", "0", "0.152", "0", "-0.0448"],
];

/// Printed seed transform from the i Omega sigma^Gamma eigenvectors.
pub const APP_D2_SA_BAR: [[&str; 4]; 4] = [
    ["0.041", "0", "0.467", "0"],
    ["0", "-0.220", "0", "-0.482"],
    ["0.513", "0", "-0.234", "0"],
    ["0", "-0.425", "0", "0.038"],
];

/// The iOmega route reproduces the same S_A (printed at slightly different
/// precision).
pub const APP_D2_SA: [[&str; 4]; 4] = [
    ["0.086", "0", "0.965", "0"],
    ["0", "0.454", "0", "0.995"],
    ["1.077", "0", "-0.491", "0"],
    ["0", "0.892", "0", "-0.079"],
];

/// Printed core CM of the core-halo decomposition (modes core_A, core_B).
pub const APP_F_SIGMA_C: [[&str; 4]; 4] = [
    ["1.1143", "0", "0.4785", "0"],
    ["0", "1.1044", "0", "-0.4687"],
    ["0.4785", "0", "1.1143", "0"],
    ["0", "-0.4687", "0", "1.1044"],
];

/// Printed halo CM (modes halo_A, halo_B).
pub const APP_F_SIGMA_H: [[&str; 4]; 4] = [
    ["1.0018", "0", "-0.0600", "0"],
    ["0", "1.0018", "0", "0.0600"],
    ["-0.0600", "0", "1.0018", "0"],
    ["0", "0.0600", "0", "1.0018"],
];

/// Printed purified core CM.
pub const APP_F_SIGMA_C_PURE: [[&str; 4]; 4] = [
    ["1.1093", "0", "0.4736", "0"],
    ["0", "1.1024", "0", "-0.4706"],
    ["0.4736", "0", "1.1093", "0"],
    ["0", "-0.4706", "0", "1.1024"],
];

/// Printed symmetric pure halo factors sigma_hA = sigma_hB.
pub const APP_F_SIGMA_HA_PURE: [[&str; 2]; 2] = [["0.9951", "0"], ["0", "1.0050"]];

/// Printed halo-halo noise.
pub const APP_F_Y_H: [[&str; 4]; 4] = [
    ["0.5410", "0", "0.4743", "0"],
    ["0", "0.0765", "0", "-0.0196"],
    ["0.4743", "0", "0.5410", "0"],
    ["0", "-0.0196", "0", "0.0765"],
];

pub const APP_F_N_HALO: &str = "0.087";
pub const APP_F_N_HALO_A_REST: &str = "0.022";
pub const APP_F_YPRIME_EIGS: [&str; 2] = ["-0.037", "-0.024"];
pub const APP_D1_N_TOTAL: &str = "0.654";
pub const APP_D4_CONTRIBUTIONS: [&str; 3] = ["0.858", "0.0230", "0.000298"];
pub const APP_D4_N_TOTAL: &str = "0.888";

/// Absolute tolerance implied by a printed decimal: 0.6 units of its last
/// printed digit (0.5 for the rounding itself plus slack for the paper's own
/// roundoff).
pub fn printed_tol(s: &str) -> f64 {
    let v: f64 = s.parse().expect("printed fixture parses");
    if v == 0.0 {
        return 1e-12;
    }
    let digits = s.trim_start_matches('-');
    let (mant, exp10) = match digits.find(['e', 'E']) {
        Some(p) => (&digits[..p], digits[p + 1..].parse::<i32>().unwrap()),
        None => (digits, 0),
    };
    let frac_digits = match mant.find('.') {
        Some(p) => (mant.len() - p - 1) as i32,
        None => 0,
    };
    0.6 * 10f64.powi(exp10 - frac_digits)
}

/// Compare a computed value against a printed fixture string.
pub fn agrees_with_printed(x: f64, printed: &str) -> bool {
    let want: f64 = printed.parse().expect("printed fixture parses");
    (x - want).abs() <= printed_tol(printed)
}

/// Entrywise comparison of a computed matrix against a printed one; returns
/// the first mismatch as (i, j, got, want).
pub fn matrix_agrees<const N: usize>(m: &Matrix, printed: &[[&str; N]; N]) -> Option<(usize, usize, f64, f64)> {
    for i in 0..N {
        for j in 0..N {
            let got = m[(i, j)].to_f64();
            if !agrees_with_printed(got, printed[i][j]) {
                return Some((i, j, got, printed[i][j].parse().unwrap()));
            }
        }
    }
    None
}

/// One Table S1 entry: separation, contribution index (1-based), value.
pub fn table_s1_rows() -> Vec<(usize, usize, f64)> {
    TABLE_S1_CSV
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[2].parse().unwrap(), f[3].parse().unwrap(), f[4].parse().unwrap())
        })
        .collect()
}

/// Table S2 rows: (r_tilde, N_total, N_halo) at d=10, m=3e-4.
pub fn table_s2_rows() -> Vec<(usize, f64, f64)> {
    TABLE_S2_CSV
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[2].parse().unwrap(), f[3].parse().unwrap(), f[4].parse().unwrap())
        })
        .collect()
}

/// Table S3 rows: (r_tilde, N_total) at d=20, m=1.5e-4.
pub fn table_s3_rows() -> Vec<(usize, f64)> {
    TABLE_S3_CSV
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect()
}

/// Table S4 rows: (r_tilde, N_halo) at d=20, m=1.5e-4.
pub fn table_s4_rows() -> Vec<(usize, f64)> {
    TABLE_S4_CSV
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect()
}
