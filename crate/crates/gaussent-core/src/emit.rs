//! CSV and JSON emitters. All numeric output is decimal strings carrying the
//! working precision, so files round-trip losslessly and identical configs
//! produce byte-identical artifacts.

use crate::mpnum::{dec_str, Matrix, PrecisionContext};
use crate::negativity::ScanRow;
use crate::separability::{FlowVerdict, SeparableDecomposition};
use crate::soe::{SOEReport, SoeScanRow, SoeStatus, WernerReport};
use rug::Float;
use serde_json::{json, Value};

fn digits(ctx: &PrecisionContext) -> usize {
    ctx.decimal_digits() as usize
}

pub fn float_str(x: &Float, ctx: &PrecisionContext) -> String {
    dec_str(x, digits(ctx))
}

pub fn matrix_json(m: &Matrix, ctx: &PrecisionContext) -> Value {
    let rows: Vec<Value> = (0..m.rows())
        .map(|i| {
            Value::Array(
                (0..m.cols())
                    .map(|j| Value::String(float_str(&m[(i, j)], ctx)))
                    .collect(),
            )
        })
        .collect();
    Value::Array(rows)
}

pub fn matrix_csv(m: &Matrix, ctx: &PrecisionContext) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| float_str(&m[(i, j)], ctx)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Negativity scan CSV: columns (d, m, r_tilde, j, N_j).
pub fn scan_csv(rows: &[ScanRow], ctx: &PrecisionContext) -> String {
    let mut out = String::from("d,m,r_tilde,j,N_j\n");
    for row in rows {
        match &row.result {
            Ok(spectrum) => {
                let row_ctx = PrecisionContext::with_digits(row.digits_used)
                    .unwrap_or_else(|_| ctx.clone());
                for (j, n_j) in spectrum.positive().iter().enumerate() {
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        row.d,
                        row.mass,
                        row.r_tilde,
                        j + 1,
                        float_str(n_j, &row_ctx)
                    ));
                }
                if spectrum.positive().is_empty() {
                    out.push_str(&format!("{},{},{},0,0\n", row.d, row.mass, row.r_tilde));
                }
            }
            Err(e) => {
                out.push_str(&format!("{},{},{},error,{}\n", row.d, row.mass, row.r_tilde, e));
            }
        }
    }
    out
}

pub fn scan_json(rows: &[ScanRow], ctx: &PrecisionContext) -> Value {
    let items: Vec<Value> = rows
        .iter()
        .map(|row| match &row.result {
            Ok(spectrum) => {
                let row_ctx = PrecisionContext::with_digits(row.digits_used)
                    .unwrap_or_else(|_| ctx.clone());
                json!({
                    "d": row.d,
                    "m": row.mass.to_string(),
                    "r_tilde": row.r_tilde,
                    "digits": row.digits_used,
                    "contributions": spectrum.positive().iter().map(|x| float_str(x, &row_ctx)).collect::<Vec<_>>(),
                    "total": float_str(&spectrum.total(&row_ctx), &row_ctx),
                    "sub_precision": spectrum.sub_precision,
                })
            }
            Err(e) => json!({
                "d": row.d,
                "m": row.mass.to_string(),
                "r_tilde": row.r_tilde,
                "error": e,
            }),
        })
        .collect();
    Value::Array(items)
}

pub fn flow_json(verdict: &FlowVerdict, ctx: &PrecisionContext) -> Value {
    match verdict {
        FlowVerdict::Separable { depth, decomposition } => json!({
            "verdict": "separable",
            "depth": depth,
            "decomposition": decomposition.as_ref().map(|d| decomposition_json(d, ctx)),
        }),
        FlowVerdict::Inseparable { depth, witness_margin } => json!({
            "verdict": "inseparable",
            "depth": depth,
            "witness_margin": float_str(witness_margin, ctx),
        }),
        FlowVerdict::Undecided { depth, sep_margin, bona_margin } => json!({
            "verdict": "undecided",
            "depth": depth,
            "sep_margin": float_str(sep_margin, ctx),
            "bona_margin": float_str(bona_margin, ctx),
        }),
    }
}

pub fn decomposition_json(d: &SeparableDecomposition, ctx: &PrecisionContext) -> Value {
    json!({
        "sigma_a": matrix_json(&d.sigma_a, ctx),
        "sigma_b": matrix_json(&d.sigma_b, ctx),
        "noise": matrix_json(&d.noise, ctx),
        "flow_depth": d.flow_depth,
        "residual": float_str(&d.residual, ctx),
    })
}

fn status_str(s: &SoeStatus) -> &'static str {
    match s {
        SoeStatus::Ok => "ok",
        SoeStatus::NoCore => "no-core",
        SoeStatus::NoHalo => "no-halo",
        SoeStatus::Undecided => "undecided",
    }
}

pub fn soe_report_json(r: &SOEReport, ctx: &PrecisionContext) -> Value {
    json!({
        "d": r.spec.d,
        "m": r.spec.mass.to_string(),
        "r_tilde": r.spec.sep,
        "status": status_str(&r.status),
        "n_c": r.n_c,
        "N_total": float_str(&r.n_total, ctx),
        "N_halo": float_str(&r.n_halo, ctx),
        "N_haloA_rest": float_str(&r.n_halo_a_vs_rest, ctx),
        "yprime_min_eig": r.yprime_min_eigenvalue.as_ref().map(|x| float_str(x, ctx)),
        "flow_depth": r.flow_depth,
        "digits": r.digits,
        "sigma_h": r.sigma_h.as_ref().map(|m| matrix_json(m, ctx)),
    })
}

/// SOE scan CSV: columns
/// (d, m, r_tilde, N_total, N_halo, N_haloA_rest, yprime_min_eig, status).
pub fn soe_scan_csv(rows: &[SoeScanRow], ctx: &PrecisionContext) -> String {
    let mut out = String::from("d,m,r_tilde,N_total,N_halo,N_haloA_rest,yprime_min_eig,status\n");
    for row in rows {
        match &row.result {
            Ok(r) => {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    row.d,
                    row.mass,
                    row.r_tilde,
                    float_str(&r.n_total, ctx),
                    float_str(&r.n_halo, ctx),
                    float_str(&r.n_halo_a_vs_rest, ctx),
                    r.yprime_min_eigenvalue
                        .as_ref()
                        .map(|x| float_str(x, ctx))
                        .unwrap_or_default(),
                    status_str(&r.status),
                ));
            }
            Err(e) => {
                out.push_str(&format!(
                    "{},{},{},,,,,error: {}\n",
                    row.d, row.mass, row.r_tilde, e
                ));
            }
        }
    }
    out
}

pub fn soe_scan_json(rows: &[SoeScanRow], ctx: &PrecisionContext) -> Value {
    Value::Array(
        rows.iter()
            .map(|row| match &row.result {
                Ok(r) => soe_report_json(r, ctx),
                Err(e) => json!({
                    "d": row.d,
                    "m": row.mass.to_string(),
                    "r_tilde": row.r_tilde,
                    "error": e,
                }),
            })
            .collect(),
    )
}

pub fn werner_json(r: &WernerReport, ctx: &PrecisionContext) -> Value {
    json!({
        "N_total": float_str(&r.n_total, ctx),
        "pt_spectrum_min": float_str(&r.pt_spectrum_min, ctx),
        "inseparable_depth": r.inseparable_depth,
        "recomposition_exact": r.recomposition_exact,
        "noise_psd_exact": r.noise_psd_exact,
        "pair_negativity": float_str(&r.pair_negativity, ctx),
        "pair_negativity_delta": float_str(&r.pair_negativity_delta, ctx),
        "pass": r.pass(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_emitters_round_trip() {
        let ctx = PrecisionContext::with_digits(64).unwrap();
        let mut m = Matrix::identity(2, &ctx);
        m[(0, 1)] = ctx.real_from_str("-0.125").unwrap();
        let csv = matrix_csv(&m, &ctx);
        assert!(csv.contains("-1.25e-1"));
        let j = matrix_json(&m, &ctx);
        let back = j[0][1].as_str().unwrap();
        let parsed = ctx.real_from_str(back).unwrap();
        assert_eq!(parsed, m[(0, 1)]);
    }
}
