//! Vacuum two-point correlators of the 1D free massive lattice scalar field
//! and the covariance matrix of two disjoint regions.
//!
//! Correlators are momentum integrals over the Brillouin zone,
//!
//!   G(n) = (1/pi) int_0^pi dk cos(k n) / (2 w_k),
//!   H(n) = (1/pi) int_0^pi dk w_k cos(k n) / 2,
//!
//! with w_k = sqrt(m^2 + 4 sin^2(k/2)). They are evaluated by panelized
//! Gauss-Legendre quadrature with panels sized to both the oscillation of
//! cos(k n) and the small-k feature of w_k at small mass, then verified
//! against a higher-order rule on the same panels.

use crate::cm::{CovarianceMatrix, ModeLayout};
use crate::error::{Error, Result};
use crate::mpnum::{Matrix, PrecisionContext};
use rug::ops::Pow;
use rug::{Assign, Float, Rational};

/// Two disjoint d-site regions separated by `sep` lattice units, field mass
/// `m` in lattice units (kept exact as a rational so precision changes never
/// reinterpret the input).
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    pub d: usize,
    pub sep: usize,
    pub mass: Rational,
}

impl RegionSpec {
    pub fn new(d: usize, sep: usize, mass: Rational) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("region size d must be >= 1".into()));
        }
        if mass <= 0 {
            return Err(Error::InvalidArgument("mass must be positive".into()));
        }
        Ok(Self { d, sep, mass })
    }

    pub fn from_strs(d: usize, sep: usize, mass: &str) -> Result<Self> {
        Self::new(d, sep, parse_rational(mass)?)
    }

    /// The fixed-correlation-length mass rule m = 3e-3 / d.
    pub fn with_mass_rule(d: usize, sep: usize) -> Result<Self> {
        let mass = Rational::from((3u32, 1000u32)) / Rational::from(d as u64);
        Self::new(d, sep, mass)
    }
}

/// Parse a decimal/scientific literal into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = s[pos + 1..]
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad exponent in '{s}'")))?;
            (&s[..pos], e)
        }
        None => (s, 0i64),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(pos) => (&mant[..pos], &mant[pos + 1..]),
        None => (mant, ""),
    };
    let digits: String = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(Error::InvalidArgument(format!("cannot parse number '{s}'")));
    }
    let num: rug::Integer = digits
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("cannot parse number '{s}'")))?;
    let shift = exp - frac_part.len() as i64;
    let mut r = Rational::from(num);
    let ten = rug::Integer::from(10);
    if shift >= 0 {
        r *= Rational::from(ten.pow(shift as u32));
    } else {
        r /= Rational::from(ten.pow((-shift) as u32));
    }
    Ok(r)
}

/// Lattice dispersion w_k = sqrt(m^2 + 4 sin^2(k/2)).
pub fn dispersion(k: &Float, m: &Float) -> Float {
    let prec = k.prec().max(m.prec());
    let mut half = k.clone();
    half /= 2u32;
    half.sin_mut();
    half.square_mut();
    half *= 4u32;
    let mut m2 = Float::with_val(prec, m);
    m2.square_mut();
    half += &m2;
    half.sqrt_mut();
    half
}

/// Field and momentum correlators G(n), H(n) for n = 0..=max_offset at one
/// mass, all from a shared set of quadrature panels. Converged to a relative
/// error of 10^-(digits-5); a failed cross-check after panel refinement is a
/// hard error carrying the residual.
pub struct CorrelatorTable {
    pub g: Vec<Float>,
    pub h: Vec<Float>,
}

pub fn correlators(max_offset: usize, mass: &Rational, ctx: &PrecisionContext) -> Result<CorrelatorTable> {
    let prec = ctx.prec_bits();
    let m = ctx.real_from_rational(mass);
    let pi = ctx.pi();
    let target = ctx.pow10_neg(ctx.decimal_digits().saturating_sub(5));

    let order = ((2 * ctx.decimal_digits()) / 3).max(24) as usize;
    let mut splits = 1usize;
    let max_rounds = 4;
    for round in 0..max_rounds {
        let panels = build_panels(max_offset, &m, &pi, splits, ctx);
        let (g1, h1) = eval_family(&panels, order, max_offset, &m, &pi, ctx)?;
        let (g2, h2) = eval_family(&panels, order + 12, max_offset, &m, &pi, ctx)?;
        // relative cross-check with an absolute floor tied to the family scale
        let mut scale = Float::new(prec);
        for x in g2.iter().chain(h2.iter()) {
            let mut a = x.clone();
            a.abs_mut();
            if a > scale {
                scale = a;
            }
        }
        let mut floor = ctx.pow10_neg(ctx.decimal_digits());
        floor *= &scale;
        let mut worst = Float::new(prec);
        for (a, b) in g1.iter().zip(&g2).chain(h1.iter().zip(&h2)) {
            let mut num = a.clone();
            num -= b;
            num.abs_mut();
            let mut den = b.clone();
            den.abs_mut();
            if den < floor {
                den = floor.clone();
            }
            num /= &den;
            if num > worst {
                worst = num;
            }
        }
        if worst <= target {
            return Ok(CorrelatorTable { g: g2, h: h2 });
        }
        if round == max_rounds - 1 {
            return Err(Error::QuadratureNonConvergence {
                residual: format!("{:e}", worst.to_f64()),
                target: format!("{:e}", target.to_f64()),
            });
        }
        splits *= 2;
    }
    unreachable!()
}

/// Panel breakpoints: half-period grid for the fastest oscillation plus
/// geometric refinement of the small-k region at scale m.
fn build_panels(max_offset: usize, m: &Float, pi: &Float, splits: usize, ctx: &PrecisionContext) -> Vec<Float> {
    let prec = ctx.prec_bits();
    let d = max_offset.max(1) as u32;
    let mut pts: Vec<Float> = Vec::new();
    let mut h = pi.clone();
    h /= d;
    // geometric points m/4 * 2^j below the first oscillation breakpoint
    let mut x = Float::with_val(prec, m);
    x /= 4u32;
    while x < h {
        pts.push(x.clone());
        x *= 2u32;
    }
    for i in 1..=d {
        let mut p = h.clone();
        p *= i;
        pts.push(p);
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    // optional uniform refinement of every panel
    if splits > 1 {
        let mut refined = Vec::with_capacity(pts.len() * splits);
        let mut lo = Float::new(prec);
        for p in &pts {
            for s in 1..splits {
                let mut mid = p.clone();
                mid -= &lo;
                mid *= s as u32;
                mid /= splits as u32;
                mid += &lo;
                refined.push(mid);
            }
            refined.push(p.clone());
            lo = p.clone();
        }
        pts = refined;
    }
    pts
}

/// Evaluate the whole offset family on one rule: per panel node, weigh the
/// two smooth factors once, then run the cos(n k) Chebyshev recurrence over
/// offsets.
fn eval_family(
    panels: &[Float],
    order: usize,
    max_offset: usize,
    m: &Float,
    pi: &Float,
    ctx: &PrecisionContext,
) -> Result<(Vec<Float>, Vec<Float>)> {
    let prec = ctx.prec_bits();
    let (nodes, weights) = gauss_legendre(order, ctx);
    let mut wg: Vec<Float> = Vec::new(); // weight * 1/(2 w_k) / pi
    let mut wh: Vec<Float> = Vec::new(); // weight * w_k / 2 / pi
    let mut ck: Vec<Float> = Vec::new(); // cos k
    let mut lo = Float::new(prec);
    let mut t = Float::new(prec);
    for hi_pt in panels {
        let mut half = hi_pt.clone();
        half -= &lo;
        half /= 2u32;
        let mut mid = hi_pt.clone();
        mid += &lo;
        mid /= 2u32;
        for (x, w) in nodes.iter().zip(&weights) {
            let mut k = half.clone();
            k *= x;
            k += &mid;
            let om = dispersion(&k, m);
            let mut scale = half.clone();
            scale *= w;
            scale /= pi;
            let mut g = om.clone();
            g *= 2u32;
            g.recip_mut();
            g *= &scale;
            let mut h = om;
            h /= 2u32;
            h *= &scale;
            wg.push(g);
            wh.push(h);
            k.cos_mut();
            ck.push(k);
        }
        lo = hi_pt.clone();
    }
    let n_nodes = ck.len();
    let mut cprev: Vec<Float> = (0..n_nodes).map(|_| ctx.one()).collect(); // cos(0 k)
    let mut ccur: Vec<Float> = ck.clone(); // cos(1 k)
    let mut g_out = Vec::with_capacity(max_offset + 1);
    let mut h_out = Vec::with_capacity(max_offset + 1);
    for n in 0..=max_offset {
        let c: &Vec<Float> = if n == 0 { &cprev } else { &ccur };
        let mut gacc = Float::new(prec);
        let mut hacc = Float::new(prec);
        for i in 0..n_nodes {
            t.assign(&wg[i] * &c[i]);
            gacc += &t;
            t.assign(&wh[i] * &c[i]);
            hacc += &t;
        }
        g_out.push(gacc);
        h_out.push(hacc);
        if n >= 1 && n < max_offset {
            // cos((n+1)k) = 2 cos k cos(n k) - cos((n-1)k)
            for i in 0..n_nodes {
                t.assign(&ck[i] * &ccur[i]);
                t *= 2u32;
                t -= &cprev[i];
                cprev[i] = std::mem::replace(&mut ccur[i], t.clone());
            }
        }
    }
    Ok((g_out, h_out))
}

/// Gauss-Legendre nodes and weights on [-1, 1] at working precision.
fn gauss_legendre(order: usize, ctx: &PrecisionContext) -> (Vec<Float>, Vec<Float>) {
    let prec = ctx.prec_bits() + 32;
    let pi = Float::with_val(prec, rug::float::Constant::Pi);
    let mut nodes = Vec::with_capacity(order);
    let mut weights = Vec::with_capacity(order);
    let newton_tol = {
        let mut t = Float::with_val(prec, 2u32);
        t >>= prec - 8;
        t
    };
    for i in 0..order {
        // Tricomi-style initial guess
        let mut x = pi.clone();
        x *= Float::with_val(prec, i as u32 + 1) - Float::with_val(prec, 0.25);
        x /= Float::with_val(prec, order as u32) + Float::with_val(prec, 0.5);
        x.cos_mut();
        let mut dp = Float::new(prec);
        for _ in 0..200 {
            let (p, d) = legendre_and_deriv(order, &x, prec);
            dp = d;
            let mut step = p;
            step /= &dp;
            x -= &step;
            step.abs_mut();
            if step < newton_tol {
                break;
            }
        }
        let mut w = x.clone();
        w.square_mut();
        w = -(w - 1u32);
        let mut d2 = dp.clone();
        d2.square_mut();
        w *= &d2;
        w.recip_mut();
        w *= 2u32;
        nodes.push(Float::with_val(ctx.prec_bits(), &x));
        weights.push(Float::with_val(ctx.prec_bits(), &w));
    }
    (nodes, weights)
}

fn legendre_and_deriv(order: usize, x: &Float, prec: u32) -> (Float, Float) {
    let mut p0 = Float::with_val(prec, 1u32);
    let mut p1 = x.clone();
    let mut t = Float::new(prec);
    for k in 2..=order {
        // k P_k = (2k-1) x P_{k-1} - (k-1) P_{k-2}
        let mut pk = x.clone();
        pk *= &p1;
        pk *= 2 * k as u32 - 1;
        t.assign(&p0 * (k as u32 - 1));
        pk -= &t;
        pk /= k as u32;
        p0 = std::mem::replace(&mut p1, pk);
    }
    // P'_n = n (x P_n - P_{n-1}) / (x^2 - 1)
    let mut num = x.clone();
    num *= &p1;
    num -= &p0;
    num *= order as u32;
    let mut den = x.clone();
    den.square_mut();
    den -= 1u32;
    num /= &den;
    (p1, num)
}

/// Covariance matrix of the two regions: sigma = 2 <r r^T> with
/// sigma[2i, 2j] = 2 G(|x_i - x_j|), sigma[2i+1, 2j+1] = 2 H(|x_i - x_j|),
/// and vanishing phi-pi cross entries. The result is bonafide-checked; a
/// failure signals a quadrature or precision fault.
pub fn build_region_cm(spec: &RegionSpec, ctx: &PrecisionContext) -> Result<CovarianceMatrix> {
    let layout = ModeLayout::two_regions(spec.d, spec.sep);
    let n = layout.n_modes();
    let sites: Vec<i64> = layout.modes.iter().map(|m| m.site.unwrap()).collect();
    let max_offset = (2 * spec.d + spec.sep).saturating_sub(1);
    let table = correlators(max_offset, &spec.mass, ctx)?;
    let mut mat = Matrix::zeros(2 * n, 2 * n, ctx);
    for i in 0..n {
        for j in 0..n {
            let off = (sites[i] - sites[j]).unsigned_abs() as usize;
            let mut g = table.g[off].clone();
            g *= 2u32;
            let mut h = table.h[off].clone();
            h *= 2u32;
            mat[(2 * i, 2 * j)] = g;
            mat[(2 * i + 1, 2 * j + 1)] = h;
        }
    }
    let cm = CovarianceMatrix::new(mat, layout)?;
    let (ok, margin) = crate::symplectic::check_bonafide(&cm.mat, ctx)?;
    if !ok {
        return Err(Error::NotBonafide {
            margin: format!("{:e}", margin.to_f64()),
        });
    }
    Ok(cm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::with_digits(64).unwrap()
    }

    #[test]
    fn dispersion_examples() {
        let c = ctx();
        let m = c.real_from_str("0.003").unwrap();
        let k0 = c.zero();
        assert!((dispersion(&k0, &m) - m.clone()).abs() < 1e-60);
        // k = pi, m -> 0: w = 2
        let tiny = c.real_from_str("1e-30").unwrap();
        let w = dispersion(&c.pi(), &tiny);
        assert!((w - 2u32).abs() < 1e-25);
        // k = pi/2, m = 1: w = sqrt(3)  (4 sin^2(pi/4) = 2, + 1)
        let mut half_pi = c.pi();
        half_pi /= 2u32;
        let w = dispersion(&half_pi, &c.one());
        let mut three = c.real(3u32);
        three.sqrt_mut();
        assert!((w - three).abs() < 1e-60);
    }

    #[test]
    fn massless_limit_momentum_correlators() {
        // [DERIVED] symbolic massless integrals: 2 H(0) -> 4/pi and
        // 2 H(1) -> -4/(3 pi). A tiny mass stands in for the limit; its
        // leading correction is O(m^2 log m), far below the tolerance used.
        let c = ctx();
        let m = parse_rational("1e-12").unwrap();
        let t = correlators(1, &m, &c).unwrap();
        let mut want0 = c.pi();
        want0.recip_mut();
        want0 *= 4u32;
        let mut got0 = t.h[0].clone();
        got0 *= 2u32;
        assert!((got0 - &want0).abs() < 1e-20);
        let mut want1 = c.pi();
        want1 *= 3u32;
        want1.recip_mut();
        want1 *= 4u32;
        let mut got1 = t.h[1].clone();
        got1 *= 2u32;
        got1 += &want1;
        assert!(got1.abs() < 1e-20);
    }

    #[test]
    fn printed_cm_entries_at_m_0003() {
        // sigma entries of the d=2 example: 2G(0)=2.51, 2G(1)=1.87, 2H(1)=-0.424
        let c = ctx();
        let m = parse_rational("0.003").unwrap();
        let t = correlators(3, &m, &c).unwrap();
        let g0 = 2.0 * t.g[0].to_f64();
        let g1 = 2.0 * t.g[1].to_f64();
        let h1 = 2.0 * t.h[1].to_f64();
        assert!((g0 - 2.51).abs() < 0.005, "2G(0) = {g0}");
        assert!((g1 - 1.87).abs() < 0.005, "2G(1) = {g1}");
        assert!((h1 + 0.424).abs() < 0.0005, "2H(1) = {h1}");
    }

    #[test]
    fn toeplitz_and_monotone_decay() {
        let c = ctx();
        let m = parse_rational("0.05").unwrap();
        let t = correlators(12, &m, &c).unwrap();
        for w in t.g.windows(2) {
            let mut a = w[0].clone();
            a.abs_mut();
            let mut b = w[1].clone();
            b.abs_mut();
            assert!(a > b, "|G| must decay strictly");
        }
        // Toeplitz structure of the built CM
        let spec = RegionSpec::from_strs(3, 1, "0.05").unwrap();
        let cm = build_region_cm(&spec, &c).unwrap();
        let sites: Vec<i64> = cm.layout.modes.iter().map(|mm| mm.site.unwrap()).collect();
        for i in 0..6 {
            for j in 0..6 {
                let off = (sites[i] - sites[j]).unsigned_abs() as usize;
                let mut want = t.g[off].clone();
                want *= 2u32;
                let diff = cm.mat[(2 * i, 2 * j)].clone() - want;
                assert!(diff.abs() < 1e-55);
                assert!(cm.mat[(2 * i, 2 * j + 1)].is_zero());
            }
        }
    }

    #[test]
    fn single_mode_region() {
        // d=1: 2x2 diag(2G(0), 2H(0)); symplectic eigenvalue 2 sqrt(G0 H0) >= 1
        let c = ctx();
        let spec = RegionSpec::from_strs(1, 0, "0.5").unwrap();
        let cm = build_region_cm(&spec, &c).unwrap();
        assert_eq!(cm.mat.rows(), 4);
        let m = parse_rational("0.5").unwrap();
        let t = correlators(1, &m, &c).unwrap();
        let mut want = t.g[0].clone();
        want *= 2u32;
        assert!((cm.mat[(0, 0)].clone() - want).abs() < 1e-55);
        let mut nu = t.g[0].clone();
        nu *= &t.h[0];
        nu.sqrt_mut();
        nu *= 2u32;
        assert!(nu >= 1);
    }

    #[test]
    fn parse_rational_forms() {
        assert_eq!(parse_rational("0.003").unwrap(), Rational::from((3u32, 1000u32)));
        assert_eq!(parse_rational("3e-4").unwrap(), Rational::from((3u32, 10000u32)));
        assert_eq!(parse_rational("1.5e-4").unwrap(), Rational::from((3u32, 20000u32)));
        assert_eq!(parse_rational("10").unwrap(), Rational::from(10u32));
        assert!(parse_rational("abc").is_err());
    }
}
