//! Symmetric eigendecomposition (cyclic Jacobi) and the routines built on it:
//! PSD tests, PSD square roots, operator norms, and Moore-Penrose
//! pseudoinverses.
//!
//! Jacobi is chosen over tridiagonalization because it is simple to make
//! deterministic (fixed sweep order), keeps eigenvectors orthonormal to
//! working precision by construction, and converges quadratically once the
//! off-diagonal mass is small -- all of which matter more here than raw
//! speed.

use super::{Matrix, PrecisionContext};
use crate::error::{Error, Result};
use rug::{Assign, Float};

/// Eigendecomposition of a symmetric matrix.
///
/// Returns eigenvalues in descending order with matching orthonormal
/// eigenvector columns. The input must be symmetric within
/// `10^-(digits-5)` relative asymmetry; it is symmetrized exactly before
/// iteration so roundoff asymmetry cannot leak into the result.
pub fn sym_eig(a: &Matrix, ctx: &PrecisionContext) -> Result<(Vec<Float>, Matrix)> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "sym_eig needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let asym = a.asymmetry();
    let sym_tol = ctx.pow10_neg(ctx.decimal_digits().saturating_sub(5));
    if asym > sym_tol {
        return Err(Error::NotSymmetric {
            asymmetry: format!("{:e}", asym.to_f64()),
        });
    }
    let n = a.rows();
    let mut m = a.symmetrize();
    let mut v = Matrix::identity(n, ctx);
    if n == 1 {
        return Ok((vec![m[(0, 0)].clone()], v));
    }

    let prec = ctx.prec_bits();
    let scale = {
        let s = m.norm_fro();
        if s.is_zero() {
            ctx.one()
        } else {
            s
        }
    };
    let conv_target = {
        let mut t = ctx.conv_tol();
        t *= &scale;
        t
    };
    // Rotations below this threshold are numerically inert.
    let rot_floor = {
        let mut t = ctx.pow10_neg(ctx.decimal_digits() + 10);
        t *= &scale;
        t
    };

    let max_sweeps = 60 + (ctx.decimal_digits() as usize) / 8;
    let mut t1 = Float::new(prec);
    let mut t2 = Float::new(prec);
    for sweep in 0..max_sweeps {
        // off-diagonal Frobenius norm
        let mut off = Float::new(prec);
        for i in 0..n {
            for j in (i + 1)..n {
                t1.assign(&m[(i, j)] * &m[(i, j)]);
                off += &t1;
            }
        }
        off *= 2u32;
        off.sqrt_mut();
        if off <= conv_target {
            return Ok(finish(m, v, n, ctx));
        }
        if sweep == max_sweeps - 1 {
            return Err(Error::EigenNonConvergence {
                sweeps: max_sweeps,
                residual: format!("{:e}", off.to_f64()),
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let mut apq = m[(p, q)].clone();
                apq.abs_mut();
                if apq <= rot_floor {
                    let z = Float::new(prec);
                    m[(p, q)] = z.clone();
                    m[(q, p)] = z;
                    continue;
                }
                // rotation angle from tau = (a_qq - a_pp) / (2 a_pq)
                let mut tau = m[(q, q)].clone();
                tau -= &m[(p, p)];
                t1.assign(&m[(p, q)] * 2u32);
                tau /= &t1;
                // t = sign(tau) / (|tau| + sqrt(1 + tau^2))
                let mut tt = tau.clone();
                tt.square_mut();
                tt += 1u32;
                tt.sqrt_mut();
                let mut abstau = tau.clone();
                abstau.abs_mut();
                tt += &abstau;
                tt.recip_mut();
                if tau.is_sign_negative() && !tau.is_zero() {
                    tt = -tt;
                }
                let mut c = tt.clone();
                c.square_mut();
                c += 1u32;
                c.sqrt_mut();
                c.recip_mut();
                let mut s = tt.clone();
                s *= &c;

                // diagonal update
                t1.assign(&tt * &m[(p, q)]);
                m[(p, p)] -= &t1;
                m[(q, q)] += &t1;
                let z = Float::new(prec);
                m[(p, q)] = z.clone();
                m[(q, p)] = z;

                // rows/cols
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = m[(i, p)].clone();
                    let aiq = m[(i, q)].clone();
                    t1.assign(&c * &aip);
                    t2.assign(&s * &aiq);
                    t1 -= &t2;
                    m[(i, p)] = t1.clone();
                    m[(p, i)] = t1.clone();
                    t1.assign(&s * &aip);
                    t2.assign(&c * &aiq);
                    t1 += &t2;
                    m[(i, q)] = t1.clone();
                    m[(q, i)] = t1.clone();
                }
                // eigenvector columns
                for i in 0..n {
                    let vip = v[(i, p)].clone();
                    let viq = v[(i, q)].clone();
                    t1.assign(&c * &vip);
                    t2.assign(&s * &viq);
                    t1 -= &t2;
                    v[(i, p)] = t1.clone();
                    t1.assign(&s * &vip);
                    t2.assign(&c * &viq);
                    t1 += &t2;
                    v[(i, q)] = t1.clone();
                }
            }
        }
    }
    unreachable!("sweep loop always returns or errors");
}

/// Sort descending and fix eigenvector signs deterministically.
fn finish(m: Matrix, v: Matrix, n: usize, ctx: &PrecisionContext) -> (Vec<Float>, Matrix) {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].partial_cmp(&m[(i, i)]).unwrap());
    let mut evals = Vec::with_capacity(n);
    let mut vecs = Matrix::zeros(n, n, ctx);
    for (dst, &src) in order.iter().enumerate() {
        evals.push(m[(src, src)].clone());
        // sign: make the largest-magnitude component positive (earliest wins ties)
        let mut best = 0usize;
        let mut bestabs = Float::new(ctx.prec_bits());
        for i in 0..n {
            let mut c = v[(i, src)].clone();
            c.abs_mut();
            if c > bestabs {
                bestabs = c;
                best = i;
            }
        }
        let flip = v[(best, src)].is_sign_negative();
        for i in 0..n {
            let mut x = v[(i, src)].clone();
            if flip {
                x = -x;
            }
            vecs[(i, dst)] = x;
        }
    }
    (evals, vecs)
}

/// PSD test with slack `10^-psd_tol_exponent` relative to the matrix norm.
/// Returns the verdict together with the minimum eigenvalue.
pub fn is_psd(a: &Matrix, ctx: &PrecisionContext) -> Result<(bool, Float)> {
    let (evals, _) = sym_eig(a, ctx)?;
    let min = evals.last().expect("nonempty").clone();
    let mut bound = ctx.psd_tol();
    let scale = {
        let mut s = evals[0].clone();
        s.abs_mut();
        let mut t = min.clone();
        t.abs_mut();
        if t > s {
            s = t;
        }
        if s.is_zero() {
            ctx.one()
        } else {
            s
        }
    };
    bound *= &scale;
    bound = -bound;
    Ok((min >= bound, min))
}

/// Symmetric PSD square root. Eigenvalues negative beyond tolerance are an
/// error; tiny negative roundoff is clamped to zero.
pub fn sqrt_psd(a: &Matrix, ctx: &PrecisionContext) -> Result<Matrix> {
    let (evals, v) = sym_eig(a, ctx)?;
    let (ok, min) = psd_verdict(&evals, ctx);
    if !ok {
        return Err(Error::NotPsd {
            min_eigenvalue: format!("{:e}", min.to_f64()),
        });
    }
    let n = a.rows();
    let mut sv = v.clone();
    for j in 0..n {
        let mut r = evals[j].clone();
        if r.is_sign_negative() {
            r = Float::new(ctx.prec_bits());
        } else {
            r.sqrt_mut();
        }
        for i in 0..n {
            sv[(i, j)] *= &r;
        }
    }
    Ok(sv.mul_transpose(&v).symmetrize())
}

fn psd_verdict(evals: &[Float], ctx: &PrecisionContext) -> (bool, Float) {
    let min = evals.last().expect("nonempty").clone();
    let mut scale = evals[0].clone();
    scale.abs_mut();
    let mut t = min.clone();
    t.abs_mut();
    if t > scale {
        scale = t;
    }
    if scale.is_zero() {
        return (true, min);
    }
    let mut bound = ctx.psd_tol();
    bound *= &scale;
    bound = -bound;
    (min >= bound, min)
}

/// Largest singular value, computed from the symmetric Jordan-Wielandt
/// embedding [[0, A], [A^T, 0]] whose extreme eigenvalues are +-sigma_max.
pub fn op_norm(a: &Matrix, ctx: &PrecisionContext) -> Result<Float> {
    let (m, n) = (a.rows(), a.cols());
    let mut j = Matrix::zeros(m + n, m + n, ctx);
    j.set_block(0, m, a);
    j.set_block(m, 0, &a.transpose());
    let (evals, _) = sym_eig(&j, ctx)?;
    let mut top = evals[0].clone();
    if top.is_sign_negative() {
        top = Float::new(ctx.prec_bits());
    }
    Ok(top)
}

/// Moore-Penrose pseudoinverse. Singular values below
/// `10^-(digits/2) * sigma_max` are treated as zero.
///
/// Symmetric inputs go through their own eigendecomposition; general inputs
/// through the A^T A route, which is accurate to the same half-precision
/// threshold the rank cutoff already imposes.
pub fn pinv(a: &Matrix, ctx: &PrecisionContext) -> Result<Matrix> {
    if a.is_square() {
        let sym_tol = ctx.pow10_neg(ctx.decimal_digits().saturating_sub(5));
        if a.asymmetry() <= sym_tol {
            return pinv_symmetric(a, ctx);
        }
    }
    // general route: V from A^T A, sigma = sqrt(eig), U = A V / sigma
    let (evals, v) = sym_eig(&a.transpose().mul(a), ctx)?;
    let n = a.cols();
    let mut smax = evals[0].clone();
    if smax.is_sign_negative() {
        smax = Float::new(ctx.prec_bits());
    }
    smax.sqrt_mut();
    let mut thr = ctx.rank_tol();
    thr *= &smax;
    let mut out = Matrix::zeros(a.cols(), a.rows(), ctx);
    let mut t = Float::new(ctx.prec_bits());
    for j in 0..n {
        if evals[j].is_sign_negative() {
            continue;
        }
        let mut sigma = evals[j].clone();
        sigma.sqrt_mut();
        if sigma <= thr {
            continue;
        }
        // u_j = A v_j / sigma; pinv += v_j u_j^T / sigma
        let vj: Vec<Float> = (0..n).map(|i| v[(i, j)].clone()).collect();
        let uj = a.mul_vec(&vj);
        let mut inv_s2 = sigma.clone();
        inv_s2.square_mut();
        inv_s2.recip_mut();
        for r in 0..a.cols() {
            for c in 0..a.rows() {
                t.assign(&vj[r] * &uj[c]);
                t *= &inv_s2;
                out[(r, c)] += &t;
            }
        }
    }
    Ok(out)
}

fn pinv_symmetric(a: &Matrix, ctx: &PrecisionContext) -> Result<Matrix> {
    let (evals, v) = sym_eig(a, ctx)?;
    let n = a.rows();
    let mut smax = Float::new(ctx.prec_bits());
    for e in &evals {
        let mut t = e.clone();
        t.abs_mut();
        if t > smax {
            smax = t;
        }
    }
    let mut thr = ctx.rank_tol();
    thr *= &smax;
    let mut out = Matrix::zeros(n, n, ctx);
    let mut t = Float::new(ctx.prec_bits());
    for j in 0..n {
        let mut mag = evals[j].clone();
        mag.abs_mut();
        if mag <= thr {
            continue;
        }
        let mut inv = evals[j].clone();
        inv.recip_mut();
        for r in 0..n {
            for c in 0..n {
                t.assign(&v[(r, j)] * &v[(c, j)]);
                t *= &inv;
                out[(r, c)] += &t;
            }
        }
    }
    Ok(out.symmetrize())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::with_digits(64).unwrap()
    }

    #[test]
    fn identity_eigenvalues() {
        let c = ctx();
        let a = Matrix::identity(3, &c);
        let (e, v) = sym_eig(&a, &c).unwrap();
        for x in &e {
            let d = x.clone() - 1u32;
            assert!(d.abs() < 1e-60);
        }
        assert_eq!(v, Matrix::identity(3, &c));
    }

    #[test]
    fn analytic_2x2() {
        let c = ctx();
        let a = Matrix::from_rows_f64(&[&[2.0, 1.0], &[1.0, 2.0]], &c);
        let (e, _) = sym_eig(&a, &c).unwrap();
        assert!((e[0].clone() - 3u32).abs() < 1e-60);
        assert!((e[1].clone() - 1u32).abs() < 1e-60);
    }

    #[test]
    fn reconstruction_random_10x10_100_digits() {
        // [DERIVED] oracle: rebuild A = V diag(e) V^T and check the residual.
        let c = PrecisionContext::with_digits(100).unwrap();
        let n = 10;
        // deterministic pseudo-random symmetric matrix
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let mut a = Matrix::zeros(n, n, &c);
        for i in 0..n {
            for j in i..n {
                let x = c.real(next());
                a[(i, j)] = x.clone();
                a[(j, i)] = x;
            }
        }
        let (e, v) = sym_eig(&a, &c).unwrap();
        let mut d = Matrix::zeros(n, n, &c);
        for i in 0..n {
            d[(i, i)] = e[i].clone();
        }
        let resid = v.mul(&d).mul_transpose(&v).sub(&a).max_abs();
        assert!(resid < 1e-90, "residual {:e}", resid.to_f64());
        // orthonormality
        let gram = v.transpose().mul(&v).sub(&Matrix::identity(n, &c)).max_abs();
        assert!(gram < 1e-90);
        // descending order
        for w in e.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn is_psd_examples() {
        let c = ctx();
        let (ok, min) = is_psd(&Matrix::identity(4, &c), &c).unwrap();
        assert!(ok);
        assert!((min - 1u32).abs() < 1e-60);

        // strictly below the tolerance floor: still PSD at 100 digits
        let c100 = PrecisionContext::with_digits(100).unwrap();
        let mut a = Matrix::identity(2, &c100);
        a[(1, 1)] = -c100.pow10_neg(200);
        let (ok, _) = is_psd(&a, &c100).unwrap();
        assert!(ok, "below-tolerance negative eigenvalue must pass");

        let mut b = Matrix::identity(2, &c);
        b[(1, 1)] = c.real(-0.5);
        let (ok, min) = is_psd(&b, &c).unwrap();
        assert!(!ok);
        assert!((min + c.real(0.5)).abs() < 1e-60);
    }

    #[test]
    fn precision_monotonicity_of_is_psd() {
        // doubling digits never flips a verdict whose margin exceeded the
        // old tolerance
        let c64 = ctx();
        let c128 = PrecisionContext::with_digits(128).unwrap();
        let mut a = Matrix::identity(3, &c64);
        a[(2, 2)] = c64.real(1e-20); // margin far above 1e-32 slack
        let (v1, _) = is_psd(&a, &c64).unwrap();
        let mut b = Matrix::identity(3, &c128);
        b[(2, 2)] = c128.real(1e-20);
        let (v2, _) = is_psd(&b, &c128).unwrap();
        assert_eq!(v1, v2);
    }

    #[test]
    fn sqrt_psd_examples() {
        let c = ctx();
        let a = Matrix::from_rows_f64(&[&[4.0, 0.0], &[0.0, 9.0]], &c);
        let r = sqrt_psd(&a, &c).unwrap();
        assert!((r[(0, 0)].clone() - 2u32).abs() < 1e-60);
        assert!((r[(1, 1)].clone() - 3u32).abs() < 1e-60);
        let i = Matrix::identity(3, &c);
        assert!(sqrt_psd(&i, &c).unwrap().sub(&i).max_abs() < 1e-60);
        let mut neg = Matrix::identity(2, &c);
        neg[(1, 1)] = c.real(-1.0);
        assert!(sqrt_psd(&neg, &c).is_err());
    }

    #[test]
    fn op_norm_examples() {
        let c = ctx();
        assert!((op_norm(&Matrix::identity(5, &c), &c).unwrap() - 1u32).abs() < 1e-55);
        let d = Matrix::from_rows_f64(&[&[3.0, 0.0], &[0.0, -7.0]], &c);
        assert!((op_norm(&d, &c).unwrap() - 7u32).abs() < 1e-55);
        // oracle: sqrt of max eigenvalue of A^T A, through an independent route
        let a = Matrix::from_rows_f64(&[&[1.0, 2.0, 0.5], &[-1.0, 0.25, 3.0]], &c);
        let (e, _) = sym_eig(&a.transpose().mul(&a), &c).unwrap();
        let mut oracle = e[0].clone();
        oracle.sqrt_mut();
        let got = op_norm(&a, &c).unwrap();
        assert!((got - oracle).abs() < 1e-50);
    }

    #[test]
    fn pinv_examples() {
        let c = ctx();
        // invertible: pinv == inverse
        let a = Matrix::from_rows_f64(&[&[2.0, 1.0], &[1.0, 3.0]], &c);
        let p = pinv(&a, &c).unwrap();
        let resid = a.mul(&p).sub(&Matrix::identity(2, &c)).max_abs();
        assert!(resid < 1e-50);
        // rank-1 analytic case
        let r1 = Matrix::from_rows_f64(&[&[1.0, 1.0], &[1.0, 1.0]], &c);
        let p1 = pinv(&r1, &c).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((p1[(i, j)].clone() - c.real(0.25)).abs() < 1e-50);
            }
        }
    }

    #[test]
    fn pinv_penrose_conditions_general() {
        let c = ctx();
        // non-symmetric, rank-deficient 3x2
        let a = Matrix::from_rows_f64(&[&[1.0, 2.0], &[2.0, 4.0], &[3.0, 6.0]], &c);
        let p = pinv(&a, &c).unwrap();
        let apa = a.mul(&p).mul(&a).sub(&a).max_abs();
        let pap = p.mul(&a).mul(&p).sub(&p).max_abs();
        assert!(apa < 1e-30, "A pinv A = A residual {:e}", apa.to_f64());
        assert!(pap < 1e-30);
        let ap = a.mul(&p);
        assert!(ap.asymmetry() < 1e-30);
        let pa = p.mul(&a);
        assert!(pa.asymmetry() < 1e-30);
    }
}
