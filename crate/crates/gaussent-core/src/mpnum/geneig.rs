//! Real nonsymmetric eigensolver for matrices with (numerically) real
//! spectra, e.g. products of symmetric positive-definite factors.
//!
//! Hessenberg reduction followed by explicitly shifted QR with Wilkinson
//! shifts; eigenvectors recovered by inverse iteration on the original
//! matrix. Complex pairs beyond tolerance are reported as errors, matching
//! the contract that only real-spectrum inputs are supported.

use super::{Matrix, PrecisionContext};
use crate::error::{Error, Result};
use rug::{Assign, Float};

/// Eigendecomposition of a square matrix with real spectrum.
///
/// Returns `(eigenvalues desc, right_vectors, left_vectors)` with vectors in
/// matching columns, each of unit 2-norm with a deterministic sign. Left
/// vectors satisfy `v_L^T A = lambda v_L^T`.
pub fn gen_eig(a: &Matrix, ctx: &PrecisionContext) -> Result<(Vec<Float>, Matrix, Matrix)> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "gen_eig needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let mut evals = qr_eigenvalues(a, ctx)?;
    evals.sort_by(|x, y| y.partial_cmp(x).unwrap());

    let right = eigenvectors(a, &evals, ctx)?;
    let left = eigenvectors(&a.transpose(), &evals, ctx)?;
    Ok((evals, right, left))
}

fn qr_eigenvalues(a: &Matrix, ctx: &PrecisionContext) -> Result<Vec<Float>> {
    let n = a.rows();
    let prec = ctx.prec_bits();
    let mut h = hessenberg(a, ctx);
    let scale = {
        let s = h.max_abs();
        if s.is_zero() {
            ctx.one()
        } else {
            s
        }
    };
    let defl_tol = {
        let mut t = ctx.conv_tol();
        t *= &scale;
        t
    };
    // tolerance for declaring a 2x2 block's imaginary part negligible
    let imag_tol = {
        let mut t = ctx.pow10_neg(ctx.decimal_digits() / 2);
        t *= &scale;
        t
    };

    let mut evals: Vec<Float> = Vec::with_capacity(n);
    let mut hi = n; // active block is 0..hi
    let max_iter = 80 * n + 4 * ctx.decimal_digits() as usize;
    let mut iter = 0usize;
    let mut stagnant = 0usize;
    while hi > 0 {
        if hi == 1 {
            evals.push(h[(0, 0)].clone());
            hi = 0;
            continue;
        }
        // deflate trailing entries
        let mut sub = h[(hi - 1, hi - 2)].clone();
        sub.abs_mut();
        if sub <= defl_tol {
            evals.push(h[(hi - 1, hi - 1)].clone());
            hi -= 1;
            stagnant = 0;
            continue;
        }
        if hi >= 3 {
            let mut sub2 = h[(hi - 2, hi - 3)].clone();
            sub2.abs_mut();
            if sub2 <= defl_tol {
                // isolated trailing 2x2 block
                let (l1, l2) = solve_2x2(&h, hi - 2, &imag_tol, ctx)?;
                evals.push(l1);
                evals.push(l2);
                hi -= 2;
                stagnant = 0;
                continue;
            }
        } else {
            // whole remaining block is 2x2
            let (l1, l2) = solve_2x2(&h, 0, &imag_tol, ctx)?;
            evals.push(l1);
            evals.push(l2);
            hi = 0;
            continue;
        }
        iter += 1;
        stagnant += 1;
        if iter > max_iter {
            return Err(Error::EigenNonConvergence {
                sweeps: iter,
                residual: format!("{:e}", sub.to_f64()),
            });
        }
        // Wilkinson shift from trailing 2x2 (real part when complex)
        let p = hi - 2;
        let tr_half = {
            let mut t = h[(p, p)].clone();
            t += &h[(p + 1, p + 1)];
            t /= 2u32;
            t
        };
        let mut disc = h[(p, p)].clone();
        disc -= &h[(p + 1, p + 1)];
        disc /= 2u32;
        disc.square_mut();
        let mut cross = Float::new(prec);
        cross.assign(&h[(p, p + 1)] * &h[(p + 1, p)]);
        disc += &cross;
        let mut mu = if disc.is_sign_negative() {
            tr_half.clone()
        } else {
            let mut root = disc.clone();
            root.sqrt_mut();
            let mut cand1 = tr_half.clone();
            cand1 += &root;
            let mut cand2 = tr_half.clone();
            cand2 -= &root;
            let mut d1 = cand1.clone();
            d1 -= &h[(p + 1, p + 1)];
            d1.abs_mut();
            let mut d2 = cand2.clone();
            d2 -= &h[(p + 1, p + 1)];
            d2.abs_mut();
            if d1 < d2 {
                cand1
            } else {
                cand2
            }
        };
        if stagnant > 0 && stagnant % 16 == 0 {
            // exceptional shift to break symmetry-induced cycling
            let mut bump = h[(hi - 1, hi - 2)].clone();
            bump.abs_mut();
            mu += &bump;
        }
        qr_step(&mut h, hi, &mu, ctx);
    }
    Ok(evals)
}

/// Eigenvalues of the 2x2 block at (k, k); errors if genuinely complex.
fn solve_2x2(h: &Matrix, k: usize, imag_tol: &Float, ctx: &PrecisionContext) -> Result<(Float, Float)> {
    let prec = ctx.prec_bits();
    let mut half_tr = h[(k, k)].clone();
    half_tr += &h[(k + 1, k + 1)];
    half_tr /= 2u32;
    let mut disc = h[(k, k)].clone();
    disc -= &h[(k + 1, k + 1)];
    disc /= 2u32;
    disc.square_mut();
    let mut cross = Float::new(prec);
    cross.assign(&h[(k, k + 1)] * &h[(k + 1, k)]);
    disc += &cross;
    if disc.is_sign_negative() {
        let mut imag = disc.clone();
        imag = -imag;
        imag.sqrt_mut();
        if imag > *imag_tol {
            return Err(Error::ComplexEigenvalue {
                imag_magnitude: format!("{:e}", imag.to_f64()),
                index: k,
            });
        }
        // truncate the sub-tolerance imaginary part
        return Ok((half_tr.clone(), half_tr));
    }
    let mut root = disc;
    root.sqrt_mut();
    let mut l1 = half_tr.clone();
    l1 += &root;
    let mut l2 = half_tr;
    l2 -= &root;
    Ok((l1, l2))
}

/// Householder reduction to upper Hessenberg form.
fn hessenberg(a: &Matrix, ctx: &PrecisionContext) -> Matrix {
    let n = a.rows();
    let prec = ctx.prec_bits();
    let mut h = a.clone();
    let mut t = Float::new(prec);
    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k below the subdiagonal
        let mut alpha2 = Float::new(prec);
        for i in (k + 1)..n {
            t.assign(&h[(i, k)] * &h[(i, k)]);
            alpha2 += &t;
        }
        if alpha2.is_zero() {
            continue;
        }
        let mut alpha = alpha2.clone();
        alpha.sqrt_mut();
        if !h[(k + 1, k)].is_sign_negative() {
            alpha = -alpha;
        }
        // v = x - alpha e1, beta = 2 / |v|^2
        let mut v: Vec<Float> = (k + 1..n).map(|i| h[(i, k)].clone()).collect();
        v[0] -= &alpha;
        let mut vnorm2 = Float::new(prec);
        for x in &v {
            t.assign(x * x);
            vnorm2 += &t;
        }
        if vnorm2.is_zero() {
            continue;
        }
        let mut beta = Float::with_val(prec, 2u32);
        beta /= &vnorm2;
        // H := (I - beta v v^T) H (applied to rows k+1..n)
        for j in k..n {
            let mut dot = Float::new(prec);
            for (vi, i) in v.iter().zip(k + 1..n) {
                t.assign(vi * &h[(i, j)]);
                dot += &t;
            }
            dot *= &beta;
            for (vi, i) in v.iter().zip(k + 1..n) {
                t.assign(vi * &dot);
                h[(i, j)] -= &t;
            }
        }
        // H := H (I - beta v v^T) (applied to cols k+1..n)
        for i in 0..n {
            let mut dot = Float::new(prec);
            for (vj, j) in v.iter().zip(k + 1..n) {
                t.assign(vj * &h[(i, j)]);
                dot += &t;
            }
            dot *= &beta;
            for (vj, j) in v.iter().zip(k + 1..n) {
                t.assign(vj * &dot);
                h[(i, j)] -= &t;
            }
        }
        // enforce the zeros
        h[(k + 1, k)] = alpha;
        for i in (k + 2)..n {
            h[(i, k)] = Float::new(prec);
        }
    }
    h
}

/// One explicit shifted QR step on the leading `hi x hi` block via Givens
/// rotations: H := R Q + mu I where Q R = H - mu I.
fn qr_step(h: &mut Matrix, hi: usize, mu: &Float, ctx: &PrecisionContext) {
    let prec = ctx.prec_bits();
    let mut t1 = Float::new(prec);
    let mut t2 = Float::new(prec);
    for i in 0..hi {
        h[(i, i)] -= mu;
    }
    let mut rotations: Vec<(Float, Float)> = Vec::with_capacity(hi - 1);
    for k in 0..hi - 1 {
        // Givens to zero h[k+1, k]
        let a = h[(k, k)].clone();
        let b = h[(k + 1, k)].clone();
        let mut r = Float::new(prec);
        t1.assign(&a * &a);
        r += &t1;
        t1.assign(&b * &b);
        r += &t1;
        r.sqrt_mut();
        let (c, s) = if r.is_zero() {
            (ctx.one(), Float::new(prec))
        } else {
            let mut c = a.clone();
            c /= &r;
            let mut s = b.clone();
            s /= &r;
            (c, s)
        };
        for j in k..hi {
            let x = h[(k, j)].clone();
            let y = h[(k + 1, j)].clone();
            t1.assign(&c * &x);
            t2.assign(&s * &y);
            t1 += &t2;
            h[(k, j)] = t1.clone();
            t1.assign(&c * &y);
            t2.assign(&s * &x);
            t1 -= &t2;
            h[(k + 1, j)] = t1.clone();
        }
        rotations.push((c, s));
    }
    for (k, (c, s)) in rotations.iter().enumerate() {
        let top = (k + 2).min(hi);
        for i in 0..top {
            let x = h[(i, k)].clone();
            let y = h[(i, k + 1)].clone();
            t1.assign(c * &x);
            t2.assign(s * &y);
            t1 += &t2;
            h[(i, k)] = t1.clone();
            t1.assign(c * &y);
            t2.assign(s * &x);
            t1 -= &t2;
            h[(i, k + 1)] = t1.clone();
        }
    }
    for i in 0..hi {
        h[(i, i)] += mu;
    }
}

/// Inverse iteration for each eigenvalue; repeated eigenvalues are handled
/// by orthogonalizing against earlier vectors of the same cluster.
fn eigenvectors(a: &Matrix, evals: &[Float], ctx: &PrecisionContext) -> Result<Matrix> {
    let n = a.rows();
    let prec = ctx.prec_bits();
    let mut out = Matrix::zeros(n, n, ctx);
    let cluster_tol = {
        let mut t = ctx.pow10_neg(ctx.decimal_digits() / 2);
        let s = a.max_abs();
        if !s.is_zero() {
            t *= &s;
        }
        t
    };
    let mut t = Float::new(prec);
    for (j, lam) in evals.iter().enumerate() {
        // jitter keeps the shifted matrix invertible at exact eigenvalues
        let mut jitter = ctx.pow10_neg(2 * ctx.decimal_digits() / 3);
        let mut scale = lam.clone();
        scale.abs_mut();
        if scale < 1 {
            scale = ctx.one();
        }
        jitter *= &scale;
        let mut shifted = a.clone();
        for i in 0..n {
            shifted[(i, i)] -= lam;
            shifted[(i, i)] -= &jitter;
        }
        // deterministic generic start vector
        let mut v: Vec<Float> = (0..n).map(|i| ctx.real(1u32) / ctx.real((i + 1) as u32)).collect();
        // same-cluster deflation
        let mut cluster: Vec<usize> = Vec::new();
        for k in 0..j {
            let mut d = evals[k].clone();
            d -= lam;
            d.abs_mut();
            if d <= cluster_tol {
                cluster.push(k);
            }
        }
        for _pass in 0..3 {
            for &k in &cluster {
                let mut dot = Float::new(prec);
                for i in 0..n {
                    t.assign(&out[(i, k)] * &v[i]);
                    dot += &t;
                }
                for i in 0..n {
                    t.assign(&out[(i, k)] * &dot);
                    v[i] -= &t;
                }
            }
            v = shifted.lu_solve(&v)?;
            let mut norm = Float::new(prec);
            for x in &v {
                t.assign(x * x);
                norm += &t;
            }
            norm.sqrt_mut();
            for x in v.iter_mut() {
                *x /= &norm;
            }
        }
        // deterministic sign
        let mut best = 0usize;
        let mut bestabs = Float::new(prec);
        for (i, x) in v.iter().enumerate() {
            let mut m = x.clone();
            m.abs_mut();
            if m > bestabs {
                bestabs = m;
                best = i;
            }
        }
        let flip = v[best].is_sign_negative();
        for (i, x) in v.into_iter().enumerate() {
            out[(i, j)] = if flip { -x } else { x };
        }
    }
    Ok(out)
}
