//! Symplectic-geometry core: the form Omega, partial transposition,
//! symplectic spectra, the bonafide (physicality) test, Williamson normal
//! form, and the pure/noise split of a mixed CM.

use crate::cm::coord_indices;
use crate::error::{Error, Result};
use crate::mpnum::{self, Matrix, PrecisionContext};
use rug::{Assign, Float};

/// Block-diagonal symplectic form, [[0, 1], [-1, 0]] per mode in the
/// interleaved basis.
pub fn omega(n_modes: usize, ctx: &PrecisionContext) -> Matrix {
    let mut o = Matrix::zeros(2 * n_modes, 2 * n_modes, ctx);
    for i in 0..n_modes {
        o[(2 * i, 2 * i + 1)] = ctx.one();
        o[(2 * i + 1, 2 * i)] = -ctx.one();
    }
    o
}

/// A real transform certified (to tolerance) to preserve the symplectic form.
#[derive(Debug, Clone)]
pub struct SymplecticTransform {
    pub mat: Matrix,
    pub certified_tolerance: Float,
}

impl SymplecticTransform {
    /// Certify `mat` against ||S Omega S^T - Omega||_F <= 10^-(digits-10) ||Omega||_F.
    pub fn certify(mat: Matrix, ctx: &PrecisionContext) -> Result<Self> {
        let n_modes = mat.rows() / 2;
        let om = omega(n_modes, ctx);
        let resid = mat.congruence(&om).sub(&om).norm_fro();
        let mut bound = ctx.symplectic_tol();
        bound *= &om.norm_fro();
        if resid > bound {
            return Err(Error::PrecisionExhausted(format!(
                "symplectic certification failed: residual {:e} > bound {:e}",
                resid.to_f64(),
                bound.to_f64()
            )));
        }
        Ok(Self {
            mat,
            certified_tolerance: bound,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.mat.rows() / 2
    }
}

/// Partial transpose: negate the conjugate momenta of the given modes
/// (sigma^Gamma = Gamma sigma Gamma).
pub fn partial_transpose(sigma: &Matrix, flipped_modes: &[usize]) -> Matrix {
    let mut out = sigma.clone();
    let n = sigma.rows();
    for &m in flipped_modes {
        let r = 2 * m + 1;
        // row and column pass together square the sign on (r, r) and on
        // pi-pi entries between two flipped modes, leaving them unchanged
        for j in 0..n {
            let v = out[(r, j)].clone();
            out[(r, j)] = -v;
            let v = out[(j, r)].clone();
            out[(j, r)] = -v;
        }
    }
    out
}

/// True iff all phi-pi cross entries vanish to tolerance (relative to the
/// matrix scale). Such CMs admit PT-informed local transforms.
pub fn is_d_type(sigma: &Matrix, ctx: &PrecisionContext) -> bool {
    let n_modes = sigma.rows() / 2;
    let mut worst = ctx.zero();
    for i in 0..n_modes {
        for j in 0..n_modes {
            for (r, c) in [(2 * i, 2 * j + 1), (2 * i + 1, 2 * j)] {
                let mut v = sigma[(r, c)].clone();
                v.abs_mut();
                if v > worst {
                    worst = v;
                }
            }
        }
    }
    let mut bound = ctx.psd_tol();
    let scale = sigma.max_abs();
    if scale.is_zero() {
        return true;
    }
    bound *= &scale;
    worst <= bound
}

/// Extract the site-space phi-phi and pi-pi blocks of a D-type CM (these are
/// the sigma-normalized correlator matrices, i.e. 2G and 2H).
pub fn quadrature_blocks(sigma: &Matrix, ctx: &PrecisionContext) -> (Matrix, Matrix) {
    let n = sigma.rows() / 2;
    let g = Matrix::from_fn(n, n, ctx, |i, j| sigma[(2 * i, 2 * j)].clone());
    let h = Matrix::from_fn(n, n, ctx, |i, j| sigma[(2 * i + 1, 2 * j + 1)].clone());
    (g, h)
}

/// Symplectic spectrum, descending, one entry per mode.
///
/// The primary route diagonalizes -(K^2) with K = sqrt(sigma) Omega
/// sqrt(sigma), whose spectrum is the doubled {nu^2}. On D-type inputs the
/// independent route spec sqrt(G H) (sigma-blocks) is run as well and the two
/// must agree to 10^-(digits/2); disagreement signals a precision fault.
pub fn symplectic_spectrum(sigma: &Matrix, ctx: &PrecisionContext) -> Result<Vec<Float>> {
    let nus = spectrum_from_omega(sigma, ctx)?;
    if is_d_type(sigma, ctx) {
        let alt = spectrum_from_blocks(sigma, ctx)?;
        let mut bound = ctx.rank_tol();
        let scale = {
            let mut s = nus[0].clone();
            if s < 1u32 {
                s = ctx.one();
            }
            s
        };
        bound *= &scale;
        for (i, (a, b)) in nus.iter().zip(&alt).enumerate() {
            let mut d = a.clone();
            d -= b;
            d.abs_mut();
            if d > bound {
                return Err(Error::RouteDisagreement {
                    delta: format!("{:e}", d.to_f64()),
                    index: i,
                });
            }
        }
    }
    Ok(nus)
}

/// Primary route only; used inside iterative flows where the cross-check
/// would double the cost without adding information.
pub(crate) fn spectrum_from_omega(sigma: &Matrix, ctx: &PrecisionContext) -> Result<Vec<Float>> {
    let n_modes = sigma.rows() / 2;
    let t = mpnum::sqrt_psd(sigma, ctx)?;
    let k = t.mul(&omega(n_modes, ctx)).mul(&t);
    let m = k.mul(&k).neg().symmetrize();
    let (evals, _) = mpnum::sym_eig(&m, ctx)?;
    pair_up(&evals, n_modes, ctx)
}

fn spectrum_from_blocks(sigma: &Matrix, ctx: &PrecisionContext) -> Result<Vec<Float>> {
    let (g, h) = quadrature_blocks(sigma, ctx);
    let gh = mpnum::sqrt_psd(&g, ctx)?;
    let w = gh.mul(&h).mul(&gh).symmetrize();
    let (evals, _) = mpnum::sym_eig(&w, ctx)?;
    Ok(evals
        .into_iter()
        .map(|mut e| {
            if e.is_sign_negative() {
                e = ctx.zero();
            }
            e.sqrt_mut();
            e
        })
        .collect())
}

/// Collapse the doubled spectrum {nu^2, nu^2, ...} to one nu per mode,
/// checking that the pairs really are degenerate.
fn pair_up(evals: &[Float], n_modes: usize, ctx: &PrecisionContext) -> Result<Vec<Float>> {
    let scale = {
        let mut s = evals[0].clone();
        s.abs_mut();
        if s < 1u32 {
            s = ctx.one();
        }
        s
    };
    let mut bound = ctx.rank_tol();
    bound *= &scale;
    let mut out = Vec::with_capacity(n_modes);
    for i in 0..n_modes {
        let a = &evals[2 * i];
        let b = &evals[2 * i + 1];
        let mut d = a.clone();
        d -= b;
        d.abs_mut();
        if d > bound {
            return Err(Error::RouteDisagreement {
                delta: format!("{:e}", d.to_f64()),
                index: i,
            });
        }
        let mut nu = a.clone();
        nu += b;
        nu /= 2u32;
        if nu.is_sign_negative() {
            nu = ctx.zero();
        }
        nu.sqrt_mut();
        out.push(nu);
    }
    Ok(out)
}

/// Physicality test sigma - i Omega >= 0, decided through the symplectic
/// spectrum: true iff min nu >= 1 - 10^-psd_tol_exponent. The margin is
/// min nu - 1 when the spectrum exists; for inputs that are not even PSD the
/// margin falls back to (min eigenvalue - 1), which is always well below any
/// tolerance.
pub fn check_bonafide(sigma: &Matrix, ctx: &PrecisionContext) -> Result<(bool, Float)> {
    if !sigma.is_square() || sigma.rows() % 2 != 0 {
        return Err(Error::DimensionMismatch("CM must be 2n x 2n".into()));
    }
    let (psd_ok, min_eig) = mpnum::is_psd(sigma, ctx)?;
    if !psd_ok {
        let mut margin = min_eig;
        margin -= 1u32;
        return Ok((false, margin));
    }
    let nus = spectrum_from_omega(sigma, ctx)?;
    let mut margin = nus.last().expect("nonempty").clone();
    margin -= 1u32;
    let tol = -ctx.psd_tol();
    Ok((margin >= tol, margin))
}

/// Williamson normal form sigma = S_W (diag nu_j tensor I_2) S_W^T.
#[derive(Debug, Clone)]
pub struct WilliamsonDecomposition {
    pub s_w: SymplecticTransform,
    /// Symplectic eigenvalues, descending.
    pub nu: Vec<Float>,
}

/// Compute the Williamson decomposition of a positive definite CM by the
/// spectral method on sqrt(sigma) Omega sqrt(sigma): the invariant 2-planes
/// of that antisymmetric matrix give an orthogonal Q with Q^T K Q in
/// canonical form, and S_W = sqrt(sigma) Q D^-1/2.
pub fn williamson(sigma: &Matrix, ctx: &PrecisionContext) -> Result<WilliamsonDecomposition> {
    let n_modes = sigma.rows() / 2;
    let (psd_ok, min_eig) = mpnum::is_psd(sigma, ctx)?;
    let mut near_singular = ctx.rank_tol();
    near_singular *= &sigma.max_abs();
    if !psd_ok || min_eig <= near_singular {
        return Err(Error::NearSingular {
            diagnostic: format!("min eigenvalue {:e} of sigma", min_eig.to_f64()),
        });
    }
    let t = mpnum::sqrt_psd(sigma, ctx)?;
    let k = t.mul(&omega(n_modes, ctx)).mul(&t);
    let m = k.mul(&k).neg().symmetrize();
    let (evals, vecs) = mpnum::sym_eig(&m, ctx)?;
    let prec = ctx.prec_bits();

    // Deterministic pairing: walk eigencolumns in descending-eigenvalue
    // order, skip columns already inside a chosen invariant plane, and close
    // each new plane with w2 = -K w1 / nu.
    let dim = 2 * n_modes;
    let mut basis: Vec<Vec<Float>> = Vec::with_capacity(dim);
    let mut pairs: Vec<(Float, usize)> = Vec::with_capacity(n_modes); // (nu, index into basis of w1)
    let mut tscratch = Float::new(prec);
    let skip_tol = ctx.real(1e-6);
    for j in 0..dim {
        if pairs.len() == n_modes {
            break;
        }
        let mut w: Vec<Float> = (0..dim).map(|i| vecs[(i, j)].clone()).collect();
        for b in &basis {
            let mut dot = Float::new(prec);
            for i in 0..dim {
                tscratch.assign(&b[i] * &w[i]);
                dot += &tscratch;
            }
            for i in 0..dim {
                tscratch.assign(&b[i] * &dot);
                w[i] -= &tscratch;
            }
        }
        let mut norm = Float::new(prec);
        for x in &w {
            tscratch.assign(x * x);
            norm += &tscratch;
        }
        norm.sqrt_mut();
        if norm < skip_tol {
            continue;
        }
        for x in w.iter_mut() {
            *x /= &norm;
        }
        let mut nu = evals[j].clone();
        if nu.is_sign_negative() {
            return Err(Error::NearSingular {
                diagnostic: format!("negative squared symplectic eigenvalue {:e}", nu.to_f64()),
            });
        }
        nu.sqrt_mut();
        // w2 = -K w1 / nu
        let kw = k.mul_vec(&w);
        let mut w2: Vec<Float> = kw.into_iter().map(|x| -x).collect();
        for x in w2.iter_mut() {
            *x /= &nu;
        }
        // hygiene re-orthonormalization of w2
        for b in basis.iter().chain(std::iter::once(&w)) {
            let mut dot = Float::new(prec);
            for i in 0..dim {
                tscratch.assign(&b[i] * &w2[i]);
                dot += &tscratch;
            }
            for i in 0..dim {
                tscratch.assign(&b[i] * &dot);
                w2[i] -= &tscratch;
            }
        }
        let mut n2 = Float::new(prec);
        for x in &w2 {
            tscratch.assign(x * x);
            n2 += &tscratch;
        }
        n2.sqrt_mut();
        for x in w2.iter_mut() {
            *x /= &n2;
        }
        basis.push(w);
        basis.push(w2);
        pairs.push((nu, basis.len() - 2));
    }
    if pairs.len() != n_modes {
        return Err(Error::NearSingular {
            diagnostic: "could not pair all invariant planes".into(),
        });
    }
    let mut q = Matrix::zeros(dim, dim, ctx);
    let mut d_inv_sqrt = Matrix::zeros(dim, dim, ctx);
    let mut nu_list = Vec::with_capacity(n_modes);
    for (p, (nu, b0)) in pairs.iter().enumerate() {
        for i in 0..dim {
            q[(i, 2 * p)] = basis[*b0][i].clone();
            q[(i, 2 * p + 1)] = basis[*b0 + 1][i].clone();
        }
        let mut inv_root = nu.clone();
        inv_root.sqrt_mut();
        inv_root.recip_mut();
        d_inv_sqrt[(2 * p, 2 * p)] = inv_root.clone();
        d_inv_sqrt[(2 * p + 1, 2 * p + 1)] = inv_root;
        nu_list.push(nu.clone());
    }
    let s_w = t.mul(&q).mul(&d_inv_sqrt);
    let s_w = SymplecticTransform::certify(s_w, ctx)?;
    Ok(WilliamsonDecomposition { s_w, nu: nu_list })
}

/// Split a bonafide CM into a pure CM and PSD displacement noise:
/// sigma = S_W S_W^T + S_W (Sigma - I) S_W^T.
pub fn purify_split(sigma: &Matrix, ctx: &PrecisionContext) -> Result<(Matrix, Matrix)> {
    let w = williamson(sigma, ctx)?;
    let n_modes = w.nu.len();
    let pure = w.s_w.mat.mul_transpose(&w.s_w.mat).symmetrize();
    let mut excess = Matrix::zeros(2 * n_modes, 2 * n_modes, ctx);
    for (i, nu) in w.nu.iter().enumerate() {
        let mut e = nu.clone();
        e -= 1u32;
        if e.is_sign_negative() {
            // nu may dip below 1 by tolerance; noise stays exactly PSD
            e = ctx.zero();
        }
        excess[(2 * i, 2 * i)] = e.clone();
        excess[(2 * i + 1, 2 * i + 1)] = e;
    }
    let noise = w.s_w.mat.congruence(&excess).symmetrize();
    Ok((pure, noise))
}

/// sigma^Gamma where the flipped side is a set of modes; convenience used by
/// negativity and the flows.
pub fn pt_on_modes(sigma: &Matrix, modes: &[usize]) -> Matrix {
    partial_transpose(sigma, modes)
}

/// Reorder modes of a CM: new mode i is old mode `order[i]`.
pub fn reorder_modes(sigma: &Matrix, order: &[usize]) -> Matrix {
    let idx = coord_indices(order);
    sigma.select(&idx, &idx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::with_digits(64).unwrap()
    }

    #[test]
    fn omega_squares_to_minus_identity() {
        let c = ctx();
        let o = omega(3, &c);
        let id = Matrix::identity(6, &c);
        assert!(o.mul(&o).add(&id).max_abs() < 1e-60);
        assert!(o.add(&o.transpose()).max_abs() < 1e-60);
    }

    #[test]
    fn pt_is_involution_and_keeps_symmetry() {
        let c = ctx();
        let mut sigma = Matrix::identity(8, &c);
        sigma[(0, 2)] = c.real(0.3);
        sigma[(2, 0)] = c.real(0.3);
        sigma[(1, 7)] = c.real(-0.2);
        sigma[(7, 1)] = c.real(-0.2);
        let pt = partial_transpose(&sigma, &[2, 3]);
        assert!(pt.asymmetry() < 1e-60);
        let back = partial_transpose(&pt, &[2, 3]);
        assert!(back.sub(&sigma).max_abs() < 1e-60);
        // a flipped cross entry changes sign
        assert!((pt[(1, 7)].clone() + sigma[(1, 7)].clone()).abs() < 1e-60);
    }

    #[test]
    fn spectrum_identity_and_thermal() {
        let c = ctx();
        let nus = symplectic_spectrum(&Matrix::identity(6, &c), &c).unwrap();
        for nu in &nus {
            assert!((nu.clone() - 1u32).abs() < 1e-55);
        }
        let mut th = Matrix::identity(2, &c);
        th[(0, 0)] = c.real(3.0);
        th[(1, 1)] = c.real(3.0);
        let nus = symplectic_spectrum(&th, &c).unwrap();
        assert!((nus[0].clone() - 3u32).abs() < 1e-55);
    }

    #[test]
    fn bonafide_examples() {
        let c = ctx();
        let (ok, margin) = check_bonafide(&Matrix::identity(4, &c), &c).unwrap();
        assert!(ok);
        assert!(margin.abs() < 1e-50);
        // single mode below the uncertainty bound
        let mut bad = Matrix::identity(2, &c);
        bad[(0, 0)] = c.real(0.5);
        bad[(1, 1)] = c.real(0.5);
        let (ok, margin) = check_bonafide(&bad, &c).unwrap();
        assert!(!ok);
        assert!((margin + c.real(0.5)).abs() < 1e-50);
    }

    #[test]
    fn bonafide_agrees_with_psd_embedding_route() {
        // second implementation: sigma - i Omega >= 0 via the real embedding
        // [[sigma, Omega], [-Omega, sigma]]
        let c = ctx();
        let cases: Vec<Matrix> = vec![
            Matrix::identity(4, &c),
            {
                let mut m = Matrix::identity(4, &c);
                m[(0, 0)] = c.real(0.8);
                m[(1, 1)] = c.real(0.8);
                m
            },
            {
                let mut m = Matrix::identity(4, &c);
                m[(0, 0)] = c.real(2.0);
                m[(0, 2)] = c.real(0.9);
                m[(2, 0)] = c.real(0.9);
                m[(2, 2)] = c.real(2.0);
                m
            },
        ];
        for sigma in cases {
            let n_modes = sigma.rows() / 2;
            let (nu_ok, _) = check_bonafide(&sigma, &c).unwrap();
            let om = omega(n_modes, &c);
            let dim = sigma.rows();
            let mut emb = Matrix::zeros(2 * dim, 2 * dim, &c);
            emb.set_block(0, 0, &sigma);
            emb.set_block(dim, dim, &sigma);
            emb.set_block(0, dim, &om);
            emb.set_block(dim, 0, &om.transpose());
            let (psd_ok, _) = mpnum::is_psd(&emb, &c).unwrap();
            assert_eq!(nu_ok, psd_ok);
        }
    }

    #[test]
    fn williamson_identity_and_squeezed() {
        let c = ctx();
        let w = williamson(&Matrix::identity(4, &c), &c).unwrap();
        for nu in &w.nu {
            assert!((nu.clone() - 1u32).abs() < 1e-50);
        }
        // orthogonal-symplectic: S S^T = I
        let g = w.s_w.mat.mul_transpose(&w.s_w.mat).sub(&Matrix::identity(4, &c));
        assert!(g.max_abs() < 1e-50);

        // squeezed thermal single mode: diag(a, 1/a) * nu0
        let mut sq = Matrix::zeros(2, 2, &c);
        let nu0 = c.real(1.7);
        sq[(0, 0)] = c.real(2.0) * nu0.clone();
        sq[(1, 1)] = c.real(0.5) * nu0.clone();
        let w = williamson(&sq, &c).unwrap();
        assert!((w.nu[0].clone() - &nu0).abs() < 1e-50);
        // reconstruction
        let mut d = Matrix::zeros(2, 2, &c);
        d[(0, 0)] = w.nu[0].clone();
        d[(1, 1)] = w.nu[0].clone();
        let resid = w.s_w.mat.congruence(&d).sub(&sq).max_abs();
        assert!(resid < 1e-50);
    }

    #[test]
    fn purify_split_examples() {
        let c = ctx();
        // pure input: (sigma, 0)
        let mut pure_in = Matrix::zeros(2, 2, &c);
        pure_in[(0, 0)] = c.real(2.0);
        pure_in[(1, 1)] = c.real(0.5);
        let (p, y) = purify_split(&pure_in, &c).unwrap();
        assert!(p.sub(&pure_in).max_abs() < 1e-50);
        assert!(y.max_abs() < 1e-50);
        // thermal nu0 I: (I, (nu0-1) I)
        let mut th = Matrix::identity(2, &c);
        th[(0, 0)] = c.real(2.5);
        th[(1, 1)] = c.real(2.5);
        let (p, y) = purify_split(&th, &c).unwrap();
        assert!(p.sub(&Matrix::identity(2, &c)).max_abs() < 1e-45);
        assert!((y[(0, 0)].clone() - c.real(1.5)).abs() < 1e-45);
        // recomposition
        assert!(p.add(&y).sub(&th).max_abs() < 1e-45);
    }

    #[test]
    fn spectrum_invariant_under_certified_symplectic() {
        let c = ctx();
        // random-ish symplectic: product of a rotation and a squeeze per mode
        let mut s = Matrix::zeros(4, 4, &c);
        let angle = c.real(0.7);
        let mut cs = angle.clone();
        cs.cos_mut();
        let mut sn = angle.clone();
        sn.sin_mut();
        s[(0, 0)] = cs.clone();
        s[(0, 1)] = sn.clone();
        s[(1, 0)] = -sn.clone();
        s[(1, 1)] = cs.clone();
        s[(2, 2)] = c.real(1.3);
        s[(3, 3)] = c.real(1.0) / c.real(1.3);
        let s = SymplecticTransform::certify(s, &c).unwrap();
        let mut sigma = Matrix::identity(4, &c);
        sigma[(0, 0)] = c.real(2.0);
        sigma[(1, 1)] = c.real(2.0);
        sigma[(2, 2)] = c.real(1.5);
        sigma[(3, 3)] = c.real(1.5);
        let moved = s.mat.congruence(&sigma);
        let a = spectrum_from_omega(&sigma, &c).unwrap();
        let b = spectrum_from_omega(&moved, &c).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let mut d = x.clone();
            d -= y;
            assert!(d.abs() < 1e-45);
        }
    }

    #[test]
    fn purity_identity_det_oracle() {
        // Tr rho^2 = 1 / sqrt(det sigma) must equal prod 1/nu_j.
        // det via LU is the independent oracle for the spectral route.
        let c = ctx();
        let mut sigma = Matrix::identity(4, &c);
        sigma[(0, 0)] = c.real(2.0);
        sigma[(1, 1)] = c.real(1.25);
        sigma[(0, 2)] = c.real(0.4);
        sigma[(2, 0)] = c.real(0.4);
        sigma[(2, 2)] = c.real(1.8);
        sigma[(3, 3)] = c.real(1.6);
        let nus = spectrum_from_omega(&sigma, &c).unwrap();
        let mut prod = c.one();
        for nu in &nus {
            prod *= nu;
        }
        let mut det = sigma.det();
        det.sqrt_mut();
        let diff = prod - det;
        assert!(diff.abs() < 1e-45);
    }
}
