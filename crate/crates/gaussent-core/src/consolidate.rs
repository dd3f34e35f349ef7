//! Local symplectic transformation concentrating all negativity between two
//! regions into (1x1)-mode core pairs.
//!
//! The transformation is seeded by the PT symplectic eigensystem -- either
//! the left/right eigenvectors of the correlator product (default) or the
//! eigenvectors of i Omega sigma^Gamma (cross-check route) -- cut to one
//! region, then made symplectic by a symplectic Gram-Schmidt pass. Because
//! the seeds act separately on the phi and pi quadratures, the resulting
//! local transform commutes with partial transposition, which is what lets
//! PT-basis information define a physical operation.

use crate::cm::{CovarianceMatrix, ModeInfo, ModeLayout, Region};
use crate::error::{Error, Result};
use crate::mpnum::{self, Matrix, PrecisionContext};
use crate::negativity::{self, PTSpectrum};
use crate::symplectic::{self, SymplecticTransform};
use rug::{Assign, Float};

/// Which eigenbasis seeds the local transformation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedRoute {
    /// Left/right eigenvectors of G H^Gamma (default).
    Gh,
    /// Eigenvectors of i Omega sigma^Gamma, split into real and imaginary
    /// quadrature parts.
    IOmega,
}

/// Region-cut seed vectors, one (x, p) pair per kept eigenvalue, embedded in
/// the region's interleaved coordinates (x on phi, p on pi).
#[derive(Debug, Clone)]
pub struct SeedBasis {
    pub vx: Vec<Vec<Float>>,
    pub vp: Vec<Vec<Float>>,
    /// PT symplectic eigenvalues, ascending; the kept half.
    pub lambda: Vec<Float>,
    /// Residuals of the normalization conditions on the full (un-cut)
    /// vectors: v_x^T G v_x = lambda, v_p^T H^Gamma v_p = lambda,
    /// v_x . v_p^T = I.
    pub certificate: Float,
}

/// Where the core pairs and halo modes live after consolidation.
#[derive(Debug, Clone)]
pub struct CoreHaloLayout {
    pub d: usize,
    pub n_c: usize,
    /// Global (A-mode, B-mode) indices of pair j; pair j couples mode j with
    /// mode 2d-1-j (0-based).
    pub pairs: Vec<(usize, usize)>,
    pub halo_modes: Vec<usize>,
}

impl CoreHaloLayout {
    fn new(d: usize, n_c: usize) -> Self {
        let pairs: Vec<(usize, usize)> = (0..d).map(|j| (j, 2 * d - 1 - j)).collect();
        let halo_modes: Vec<usize> = (n_c..d).chain(d..(2 * d - n_c)).collect();
        Self {
            d,
            n_c,
            pairs,
            halo_modes,
        }
    }

    /// Core modes ordered pair-wise: A cores ascending, then B cores in the
    /// same pair order (descending global index).
    pub fn core_modes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.n_c).collect();
        v.extend((0..self.n_c).map(|j| 2 * self.d - 1 - j));
        v
    }

    pub fn halo_a(&self) -> Vec<usize> {
        (self.n_c..self.d).collect()
    }

    pub fn halo_b(&self) -> Vec<usize> {
        (self.d..(2 * self.d - self.n_c)).collect()
    }
}

/// Everything the consolidation produces.
#[derive(Debug, Clone)]
pub struct Consolidation {
    pub sigma_prime: CovarianceMatrix,
    pub transform: SymplecticTransform,
    pub s_a: Matrix,
    pub s_b: Matrix,
    pub layout: CoreHaloLayout,
    pub spectrum: PTSpectrum,
    /// N(sigma'(j, 2d-1-j)) for every pair j, descending like the spectrum
    /// contributions.
    pub pair_negativities: Vec<Float>,
}

/// True iff all <x_i p_j> entries of the CM vanish to tolerance.
pub fn is_d_type(sigma: &Matrix, ctx: &PrecisionContext) -> bool {
    symplectic::is_d_type(sigma, ctx)
}

/// Seed basis from the left/right eigenvectors of G H^Gamma, normalized per
/// v_x^T G v_x = lambda, v_p^T H^Gamma v_p = lambda, v_x . v_p^T = I, signs
/// fixed by making the first significant element of each v_x nonnegative.
/// Only the half with the lowest PT symplectic eigenvalues is retained.
pub fn seed_basis_gh(cm: &CovarianceMatrix, ctx: &PrecisionContext) -> Result<SeedBasis> {
    require_d_type(&cm.mat, ctx)?;
    let (g, h) = symplectic::quadrature_blocks(&cm.mat, ctx);
    let b_sites = cm.layout.b_modes();
    let hg = flip_sites(&h, &b_sites);
    let n = g.rows();
    let keep = keep_count(cm)?;

    let g_half = mpnum::sqrt_psd(&g, ctx)?;
    let g_half_inv = mpnum::pinv(&g_half, ctx)?;
    let w = g_half.mul(&hg).mul(&g_half).symmetrize();
    let (evals, vecs) = mpnum::sym_eig(&w, ctx)?; // descending lambda^2
    // ascending lambda: reverse, keep the lowest `keep`
    let mut lambda: Vec<Float> = Vec::with_capacity(keep);
    let mut vx_full: Vec<Vec<Float>> = Vec::with_capacity(keep);
    let mut vp_full: Vec<Vec<Float>> = Vec::with_capacity(keep);
    for j in 0..keep {
        let col = n - 1 - j;
        let mut lam = evals[col].clone();
        if lam.is_sign_negative() {
            lam = ctx.zero();
        }
        lam.sqrt_mut();
        let u: Vec<Float> = (0..n).map(|i| vecs[(i, col)].clone()).collect();
        // v_x = sqrt(lam) G^{-1/2} u, v_p = (1/sqrt(lam)) G^{1/2} u
        let mut root = lam.clone();
        root.sqrt_mut();
        let mut vx = g_half_inv.mul_vec(&u);
        for x in vx.iter_mut() {
            *x *= &root;
        }
        let mut vp = g_half.mul_vec(&u);
        for x in vp.iter_mut() {
            *x /= &root;
        }
        if first_significant_negative(&vx, ctx) {
            for x in vx.iter_mut() {
                *x = -x.clone();
            }
            for x in vp.iter_mut() {
                *x = -x.clone();
            }
        }
        lambda.push(lam);
        vx_full.push(vx);
        vp_full.push(vp);
    }
    check_nondegenerate(&evals, keep, ctx)?;
    let certificate = seed_certificate(&vx_full, &vp_full, &lambda, &g, &hg, ctx);
    Ok(pack_seeds(cm, vx_full, vp_full, lambda, certificate, ctx))
}

/// Seed basis from the eigenvectors of i Omega sigma^Gamma with positive
/// eigenvalue, each globally phased so its first element is real and
/// nonnegative and normalized to unit 2-norm; the real part seeds the phi
/// quadrature and the imaginary part the pi quadrature.
pub fn seed_basis_iomega(cm: &CovarianceMatrix, ctx: &PrecisionContext) -> Result<SeedBasis> {
    require_d_type(&cm.mat, ctx)?;
    let n_modes = cm.n_modes();
    let keep = keep_count(cm)?;
    let b_modes = cm.layout.b_modes();
    let sg = symplectic::pt_on_modes(&cm.mat, &b_modes);
    let t = mpnum::sqrt_psd(&sg, ctx)?;
    let t_inv = mpnum::pinv(&t, ctx)?;
    let k = t.mul(&symplectic::omega(n_modes, ctx)).mul(&t);
    let m = k.mul(&k).neg().symmetrize();
    let (evals, vecs) = mpnum::sym_eig(&m, ctx)?; // descending nu^2, doubled
    let prec = ctx.prec_bits();
    let dim = 2 * n_modes;

    // invariant-plane pairing, ascending nu, lowest `keep` planes
    let mut chosen: Vec<Vec<Float>> = Vec::new();
    let mut planes: Vec<(Float, Vec<Float>, Vec<Float>)> = Vec::new();
    let skip_tol = ctx.real(1e-6);
    let mut scratch = Float::new(prec);
    for j in (0..dim).rev() {
        if planes.len() == keep {
            break;
        }
        let mut w: Vec<Float> = (0..dim).map(|i| vecs[(i, j)].clone()).collect();
        for b in &chosen {
            let mut dot = Float::new(prec);
            for i in 0..dim {
                scratch.assign(&b[i] * &w[i]);
                dot += &scratch;
            }
            for i in 0..dim {
                scratch.assign(&b[i] * &dot);
                w[i] -= &scratch;
            }
        }
        let mut norm = Float::new(prec);
        for x in &w {
            scratch.assign(x * x);
            norm += &scratch;
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
            nu = ctx.zero();
        }
        nu.sqrt_mut();
        // w2 = -K w / nu closes the plane; eigenvector of i Omega sigma^G for
        // +nu is T^{-1} (w - i w2)
        let kw = k.mul_vec(&w);
        let mut w2: Vec<Float> = kw.into_iter().map(|x| -x).collect();
        for x in w2.iter_mut() {
            *x /= &nu;
        }
        chosen.push(w.clone());
        chosen.push(w2.clone());
        planes.push((nu, w, w2));
    }
    if planes.len() != keep {
        return Err(Error::DegenerateSpectrum {
            cluster: vec!["could not isolate enough PT invariant planes".into()],
        });
    }

    let mut lambda = Vec::with_capacity(keep);
    let mut vx_full = Vec::with_capacity(keep);
    let mut vp_full = Vec::with_capacity(keep);
    for (nu, w, w2) in planes {
        let re = t_inv.mul_vec(&w);
        let mut im = t_inv.mul_vec(&w2);
        for x in im.iter_mut() {
            *x = -x.clone();
        }
        // global phase: rotate so the first significant component is purely
        // real and positive. For D-type CMs the eigenvector supports split
        // cleanly over quadratures, so the phase reduces to a sign choice.
        let (re, im) = phase_to_first_real(re, im, ctx)?;
        // unit 2-norm over the full complex vector
        let mut nrm = Float::new(prec);
        for x in re.iter().chain(im.iter()) {
            scratch.assign(x * x);
            nrm += &scratch;
        }
        nrm.sqrt_mut();
        let vx: Vec<Float> = re.into_iter().map(|mut x| {
            x /= &nrm;
            x
        }).collect();
        let vp: Vec<Float> = im.into_iter().map(|mut x| {
            x /= &nrm;
            x
        }).collect();
        lambda.push(nu);
        vx_full.push(vx);
        vp_full.push(vp);
    }
    // here the full vectors live in interleaved coordinates already; collapse
    // to site space for uniform packing below
    let d_sites = n_modes;
    let collapse = |v: &Vec<Float>, quad: usize| -> Vec<Float> {
        (0..d_sites).map(|s| v[2 * s + quad].clone()).collect()
    };
    let vx_site: Vec<Vec<Float>> = vx_full.iter().map(|v| collapse(v, 0)).collect();
    let vp_site: Vec<Vec<Float>> = vp_full.iter().map(|v| collapse(v, 1)).collect();
    // certificate: quadrature leakage must vanish for D-type inputs
    let mut leak = ctx.zero();
    for (v, quad) in vx_full.iter().map(|v| (v, 1usize)).chain(vp_full.iter().map(|v| (v, 0usize))) {
        for s in 0..d_sites {
            let mut a = v[2 * s + quad].clone();
            a.abs_mut();
            if a > leak {
                leak = a;
            }
        }
    }
    Ok(pack_seeds(cm, vx_site, vp_site, lambda, leak, ctx))
}

fn require_d_type(sigma: &Matrix, ctx: &PrecisionContext) -> Result<()> {
    if !is_d_type(sigma, ctx) {
        return Err(Error::InvalidArgument(
            "consolidation requires a D-type CM (vanishing <x p> entries)".into(),
        ));
    }
    Ok(())
}

fn keep_count(cm: &CovarianceMatrix) -> Result<usize> {
    let na = cm.layout.a_modes().len();
    let nb = cm.layout.b_modes().len();
    if na == 0 || nb == 0 {
        return Err(Error::InvalidArgument("both regions must be nonempty".into()));
    }
    if na != nb {
        return Err(Error::InvalidArgument(
            "consolidation expects equal-size regions".into(),
        ));
    }
    Ok(na)
}

/// F H F with F = diag(+1 on A sites, -1 on the given sites).
fn flip_sites(h: &Matrix, sites: &[usize]) -> Matrix {
    let mut out = h.clone();
    let n = h.rows();
    for &s in sites {
        for j in 0..n {
            let v = out[(s, j)].clone();
            out[(s, j)] = -v;
            let v = out[(j, s)].clone();
            out[(j, s)] = -v;
        }
    }
    out
}

fn first_significant_negative(v: &[Float], ctx: &PrecisionContext) -> bool {
    let mut scale = ctx.zero();
    for x in v {
        let mut a = x.clone();
        a.abs_mut();
        if a > scale {
            scale = a;
        }
    }
    let mut thr = ctx.rank_tol();
    thr *= &scale;
    for x in v {
        let mut a = x.clone();
        a.abs_mut();
        if a > thr {
            return x.is_sign_negative();
        }
    }
    false
}

/// Rotate a complex vector (re, im) by a global phase so its first
/// significant component is real and positive. D-type structure means the
/// phase is +-1 or +-i up to tolerance; anything else is a degenerate input.
fn phase_to_first_real(re: Vec<Float>, im: Vec<Float>, ctx: &PrecisionContext) -> Result<(Vec<Float>, Vec<Float>)> {
    let mut scale = ctx.zero();
    for x in re.iter().chain(im.iter()) {
        let mut a = x.clone();
        a.abs_mut();
        if a > scale {
            scale = a;
        }
    }
    let mut thr = ctx.rank_tol();
    thr *= &scale;
    let mut first = None;
    for i in 0..re.len() {
        let mut ar = re[i].clone();
        ar.abs_mut();
        let mut ai = im[i].clone();
        ai.abs_mut();
        if ar > thr || ai > thr {
            first = Some((i, ar > ai));
            break;
        }
    }
    let Some((i, real_dominant)) = first else {
        return Err(Error::DegenerateSeed { pair: 0 });
    };
    if real_dominant {
        if re[i].is_sign_negative() {
            Ok((re.into_iter().map(|x| -x).collect(), im.into_iter().map(|x| -x).collect()))
        } else {
            Ok((re, im))
        }
    } else {
        // multiply by -+i: (re + i im) * (-i) = im - i re
        if im[i].is_sign_negative() {
            Ok((im.into_iter().map(|x| -x).collect(), re))
        } else {
            Ok((im, re.into_iter().map(|x| -x).collect()))
        }
    }
}

fn check_nondegenerate(evals_desc: &[Float], keep: usize, ctx: &PrecisionContext) -> Result<()> {
    // Degeneracy only matters where it makes the negativity-carrying
    // subspace ambiguous: among kept eigenvalues below one (these are the
    // squared PT symplectic eigenvalues) and across the keep boundary. A
    // degenerate cluster at or above one never carries negativity, so any
    // orthonormal basis of it yields the same consolidated pairs.
    let n = evals_desc.len();
    let mut gap_tol = ctx.rank_tol();
    let mut scale = evals_desc[0].clone();
    scale.abs_mut();
    if scale < 1u32 {
        scale = ctx.one();
    }
    gap_tol *= &scale;
    let mut carries_negativity = ctx.one();
    carries_negativity -= ctx.psd_tol();
    let lo = n - 1 - keep.min(n - 1);
    let mut cluster: Vec<String> = Vec::new();
    for j in (lo..n - 1).rev() {
        if evals_desc[j + 1] >= carries_negativity {
            continue;
        }
        let mut gap = evals_desc[j].clone();
        gap -= &evals_desc[j + 1];
        gap.abs_mut();
        if gap <= gap_tol {
            cluster.push(format!("{:e}", evals_desc[j].to_f64()));
            cluster.push(format!("{:e}", evals_desc[j + 1].to_f64()));
        }
    }
    if cluster.is_empty() {
        Ok(())
    } else {
        cluster.dedup();
        Err(Error::DegenerateSpectrum { cluster })
    }
}

fn seed_certificate(
    vx: &[Vec<Float>],
    vp: &[Vec<Float>],
    lambda: &[Float],
    g: &Matrix,
    hg: &Matrix,
    ctx: &PrecisionContext,
) -> Float {
    let prec = ctx.prec_bits();
    let mut worst = Float::new(prec);
    let mut t = Float::new(prec);
    let mut track = |mut r: Float| {
        r.abs_mut();
        if r > worst {
            worst = r;
        }
    };
    for (j, lam) in lambda.iter().enumerate() {
        let gv = g.mul_vec(&vx[j]);
        let mut q = Float::new(prec);
        for (a, b) in vx[j].iter().zip(&gv) {
            t.assign(a * b);
            q += &t;
        }
        q -= lam;
        track(q);
        let hv = hg.mul_vec(&vp[j]);
        let mut q = Float::new(prec);
        for (a, b) in vp[j].iter().zip(&hv) {
            t.assign(a * b);
            q += &t;
        }
        q -= lam;
        track(q);
        for (k, vpk) in vp.iter().enumerate() {
            let mut dot = Float::new(prec);
            for (a, b) in vx[j].iter().zip(vpk) {
                t.assign(a * b);
                dot += &t;
            }
            if j == k {
                dot -= 1u32;
            }
            track(dot);
        }
    }
    worst
}

/// Cut site-space seed vectors to a region and embed them in the region's
/// interleaved coordinates.
fn pack_seeds(
    cm: &CovarianceMatrix,
    vx_site: Vec<Vec<Float>>,
    vp_site: Vec<Vec<Float>>,
    lambda: Vec<Float>,
    certificate: Float,
    ctx: &PrecisionContext,
) -> SeedBasis {
    let a_sites = cm.layout.a_modes();
    let d = a_sites.len();
    let embed = |v: &Vec<Float>, quad: usize| -> Vec<Float> {
        let mut out = vec![ctx.zero(); 2 * d];
        for (local, &site) in a_sites.iter().enumerate() {
            out[2 * local + quad] = v[site].clone();
        }
        out
    };
    SeedBasis {
        vx: vx_site.iter().map(|v| embed(v, 0)).collect(),
        vp: vp_site.iter().map(|v| embed(v, 1)).collect(),
        lambda,
        certificate,
    }
}

/// Cut the same seeds to region B instead (general D-type route); the mode
/// order is then reversed so pair 1 lands on the last B mode.
fn pack_seeds_b(cm: &CovarianceMatrix, vx_site: &[Vec<Float>], vp_site: &[Vec<Float>], ctx: &PrecisionContext) -> (Vec<Vec<Float>>, Vec<Vec<Float>>) {
    let b_sites = cm.layout.b_modes();
    let d = b_sites.len();
    let embed = |v: &[Float], quad: usize| -> Vec<Float> {
        let mut out = vec![ctx.zero(); 2 * d];
        for (local, &site) in b_sites.iter().enumerate() {
            out[2 * local + quad] = v[site].clone();
        }
        out
    };
    (
        vx_site.iter().map(|v| embed(v, 0)).collect(),
        vp_site.iter().map(|v| embed(v, 1)).collect(),
    )
}

/// Symplectic Gram-Schmidt: make the seed pairs symplectically orthonormal
/// and stack them row-wise into a certified symplectic transform. The
/// normalization is split symmetrically between the x and p vectors.
pub fn symplectic_gram_schmidt(seed: &SeedBasis, ctx: &PrecisionContext) -> Result<SymplecticTransform> {
    let s = gram_schmidt_rows(&seed.vx, &seed.vp, ctx)?;
    SymplecticTransform::certify(s, ctx)
}

fn gram_schmidt_rows(vx: &[Vec<Float>], vp: &[Vec<Float>], ctx: &PrecisionContext) -> Result<Matrix> {
    let d = vx.len();
    let dim = vx[0].len();
    let n_modes = dim / 2;
    let om = symplectic::omega(n_modes, ctx);
    let prec = ctx.prec_bits();
    let mut t = Float::new(prec);
    let sdot = |u: &[Float], v: &[Float], om: &Matrix| -> Float {
        // u Omega v^T
        let ov = om.mul_vec(v);
        let mut acc = Float::new(prec);
        let mut tt = Float::new(prec);
        for (a, b) in u.iter().zip(&ov) {
            tt.assign(a * b);
            acc += &tt;
        }
        acc
    };
    let mut sx: Vec<Vec<Float>> = Vec::with_capacity(d);
    let mut sp: Vec<Vec<Float>> = Vec::with_capacity(d);
    for k in 0..d {
        let mut wx = vx[k].clone();
        let mut wp = vp[k].clone();
        for j in 0..sx.len() {
            // v' = v - <v_xj, v> v_pj + <v_pj, v> v_xj, applied with the
            // running residual (modified Gram-Schmidt)
            for target in [&mut wx, &mut wp] {
                let cx = sdot(&sx[j], target, &om);
                let cp = sdot(&sp[j], target, &om);
                for i in 0..dim {
                    t.assign(&cx * &sp[j][i]);
                    target[i] -= &t;
                    t.assign(&cp * &sx[j][i]);
                    target[i] += &t;
                }
            }
        }
        let a = sdot(&wx, &wp, &om);
        let mut mag = a.clone();
        mag.abs_mut();
        if mag <= ctx.rank_tol() {
            return Err(Error::DegenerateSeed { pair: k });
        }
        let mut root = mag.clone();
        root.sqrt_mut();
        let neg = a.is_sign_negative();
        for x in wx.iter_mut() {
            *x /= &root;
        }
        for x in wp.iter_mut() {
            *x /= &root;
            if neg {
                *x = -x.clone();
            }
        }
        sx.push(wx);
        sp.push(wp);
    }
    let mut s = Matrix::zeros(dim, dim, ctx);
    for j in 0..d {
        for c in 0..dim {
            s[(2 * j, c)] = sx[j][c].clone();
            s[(2 * j + 1, c)] = sp[j][c].clone();
        }
    }
    Ok(s)
}

/// S_B from S_A by site-order reversal: S_B = P S_A P, valid for two
/// equal-size regions of a parity-symmetric configuration. An involution.
pub fn mirror_transform(s_a: &Matrix, ctx: &PrecisionContext) -> Matrix {
    let d = s_a.rows() / 2;
    let mut p = Matrix::zeros(2 * d, 2 * d, ctx);
    for s in 0..d {
        p[(2 * s, 2 * (d - 1 - s))] = ctx.one();
        p[(2 * s + 1, 2 * (d - 1 - s) + 1)] = ctx.one();
    }
    p.mul(s_a).mul(&p)
}

/// Run the full consolidation: seeds, sGS, the mirrored B transform, the
/// transformed CM, and the per-pair negativity check against the PT
/// contributions.
pub fn consolidate(cm: &CovarianceMatrix, route: SeedRoute, ctx: &PrecisionContext) -> Result<Consolidation> {
    let d = keep_count(cm)?;
    let (_, spectrum) = negativity::log_negativity(&cm.mat, &cm.layout.b_modes(), ctx)?;
    let n_c = spectrum.n_minus;

    let seed = match route {
        SeedRoute::Gh => seed_basis_gh(cm, ctx)?,
        SeedRoute::IOmega => seed_basis_iomega(cm, ctx)?,
    };
    let s_a = symplectic_gram_schmidt(&seed, ctx)?.mat;
    let s_b = if parity_symmetric(cm) {
        mirror_transform(&s_a, ctx)
    } else {
        // general D-type configurations: run the same construction on the
        // B-side cuts, then reverse the mode order so pair 1 sits last
        let site_seeds = match route {
            SeedRoute::Gh => seed_basis_gh_site_vectors(cm, ctx)?,
            SeedRoute::IOmega => return Err(Error::InvalidArgument(
                "the iOmega route requires a parity-symmetric configuration".into(),
            )),
        };
        let (bx, bp) = pack_seeds_b(cm, &site_seeds.0, &site_seeds.1, ctx);
        let s_nat = gram_schmidt_rows(&bx, &bp, ctx)?;
        mirror_modes(&s_nat, ctx)
    };
    let transform = SymplecticTransform::certify(s_a.direct_sum(&s_b, ctx), ctx)?;
    let sigma_prime_mat = transform.mat.congruence(&cm.mat).symmetrize();
    let layout = CoreHaloLayout::new(d, n_c);

    // pair negativities must reproduce the PT contributions one-to-one
    let mut pair_negativities = Vec::with_capacity(d);
    let contributions_desc: Vec<Float> = spectrum.contributions.iter().cloned().collect();
    let mut tol = ctx.rank_tol();
    let mut nscale = spectrum.total(ctx);
    if nscale < 1u32 {
        nscale = ctx.one();
    }
    tol *= &nscale;
    for (j, (a_mode, b_mode)) in layout.pairs.iter().enumerate() {
        let idx = [2 * a_mode, 2 * a_mode + 1, 2 * b_mode, 2 * b_mode + 1];
        let pair_cm = sigma_prime_mat.select(&idx, &idx);
        let (n_pair, _) = negativity::log_negativity(&pair_cm, &[1], ctx)?;
        let want = contributions_desc.get(j).cloned().unwrap_or_else(|| ctx.zero());
        let mut diff = n_pair.clone();
        diff -= &want;
        diff.abs_mut();
        if diff > tol {
            return Err(Error::PairNegativityMismatch {
                pair: j,
                detail: format!(
                    "pair N = {:e}, PT contribution = {:e}",
                    n_pair.to_f64(),
                    want.to_f64()
                ),
            });
        }
        pair_negativities.push(n_pair);
    }

    let new_layout = ModeLayout {
        modes: (0..2 * d)
            .map(|i| ModeInfo {
                region: if i < d { Region::A } else { Region::B },
                site: None,
            })
            .collect(),
    };
    Ok(Consolidation {
        sigma_prime: CovarianceMatrix::new(sigma_prime_mat, new_layout)?,
        transform,
        s_a,
        s_b,
        layout,
        spectrum,
        pair_negativities,
    })
}

/// Site-space (un-cut) GH seeds; used for the B-side construction.
fn seed_basis_gh_site_vectors(cm: &CovarianceMatrix, ctx: &PrecisionContext) -> Result<(Vec<Vec<Float>>, Vec<Vec<Float>>)> {
    let (g, h) = symplectic::quadrature_blocks(&cm.mat, ctx);
    let hg = flip_sites(&h, &cm.layout.b_modes());
    let n = g.rows();
    let keep = keep_count(cm)?;
    let g_half = mpnum::sqrt_psd(&g, ctx)?;
    let g_half_inv = mpnum::pinv(&g_half, ctx)?;
    let w = g_half.mul(&hg).mul(&g_half).symmetrize();
    let (evals, vecs) = mpnum::sym_eig(&w, ctx)?;
    let mut vx = Vec::with_capacity(keep);
    let mut vp = Vec::with_capacity(keep);
    for j in 0..keep {
        let col = n - 1 - j;
        let mut lam = evals[col].clone();
        if lam.is_sign_negative() {
            lam = ctx.zero();
        }
        lam.sqrt_mut();
        let u: Vec<Float> = (0..n).map(|i| vecs[(i, col)].clone()).collect();
        let mut root = lam.clone();
        root.sqrt_mut();
        let mut x = g_half_inv.mul_vec(&u);
        for v in x.iter_mut() {
            *v *= &root;
        }
        let mut p = g_half.mul_vec(&u);
        for v in p.iter_mut() {
            *v /= &root;
        }
        if first_significant_negative(&x, ctx) {
            for v in x.iter_mut() {
                *v = -v.clone();
            }
            for v in p.iter_mut() {
                *v = -v.clone();
            }
        }
        vx.push(x);
        vp.push(p);
    }
    Ok((vx, vp))
}

fn parity_symmetric(cm: &CovarianceMatrix) -> bool {
    // two equal contiguous regions built from the lattice are mirror
    // symmetric; transformed CMs keep region sizes but lose site labels
    let a = cm.layout.a_modes();
    let b = cm.layout.b_modes();
    a.len() == b.len() && cm.layout.modes.iter().all(|m| m.site.is_some())
}

/// Reverse the mode order of a stacked transform (whole coordinate pairs).
fn mirror_modes(s: &Matrix, ctx: &PrecisionContext) -> Matrix {
    let d = s.rows() / 2;
    let mut out = Matrix::zeros(2 * d, 2 * d, ctx);
    for j in 0..d {
        for c in 0..s.cols() {
            out[(2 * (d - 1 - j), c)] = s[(2 * j, c)].clone();
            out[(2 * (d - 1 - j) + 1, c)] = s[(2 * j + 1, c)].clone();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_region_cm, RegionSpec};

    fn ctx() -> PrecisionContext {
        PrecisionContext::with_digits(64).unwrap()
    }

    fn vacuum_d2(c: &PrecisionContext) -> CovarianceMatrix {
        let spec = RegionSpec::from_strs(2, 0, "0.003").unwrap();
        build_region_cm(&spec, c).unwrap()
    }

    #[test]
    fn seed_certificate_small() {
        let c = ctx();
        let cm = vacuum_d2(&c);
        let seed = seed_basis_gh(&cm, &c).unwrap();
        assert!(seed.certificate.to_f64() < 1e-30, "certificate {:e}", seed.certificate.to_f64());
        assert_eq!(seed.vx.len(), 2);
        // lambda ascending
        assert!(seed.lambda[0] < seed.lambda[1]);
    }

    #[test]
    fn seed_certificate_d10() {
        // normalization certificate residual on a d=10 vacuum
        let c = ctx();
        let spec = RegionSpec::from_strs(10, 0, "0.05").unwrap();
        let cm = build_region_cm(&spec, &c).unwrap();
        let seed = seed_basis_gh(&cm, &c).unwrap();
        assert!(seed.certificate.to_f64() < 1e-32);
    }

    #[test]
    fn single_mode_per_region() {
        let c = ctx();
        let spec = RegionSpec::from_strs(1, 0, "0.1").unwrap();
        let cm = build_region_cm(&spec, &c).unwrap();
        let seed = seed_basis_gh(&cm, &c).unwrap();
        assert_eq!(seed.vx.len(), 1);
        let cons = consolidate(&cm, SeedRoute::Gh, &c).unwrap();
        assert_eq!(cons.layout.n_c, 1);
    }

    #[test]
    fn sgs_fixed_point() {
        // an already-symplectic seed passes through unchanged
        let c = ctx();
        let d = 2;
        let mut vx = Vec::new();
        let mut vp = Vec::new();
        for j in 0..d {
            let mut x = vec![c.zero(); 2 * d];
            x[2 * j] = c.one();
            let mut p = vec![c.zero(); 2 * d];
            p[2 * j + 1] = c.one();
            vx.push(x);
            vp.push(p);
        }
        let seed = SeedBasis {
            vx: vx.clone(),
            vp: vp.clone(),
            lambda: vec![c.one(), c.one()],
            certificate: c.zero(),
        };
        let s = symplectic_gram_schmidt(&seed, &c).unwrap();
        let resid = s.mat.sub(&Matrix::identity(2 * d, &c)).max_abs();
        assert!(resid < 1e-55);
    }

    #[test]
    fn sgs_random_seed_is_symplectic() {
        // [DERIVED] symplectic-property oracle on a pseudo-random 4-mode seed
        let c = ctx();
        let d = 4;
        let mut state = 99u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let mut vx = Vec::new();
        let mut vp = Vec::new();
        for _ in 0..d {
            let mut x = vec![c.zero(); 2 * d];
            let mut p = vec![c.zero(); 2 * d];
            for s in 0..d {
                x[2 * s] = c.real(rnd());
                p[2 * s + 1] = c.real(rnd());
            }
            vx.push(x);
            vp.push(p);
        }
        let seed = SeedBasis {
            vx,
            vp,
            lambda: (0..d).map(|_| c.one()).collect(),
            certificate: c.zero(),
        };
        let s = symplectic_gram_schmidt(&seed, &c).unwrap();
        // certification already ran; determinant must be +1
        let det = s.mat.det();
        assert!((det - 1u32).abs() < 1e-45);
    }

    #[test]
    fn mirror_is_involution() {
        let c = ctx();
        let cm = vacuum_d2(&c);
        let seed = seed_basis_gh(&cm, &c).unwrap();
        let s_a = symplectic_gram_schmidt(&seed, &c).unwrap().mat;
        let twice = mirror_transform(&mirror_transform(&s_a, &c), &c);
        assert!(twice.sub(&s_a).max_abs() < 1e-55);
        // d = 1: S_B = S_A
        let spec = RegionSpec::from_strs(1, 0, "0.1").unwrap();
        let cm1 = build_region_cm(&spec, &c).unwrap();
        let seed1 = seed_basis_gh(&cm1, &c).unwrap();
        let sa1 = symplectic_gram_schmidt(&seed1, &c).unwrap().mat;
        assert!(mirror_transform(&sa1, &c).sub(&sa1).max_abs() < 1e-55);
    }

    #[test]
    fn commutes_with_pt() {
        // [S, Gamma] = 0: the produced local transform acts separately on
        // the quadratures
        let c = ctx();
        let cm = vacuum_d2(&c);
        let cons = consolidate(&cm, SeedRoute::Gh, &c).unwrap();
        let s = &cons.transform.mat;
        let n_modes = 4;
        let mut gamma = Matrix::identity(2 * n_modes, &c);
        for m in [2usize, 3] {
            gamma[(2 * m + 1, 2 * m + 1)] = -c.one();
        }
        let comm = s.mul(&gamma).sub(&gamma.mul(s)).max_abs();
        assert!(comm < 1e-50, "commutator {:e}", comm.to_f64());
    }

    #[test]
    fn d_type_detection() {
        let c = ctx();
        let cm = vacuum_d2(&c);
        assert!(is_d_type(&cm.mat, &c));
        // rotate one mode to mix x and p
        let mut r = Matrix::identity(8, &c);
        let angle = c.real(0.4);
        let mut cs = angle.clone();
        cs.cos_mut();
        let mut sn = angle.clone();
        sn.sin_mut();
        r[(0, 0)] = cs.clone();
        r[(0, 1)] = sn.clone();
        r[(1, 0)] = -sn;
        r[(1, 1)] = cs;
        let rotated = r.congruence(&cm.mat);
        assert!(!is_d_type(&rotated, &c));
    }

    #[test]
    fn d_type_constructive_oracle() {
        // [DERIVED] D(n) Sigma D(n)^T from a random invertible C is D-type
        let c = ctx();
        let n = 3;
        let mut state = 7u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let mut cmat = Matrix::identity(n, &c);
        for i in 0..n {
            for j in 0..n {
                cmat[(i, j)] = c.real(rnd() + if i == j { 1.5 } else { 0.0 });
            }
        }
        let cinv_t = cmat.inverse(&c).unwrap().transpose();
        let nus = [1.0, 1.7, 2.4];
        let mut sigma = Matrix::zeros(2 * n, 2 * n, &c);
        // interleaved: x block from C, p block from C^-T
        for i in 0..n {
            for j in 0..n {
                let mut accx = c.zero();
                let mut accp = c.zero();
                for k in 0..n {
                    let mut t = cmat[(i, k)].clone();
                    t *= &cmat[(j, k)];
                    t *= c.real(nus[k]);
                    accx += &t;
                    let mut t = cinv_t[(i, k)].clone();
                    t *= &cinv_t[(j, k)];
                    t *= c.real(nus[k]);
                    accp += &t;
                }
                sigma[(2 * i, 2 * j)] = accx;
                sigma[(2 * i + 1, 2 * j + 1)] = accp;
            }
        }
        assert!(is_d_type(&sigma, &c));
        // and it is a valid CM with the prescribed symplectic spectrum
        let (ok, _) = symplectic::check_bonafide(&sigma, &c).unwrap();
        assert!(ok);
    }

    #[test]
    fn consolidation_preserves_negativity() {
        let c = ctx();
        let cm = vacuum_d2(&c);
        let cons = consolidate(&cm, SeedRoute::Gh, &c).unwrap();
        let (n_before, _) = negativity::log_negativity(&cm.mat, &[2, 3], &c).unwrap();
        let (n_after, _) = negativity::log_negativity(&cons.sigma_prime.mat, &[2, 3], &c).unwrap();
        let mut diff = n_before.clone();
        diff -= &n_after;
        assert!(diff.abs() < c.pow10_neg(32));
        assert_eq!(cons.layout.n_c, 1);
        // N(pair 1) = full N, N(pair 2) = 0
        assert!((cons.pair_negativities[0].to_f64() - n_before.to_f64()).abs() < 1e-20);
        assert!(cons.pair_negativities[1].is_zero());
    }

    #[test]
    fn route_equivalence_d2() {
        let c = ctx();
        let cm = vacuum_d2(&c);
        let a = consolidate(&cm, SeedRoute::Gh, &c).unwrap();
        let b = consolidate(&cm, SeedRoute::IOmega, &c).unwrap();
        let diff = a.sigma_prime.mat.sub(&b.sigma_prime.mat).max_abs();
        assert!(diff < 1e-30, "routes disagree by {:e}", diff.to_f64());
        let sdiff = a.s_a.sub(&b.s_a).max_abs();
        assert!(sdiff < 1e-30);
    }

    #[test]
    fn accumulative_core_property_d4() {
        // first k pairs capture the first k negativity contributions
        let c = ctx();
        let spec = RegionSpec::from_strs(4, 0, "0.003").unwrap();
        let cm = build_region_cm(&spec, &c).unwrap();
        let cons = consolidate(&cm, SeedRoute::Gh, &c).unwrap();
        let d = 4;
        for k in 1..=d {
            let mut modes: Vec<usize> = (0..k).collect();
            modes.extend((2 * d - k..2 * d).rev());
            let idx = crate::cm::coord_indices(&modes);
            let red = cons.sigma_prime.mat.select(&idx, &idx);
            let b_local: Vec<usize> = (k..2 * k).collect();
            let (n_red, _) = negativity::log_negativity(&red, &b_local, &c).unwrap();
            let mut want = c.zero();
            for j in 0..k {
                want += &cons.spectrum.contributions[j];
            }
            let mut diff = n_red;
            diff -= &want;
            let diff = diff.abs();
            assert!(diff < 1e-25, "k = {k}: {:e}", diff.to_f64());
        }
    }

    #[test]
    fn pure_product_has_empty_core() {
        let c = ctx();
        // two single-mode regions in a product state
        let mut mat = Matrix::identity(4, &c);
        mat[(0, 0)] = c.real(1.5);
        mat[(1, 1)] = c.real(1.0) / c.real(1.5);
        let layout = crate::cm::ModeLayout::two_regions(1, 0);
        let cm = CovarianceMatrix::new(mat, layout).unwrap();
        let cons = consolidate(&cm, SeedRoute::Gh, &c).unwrap();
        assert_eq!(cons.layout.n_c, 0);
        for n in &cons.pair_negativities {
            assert!(n.is_zero());
        }
    }
}
