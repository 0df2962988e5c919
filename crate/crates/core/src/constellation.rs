//! Discrete coherent-state constellations and their truncated Fock-space
//! density operators.
//!
//! Amplitudes follow the shot-noise-unit convention `E[|a|^2] = 2<n>`: a
//! constellation point `alpha` contributes `|alpha|^2` photons, and the
//! modulation variance seen by the security proof is `V = 2<n> + 1`.
//! Correlation quantities `Z` and `W` are evaluated on a dense Fock-basis
//! representation truncated at a dimension chosen so the discarded
//! photon-number tail is below a configurable tolerance.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default bound on the photon-number probability mass lost to truncation.
pub const TAIL_TOL: f64 = 1e-10;

/// Relative eigenvalue cutoff defining the support of a density operator.
const SUPPORT_CUTOFF: f64 = 1e-12;

/// A discrete constellation of coherent states with point probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
    probs: Vec<f64>,
}

impl Constellation {
    /// Build a constellation, enforcing the probability and distinctness
    /// invariants.
    pub fn new(points: Vec<Complex64>, probs: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != probs.len() {
            return Err(Error::InvalidConstellation(format!(
                "{} points vs {} probabilities",
                points.len(),
                probs.len()
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConstellation(format!(
                "probabilities sum to {sum}, expected 1"
            )));
        }
        if probs.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::InvalidConstellation(
                "all probabilities must be > 0".into(),
            ));
        }
        if points.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidConstellation("non-finite amplitude".into()));
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i] == points[j] {
                    return Err(Error::InvalidConstellation(format!(
                        "duplicate point at indices {i} and {j}"
                    )));
                }
            }
        }
        Ok(Self { points, probs })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Rotate every point by a global phase. `Z` and `W` are invariant
    /// under this map.
    pub fn rotated(&self, phase: f64) -> Self {
        let rot = Complex64::from_polar(1.0, phase);
        Self {
            points: self.points.iter().map(|a| a * rot).collect(),
            probs: self.probs.clone(),
        }
    }
}

/// Mean photon number `<n> = sum_k p_k |alpha_k|^2`.
pub fn mean_photon_number(c: &Constellation) -> f64 {
    c.points
        .iter()
        .zip(&c.probs)
        .map(|(a, p)| p * a.norm_sqr())
        .sum()
}

/// Probabilistically shaped square QAM with Maxwell-Boltzmann weights
/// `p_k ~ exp(-nu |alpha_k|^2)`.
///
/// `order` must be the square of an even side length (4, 16, 64, 256, ...).
/// Grid coordinates are the usual odd integers (+-1, +-3, ...) scaled by
/// `scale`. `nu = 0` gives uniform probabilities.
pub fn make_ps_qam(order: usize, nu: f64, scale: f64) -> Result<Constellation> {
    let side = (order as f64).sqrt().round() as usize;
    if side * side != order || side % 2 != 0 || side == 0 {
        return Err(Error::InvalidConstellation(format!(
            "order {order} is not a perfect square of an even side"
        )));
    }
    if !(scale > 0.0) || !nu.is_finite() || nu < 0.0 {
        return Err(Error::InvalidConstellation(format!(
            "need scale > 0 and nu >= 0, got scale={scale}, nu={nu}"
        )));
    }
    let mut points = Vec::with_capacity(order);
    let mut weights = Vec::with_capacity(order);
    for ix in 0..side {
        for iy in 0..side {
            let x = (2.0 * ix as f64 - (side as f64 - 1.0)) * scale;
            let y = (2.0 * iy as f64 - (side as f64 - 1.0)) * scale;
            let a = Complex64::new(x, y);
            points.push(a);
            weights.push((-nu * a.norm_sqr()).exp());
        }
    }
    let total: f64 = weights.iter().sum();
    let probs = weights.iter().map(|w| w / total).collect();
    Constellation::new(points, probs)
}

/// PS-QAM with `nu` solved by bisection so the mean photon number hits
/// `target_n` at the given `scale` (tolerance 1e-9 on `<n>`).
pub fn make_ps_qam_for_mean_n(order: usize, target_n: f64, scale: f64) -> Result<Constellation> {
    let uniform = make_ps_qam(order, 0.0, scale)?;
    let n_max = mean_photon_number(&uniform);
    // nu -> inf concentrates all mass on the four innermost points
    let n_min = 2.0 * scale * scale;
    if !(target_n > n_min && target_n <= n_max) {
        return Err(Error::InvalidConstellation(format!(
            "target <n>={target_n} outside attainable ({n_min:.6}, {n_max:.6}] at scale {scale}"
        )));
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while mean_photon_number(&make_ps_qam(order, hi, scale)?) > target_n {
        hi *= 2.0;
        if hi > 1e9 {
            return Err(Error::InvalidConstellation(
                "Maxwell-Boltzmann rate solve diverged".into(),
            ));
        }
    }
    // <n> is strictly decreasing in nu
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let n_mid = mean_photon_number(&make_ps_qam(order, mid, scale)?);
        if (n_mid - target_n).abs() < 1e-9 {
            break;
        }
        if n_mid > target_n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    make_ps_qam(order, mid, scale)
}

/// Dense operator on the truncated Fock space `|0> ... |dim-1>`.
#[derive(Debug, Clone)]
pub struct FockOperator {
    dim: usize,
    entries: DMatrix<Complex64>,
}

impl FockOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.diagonal().sum()
    }
}

/// Coherent-state coefficients `<m|alpha> = e^{-|a|^2/2} a^m / sqrt(m!)`,
/// built iteratively to avoid factorial overflow.
pub fn coherent_vector(alpha: Complex64, dim: usize) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(dim);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for m in 0..dim {
        if m > 0 {
            c *= alpha / (m as f64).sqrt();
        }
        v.push(c);
    }
    v
}

/// Matrix of the annihilation operator: `a |m> = sqrt(m) |m-1>`.
pub fn annihilation(dim: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |r, c| {
        if c == r + 1 {
            Complex64::new((c as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Poisson upper-tail mass `P(X >= k)` for intensity `lambda`.
fn poisson_tail(lambda: f64, k: usize) -> f64 {
    if lambda <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    // term at j = k, then ratio-recurse upward until negligible
    let mut log_term = -lambda + k as f64 * lambda.ln();
    for j in 1..=k {
        log_term -= (j as f64).ln();
    }
    let mut term = log_term.exp();
    let mut sum = 0.0;
    let mut j = k;
    while term > sum * 1e-18 + 1e-300 {
        sum += term;
        j += 1;
        term *= lambda / j as f64;
        if j > k + 10_000 {
            break;
        }
    }
    sum.min(1.0)
}

/// Smallest Fock dimension at which the probability-weighted Poisson tail
/// beyond the truncation is below `tol`.
pub fn fock_cutoff(c: &Constellation, tol: f64) -> usize {
    let mut dim = 4;
    loop {
        let tail: f64 = c
            .points
            .iter()
            .zip(&c.probs)
            .map(|(a, p)| p * poisson_tail(a.norm_sqr(), dim))
            .sum();
        if tail < tol {
            return dim;
        }
        dim += 4;
    }
}

/// Density operator `rho = sum_k p_k |alpha_k><alpha_k|` truncated at `n_cut`.
///
/// Fails if the truncated trace deficit exceeds [`TAIL_TOL`].
pub fn density_operator(c: &Constellation, n_cut: usize) -> Result<FockOperator> {
    if n_cut == 0 {
        return Err(Error::Truncation("n_cut must be positive".into()));
    }
    let mut rho = DMatrix::<Complex64>::zeros(n_cut, n_cut);
    for (a, p) in c.points.iter().zip(&c.probs) {
        let v = coherent_vector(*a, n_cut);
        for r in 0..n_cut {
            for col in 0..n_cut {
                rho[(r, col)] += *p * v[r] * v[col].conj();
            }
        }
    }
    let trace = rho.diagonal().sum().re;
    if 1.0 - trace > TAIL_TOL {
        return Err(Error::Truncation(format!(
            "trace deficit {:.3e} exceeds {:.0e} at n_cut={n_cut}",
            1.0 - trace,
            TAIL_TOL
        )));
    }
    Ok(FockOperator {
        dim: n_cut,
        entries: rho,
    })
}

/// Hermitian eigendecomposition helper: returns (eigenvalues, eigenvectors).
fn eigh(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let se = m.clone().symmetric_eigen();
    (se.eigenvalues.iter().cloned().collect(), se.eigenvectors)
}

/// Square root and pseudo-inverse square root of a density operator on its
/// numerical support (eigenvalues above `SUPPORT_CUTOFF * lambda_max`).
fn sqrt_and_pinv_sqrt(
    rho: &FockOperator,
) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let (vals, vecs) = eigh(&rho.entries);
    let lam_max = vals.iter().cloned().fold(f64::MIN, f64::max);
    if !(lam_max > 0.0) {
        return Err(Error::IllConditioned("density operator has no support".into()));
    }
    let cutoff = SUPPORT_CUTOFF * lam_max;
    let dim = rho.dim;
    let mut sq = DMatrix::zeros(dim, dim);
    let mut isq = DMatrix::zeros(dim, dim);
    let mut kept = 0;
    for (k, &lam) in vals.iter().enumerate() {
        if lam > cutoff {
            kept += 1;
            let col = vecs.column(k);
            let s = lam.sqrt();
            for r in 0..dim {
                for c2 in 0..dim {
                    let outer = col[r] * col[c2].conj();
                    sq[(r, c2)] += outer * s;
                    isq[(r, c2)] += outer / s;
                }
            }
        }
    }
    if kept == 0 {
        return Err(Error::IllConditioned(
            "no eigenvalue above the support cutoff".into(),
        ));
    }
    Ok((sq, isq))
}

/// Ensemble quantities `(2 tr(rho^{1/2} a rho^{1/2} a^dag), W)` for a
/// constellation at truncation `n_cut`.
///
/// `W = sum_k p_k (<a_k| A^dag A |a_k> - |<a_k| A |a_k>|^2)` with
/// `A = rho^{1/2} a rho^{-1/2}` taken on the support of `rho`.
pub fn correlation_terms(c: &Constellation, n_cut: usize) -> Result<(f64, f64)> {
    let rho = density_operator(c, n_cut)?;
    let (sq, isq) = sqrt_and_pinv_sqrt(&rho)?;
    let a = annihilation(n_cut);
    let z0 = 2.0 * (&sq * &a * &sq * a.adjoint()).diagonal().sum().re;
    let a_rho = &sq * &a * &isq;
    let mut w = 0.0;
    for (alpha, p) in c.points.iter().zip(&c.probs) {
        let v = DMatrix::from_column_slice(n_cut, 1, &coherent_vector(*alpha, n_cut));
        let av = &a_rho * &v;
        let second: f64 = av.iter().map(|x| x.norm_sqr()).sum();
        let first: Complex64 = v
            .iter()
            .zip(av.iter())
            .map(|(vi, ai)| vi.conj() * ai)
            .sum();
        w += p * (second - first.norm_sqr());
    }
    Ok((z0, w.max(0.0)))
}

/// Correlation strength `W` entering the excess-noise penalty of `Z`.
pub fn compute_w(c: &Constellation, n_cut: usize) -> Result<f64> {
    Ok(correlation_terms(c, n_cut)?.1)
}

/// Transmitter-receiver correlation
/// `Z = 2 tr(rho^{1/2} a rho^{1/2} a^dag) - sqrt(2 eps W)`.
pub fn compute_z(c: &Constellation, n_cut: usize, eps: f64) -> Result<f64> {
    if eps < 0.0 {
        return Err(Error::InvalidConstellation(format!(
            "excess noise must be >= 0, got {eps}"
        )));
    }
    let (z0, w) = correlation_terms(c, n_cut)?;
    Ok(z0 - (2.0 * eps * w).sqrt())
}

/// Gaussian-modulation ceiling `2 sqrt(<n>^2 + <n>)` that no discrete
/// constellation exceeds at zero excess noise.
pub fn gaussian_z_limit(n_mean: f64) -> f64 {
    2.0 * (n_mean * n_mean + n_mean).sqrt()
}
