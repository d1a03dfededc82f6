//! Proximal machinery for the patch subproblems: the exponential rank
//! surrogate, weighted singular value thresholding in the spectral Fourier
//! domain, elementwise soft thresholding and the Gaussian-residual update.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::{fft3, ifft3, svd_matrix, svd_slices, CTensor3, Tensor3};

/// The penalty `phi(x) = 1 - exp(-gamma |x|)` applied to singular values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPenalty {
    gamma: f64,
}

impl GammaPenalty {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be > 0, got {gamma}")));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        1.0 - (-self.gamma * x.abs()).exp()
    }

    /// Derivative on `x >= 0`.
    #[inline]
    pub fn gradient(&self, x: f64) -> f64 {
        self.gamma * (-self.gamma * x).exp()
    }
}

/// Per-singular-value shrinkage weights, nondecreasing and nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkWeights(Vec<f64>);

impl ShrinkWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::DomainError("shrink weights must be finite and >= 0".into()));
        }
        if weights.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::DomainError("shrink weights must be nondecreasing".into()));
        }
        Ok(Self(weights))
    }

    pub fn constant(value: f64, len: usize) -> Result<Self> {
        Self::new(vec![value; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Nonconvex tensor norm: `(1/p) * sum_q sum_n phi(sigma_n(fft3(t)^(q)))`.
pub fn gamma_norm(t: &Tensor3, pen: GammaPenalty) -> Result<f64> {
    let p = t.dims().2 as f64;
    let svds = svd_slices(&fft3(t))?;
    let total: f64 = svds
        .slices
        .iter()
        .flat_map(|s| s.sigma.iter())
        .map(|&s| pen.value(s))
        .sum();
    Ok(total / p)
}

/// Linearization weights `gamma * exp(-gamma * sigma_n)` at the previous
/// singular values. Sorted input yields nondecreasing weights.
pub fn grad_weights(sigma_prev: &[f64], pen: GammaPenalty) -> Result<ShrinkWeights> {
    if let Some(s) = sigma_prev.iter().find(|s| !(**s >= 0.0)) {
        return Err(Error::DomainError(format!("singular value {s} is negative")));
    }
    if sigma_prev.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::DomainError("singular values must be nonincreasing".into()));
    }
    ShrinkWeights::new(sigma_prev.iter().map(|&s| pen.gradient(s)).collect())
}

/// Weighted singular value thresholding:
/// `U diag(max(sigma_n - scale * w_n, 0)) V^H`. Returns the matrix and its
/// shrunken singular values.
pub fn wsvt(
    slice: &DMatrix<Complex64>,
    weights: &ShrinkWeights,
    threshold_scale: f64,
) -> Result<(DMatrix<Complex64>, Vec<f64>)> {
    wsvt_labeled(slice, weights, threshold_scale, 0)
}

fn wsvt_labeled(
    slice: &DMatrix<Complex64>,
    weights: &ShrinkWeights,
    threshold_scale: f64,
    label: usize,
) -> Result<(DMatrix<Complex64>, Vec<f64>)> {
    let (m, n) = slice.shape();
    if weights.len() != m.min(n) {
        return Err(Error::InvalidParameter(format!(
            "{} weights for a {m}x{n} slice",
            weights.len()
        )));
    }
    if !(threshold_scale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold scale must be > 0, got {threshold_scale}"
        )));
    }
    let svd = svd_matrix(slice, label)?;
    let shrunk: Vec<f64> = svd
        .sigma
        .iter()
        .zip(weights.as_slice())
        .map(|(&s, &w)| (s - threshold_scale * w).max(0.0))
        .collect();
    Ok((svd.reconstruct_with(&shrunk), shrunk))
}

/// Applies [`wsvt`] to every spectral Fourier slice of `target` and
/// transforms back. `weights_for(q)` supplies the weights of slice `q`; the
/// weights of slice `q` and `p - q` must agree, which holds for weights
/// derived from a real tensor's spectrum.
///
/// Only slices `0..=p/2` are decomposed; the rest are their conjugate
/// mirrors, which keeps the inverse transform exactly real.
pub fn weighted_tensor_svt(
    target: &Tensor3,
    threshold_scale: f64,
    mut weights_for: impl FnMut(usize) -> Result<ShrinkWeights>,
) -> Result<(Tensor3, Vec<Vec<f64>>)> {
    let (m, n, p) = target.dims();
    let spectrum = fft3(target);
    let mut out = CTensor3::zeros((m, n, p));
    let mut sigmas = vec![Vec::new(); p];
    for q in 0..=p / 2 {
        let weights = weights_for(q)?;
        let (mat, shrunk) = wsvt_labeled(&spectrum.slice(q), &weights, threshold_scale, q)?;
        let mirror = (p - q) % p;
        if mirror != q {
            out.set_slice(mirror, &mat.map(|z| z.conj()));
            sigmas[mirror] = shrunk.clone();
        }
        out.set_slice(q, &mat);
        sigmas[q] = shrunk;
    }
    // DC (and Nyquist) slices of a real tensor are real; drop rounding noise.
    for q in [0, p / 2] {
        if (p - q) % p == q {
            for z in &mut out.as_mut_slice()[q * m * n..(q + 1) * m * n] {
                z.im = 0.0;
            }
        }
    }
    Ok((ifft3(&out)?, sigmas))
}

/// Patch low-rank update. `target` is the combined prox center of the patch,
/// `sigma_prev[q]` the singular values of the previous iterate's slice `q`.
/// Returns the new patch and its per-slice singular values.
pub fn update_l_patch(
    target: &Tensor3,
    sigma_prev: &[Vec<f64>],
    mu: f64,
    pen: GammaPenalty,
) -> Result<(Tensor3, Vec<Vec<f64>>)> {
    let (m, n, p) = target.dims();
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!("mu must be > 0, got {mu}")));
    }
    if sigma_prev.len() != p || sigma_prev.iter().any(|s| s.len() != m.min(n)) {
        return Err(Error::InvalidParameter(format!(
            "previous singular values do not match a {m}x{n}x{p} patch"
        )));
    }
    weighted_tensor_svt(target, 1.0 / (2.0 * mu), |q| grad_weights(&sigma_prev[q], pen))
}

#[inline]
pub fn soft_scalar(x: f64, delta: f64) -> f64 {
    if x > delta {
        x - delta
    } else if x < -delta {
        x + delta
    } else {
        0.0
    }
}

/// Elementwise soft thresholding.
pub fn soft(t: &Tensor3, delta: f64) -> Tensor3 {
    debug_assert!(delta >= 0.0);
    t.map(|x| soft_scalar(x, delta))
}

/// Closed-form Gaussian-part update `(mu (O - L - S) + Lam_O) / (mu + 2 beta)`.
pub fn update_n_patch(
    observed: &Tensor3,
    low_rank: &Tensor3,
    sparse: &Tensor3,
    lam_o: &Tensor3,
    mu: f64,
    beta: f64,
) -> Tensor3 {
    let denom = mu + 2.0 * beta;
    let mut out = observed - low_rank;
    out.axpy(-1.0, sparse);
    for (v, &l) in out.as_mut_slice().iter_mut().zip(lam_o.as_slice()) {
        *v = (mu * *v + l) / denom;
    }
    out
}
