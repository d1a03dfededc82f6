//! Weighted spatial-spectral total variation with periodic boundaries: the
//! difference operator `D`, its adjoint, the TV value, the `U` shrinkage and
//! the FFT-diagonalized `X` solve.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::proximal::soft;
use crate::tensor::{real_part_checked, Tensor3};

/// Strengths of the band, column and row differences, in that order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffWeights {
    w: [f64; 3],
}

impl DiffWeights {
    pub fn new(band: f64, col: f64, row: f64) -> Result<Self> {
        let w = [band, col, row];
        if w.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "difference weights must be finite and >= 0, got {w:?}"
            )));
        }
        if w.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidParameter("difference weights are all zero".into()));
        }
        Ok(Self { w })
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.w
    }
}

impl Default for DiffWeights {
    fn default() -> Self {
        Self { w: [1.0, 1.0, 1.0] }
    }
}

/// Three same-sized components: band, column and row differences.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffField {
    pub components: [Tensor3; 3],
}

impl DiffField {
    pub fn zeros(dims: (usize, usize, usize)) -> Self {
        Self {
            components: std::array::from_fn(|_| Tensor3::zeros(dims)),
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.components[0].dims()
    }

    pub fn map(&self, f: impl Fn(&Tensor3) -> Tensor3) -> Self {
        Self {
            components: std::array::from_fn(|k| f(&self.components[k])),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(&Tensor3, &Tensor3) -> Tensor3) -> Self {
        Self {
            components: std::array::from_fn(|k| f(&self.components[k], &other.components[k])),
        }
    }

    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            a.axpy(alpha, b);
        }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.dot(b))
            .sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.components.iter().map(Tensor3::l1_norm).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().map(Tensor3::max_abs).fold(0.0, f64::max)
    }
}

/// Circular forward difference `x[k+1] - x[k]` along component `axis`
/// (0 = bands, 1 = columns, 2 = rows), scaled by `scale`.
fn forward_diff(t: &Tensor3, axis: usize, scale: f64) -> Tensor3 {
    let (m, n, p) = t.dims();
    Tensor3::from_fn((m, n, p), |i, j, q| {
        let next = match axis {
            0 => t.get(i, j, (q + 1) % p),
            1 => t.get(i, (j + 1) % n, q),
            _ => t.get((i + 1) % m, j, q),
        };
        scale * (next - t.get(i, j, q))
    })
}

/// Adjoint of [`forward_diff`]: `y[k-1] - y[k]`, scaled.
fn backward_diff_adjoint(y: &Tensor3, axis: usize, scale: f64) -> Tensor3 {
    let (m, n, p) = y.dims();
    Tensor3::from_fn((m, n, p), |i, j, q| {
        let prev = match axis {
            0 => y.get(i, j, (q + p - 1) % p),
            1 => y.get(i, (j + n - 1) % n, q),
            _ => y.get((i + m - 1) % m, j, q),
        };
        scale * (prev - y.get(i, j, q))
    })
}

/// Weighted difference operator `D = [w1 D1; w2 D2; w3 D3]`.
pub fn diff(t: &Tensor3, w: DiffWeights) -> DiffField {
    DiffField {
        components: std::array::from_fn(|k| forward_diff(t, k, w.w[k])),
    }
}

/// `D^T`, the exact adjoint of [`diff`].
pub fn diff_adjoint(f: &DiffField, w: DiffWeights) -> Tensor3 {
    let mut out = Tensor3::zeros(f.dims());
    for k in 0..3 {
        out.axpy(1.0, &backward_diff_adjoint(&f.components[k], k, w.w[k]));
    }
    out
}

/// Anisotropic SSTV value, `||D t||_1`.
pub fn sstv_value(t: &Tensor3, w: DiffWeights) -> f64 {
    diff(t, w).l1_norm()
}

/// `U_i = Soft_{tau/mu}(w_i D_i X - Lam_i / mu)` for each component.
pub fn update_u(x: &Tensor3, lam: &DiffField, w: DiffWeights, tau: f64, mu: f64) -> DiffField {
    let dx = diff(x, w);
    dx.zip_map(lam, |d, l| {
        let mut center = d.clone();
        center.axpy(-1.0 / mu, l);
        soft(&center, tau / mu)
    })
}

/// Eigenvalues of `D_k^T D_k` for a circular forward difference of length `len`.
fn difference_spectrum(len: usize) -> Vec<f64> {
    (0..len)
        .map(|f| 2.0 - 2.0 * (2.0 * PI * f as f64 / len as f64).cos())
        .collect()
}

/// `(D^T D + I) x`, applied directly.
pub fn normal_operator(x: &Tensor3, w: DiffWeights) -> Tensor3 {
    let mut out = diff_adjoint(&diff(x, w), w);
    out.axpy(1.0, x);
    out
}

/// Solves `(D^T D + I) x = rhs` by diagonalizing in the 3-D Fourier domain.
pub fn solve_normal(rhs: &Tensor3, w: DiffWeights) -> Result<Tensor3> {
    let dims = rhs.dims();
    let (m, n, p) = dims;
    let rows = difference_spectrum(m);
    let cols = difference_spectrum(n);
    let bands = difference_spectrum(p);
    let [wb, wc, wr] = w.w;

    let mut buf: Vec<Complex64> = rhs.as_slice().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::forward_3d(&mut buf, dims);
    for q in 0..p {
        for i in 0..m {
            for j in 0..n {
                let denom =
                    1.0 + wb * wb * bands[q] + wc * wc * cols[j] + wr * wr * rows[i];
                buf[q * m * n + i * n + j] /= denom;
            }
        }
    }
    fft::inverse_3d(&mut buf, dims);
    real_part_checked(dims, buf, 1.0)
}

/// `X` update: solve `(D^T D + I) X = D^T(U + Lam/mu) + (J + Lam_X/mu)`.
pub fn update_x(
    j: &Tensor3,
    lam_x: &Tensor3,
    u: &DiffField,
    lam: &DiffField,
    w: DiffWeights,
    mu: f64,
) -> Result<Tensor3> {
    let mut shifted = u.clone();
    shifted.axpy(1.0 / mu, lam);
    let mut rhs = diff_adjoint(&shifted, w);
    rhs.axpy(1.0, j);
    rhs.axpy(1.0 / mu, lam_x);
    solve_normal(&rhs, w)
}
