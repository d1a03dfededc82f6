//! Dense real and complex 3-way tensors, the spectral-mode FFT pair and the
//! batched SVD of Fourier-domain frontal slices.
//!
//! Storage is band-major: frontal slice `q` is one contiguous block and is
//! row-major inside, so element `(i, j, q)` of an `m x n x p` cube lives at
//! `q*m*n + i*n + j`.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::fft::{transform_axis, Axis};

/// Largest imaginary part `ifft3` silently discards.
pub const IMAGINARY_RESIDUE_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: (usize, usize, usize),
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dims: (usize, usize, usize)) -> Self {
        assert!(
            dims.0 > 0 && dims.1 > 0 && dims.2 > 0,
            "tensor dims must be positive, got {dims:?}"
        );
        Self {
            dims,
            data: vec![0.0; dims.0 * dims.1 * dims.2],
        }
    }

    pub fn filled(dims: (usize, usize, usize), value: f64) -> Self {
        let mut t = Self::zeros(dims);
        t.data.fill(value);
        t
    }

    /// Wraps a band-major buffer, checking its length and that every value is finite.
    pub fn from_vec(dims: (usize, usize, usize), data: Vec<f64>) -> Result<Self> {
        let (m, n, p) = dims;
        if m == 0 || n == 0 || p == 0 {
            return Err(Error::InvalidParameter(format!(
                "tensor dims must be positive, got {dims:?}"
            )));
        }
        if data.len() != m * n * p {
            return Err(Error::InvalidParameter(format!(
                "buffer of {} values does not match dims {dims:?}",
                data.len()
            )));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        Ok(Self { dims, data })
    }

    /// Builds a tensor from `f(i, j, q)`.
    pub fn from_fn(dims: (usize, usize, usize), mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dims);
        let (m, n, p) = dims;
        for q in 0..p {
            for i in 0..m {
                for j in 0..n {
                    t.data[q * m * n + i * n + j] = f(i, j, q);
                }
            }
        }
        t
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index_of(&self, i: usize, j: usize, q: usize) -> usize {
        let (m, n, _) = self.dims;
        q * m * n + i * n + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, q: usize) -> f64 {
        self.data[self.index_of(i, j, q)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, q: usize, value: f64) {
        let k = self.index_of(i, j, q);
        self.data[k] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Frontal slice `q` as a row-major `m*n` slice.
    pub fn band(&self, q: usize) -> &[f64] {
        let size = self.dims.0 * self.dims.1;
        &self.data[q * size..(q + 1) * size]
    }

    pub fn band_mut(&mut self, q: usize) -> &mut [f64] {
        let size = self.dims.0 * self.dims.1;
        &mut self.data[q * size..(q + 1) * size]
    }

    /// Spectrum at pixel `(i, j)`.
    pub fn tube(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.dims.2).map(|q| self.get(i, j, q)).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            dims: self.dims,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.dims, other.dims, "tensor dims differ");
        Self {
            dims: self.dims,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        assert_eq!(self.dims, other.dims, "tensor dims differ");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        assert_eq!(self.dims, other.dims, "tensor dims differ");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn to_complex(&self) -> CTensor3 {
        CTensor3 {
            dims: self.dims,
            data: self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}

impl Add for &Tensor3 {
    type Output = Tensor3;
    fn add(self, rhs: &Tensor3) -> Tensor3 {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &Tensor3 {
    type Output = Tensor3;
    fn sub(self, rhs: &Tensor3) -> Tensor3 {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &Tensor3 {
    type Output = Tensor3;
    fn mul(self, rhs: f64) -> Tensor3 {
        self.map(|a| a * rhs)
    }
}

/// Complex cube with the same layout as [`Tensor3`]; holds spectral-mode
/// Fourier transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct CTensor3 {
    dims: (usize, usize, usize),
    data: Vec<Complex64>,
}

impl CTensor3 {
    pub fn zeros(dims: (usize, usize, usize)) -> Self {
        assert!(dims.0 > 0 && dims.1 > 0 && dims.2 > 0);
        Self {
            dims,
            data: vec![Complex64::default(); dims.0 * dims.1 * dims.2],
        }
    }

    pub fn from_vec(dims: (usize, usize, usize), data: Vec<Complex64>) -> Result<Self> {
        if dims.0 == 0 || dims.1 == 0 || dims.2 == 0 || data.len() != dims.0 * dims.1 * dims.2 {
            return Err(Error::InvalidParameter(format!(
                "buffer of {} values does not match dims {dims:?}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, q: usize) -> Complex64 {
        let (m, n, _) = self.dims;
        self.data[q * m * n + i * n + j]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Frontal slice `q` as an `m x n` matrix.
    pub fn slice(&self, q: usize) -> DMatrix<Complex64> {
        let (m, n, _) = self.dims;
        DMatrix::from_row_slice(m, n, &self.data[q * m * n..(q + 1) * m * n])
    }

    pub fn set_slice(&mut self, q: usize, mat: &DMatrix<Complex64>) {
        let (m, n, _) = self.dims;
        assert_eq!(mat.shape(), (m, n), "slice shape mismatch");
        let block = &mut self.data[q * m * n..(q + 1) * m * n];
        for i in 0..m {
            for j in 0..n {
                block[i * n + j] = mat[(i, j)];
            }
        }
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Unnormalized DFT of every mode-3 tube.
pub fn fft3(t: &Tensor3) -> CTensor3 {
    let mut out = t.to_complex();
    transform_axis(&mut out.data, out.dims, Axis::Bands, FftDirection::Forward);
    out
}

/// Inverse of [`fft3`] (`1/p` scaled). Imaginary parts are dropped after
/// checking they are numerically zero.
pub fn ifft3(t: &CTensor3) -> Result<Tensor3> {
    let mut buf = t.data.clone();
    transform_axis(&mut buf, t.dims, Axis::Bands, FftDirection::Inverse);
    real_part_checked(t.dims, buf, 1.0 / t.dims.2 as f64)
}

pub(crate) fn real_part_checked(
    dims: (usize, usize, usize),
    buf: Vec<Complex64>,
    scale: f64,
) -> Result<Tensor3> {
    let mut worst = 0.0f64;
    let data: Vec<f64> = buf
        .iter()
        .map(|z| {
            worst = worst.max((z.im * scale).abs());
            z.re * scale
        })
        .collect();
    if worst >= IMAGINARY_RESIDUE_LIMIT || worst.is_nan() {
        return Err(Error::ImaginaryResidueTooLarge { magnitude: worst });
    }
    if let Some(index) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { index });
    }
    Ok(Tensor3 { dims, data })
}

/// Thin SVD of one matrix: `a = u * diag(sigma) * v_adj`.
#[derive(Debug, Clone)]
pub struct MatrixSvd {
    pub u: DMatrix<Complex64>,
    /// Nonincreasing, nonnegative.
    pub sigma: Vec<f64>,
    /// `V^H`, of shape `s x n`.
    pub v_adj: DMatrix<Complex64>,
}

impl MatrixSvd {
    pub fn reconstruct_with(&self, sigma: &[f64]) -> DMatrix<Complex64> {
        let mut us = self.u.clone();
        for (k, &s) in sigma.iter().enumerate() {
            us.column_mut(k).scale_mut(s);
        }
        us * &self.v_adj
    }

    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        self.reconstruct_with(&self.sigma)
    }
}

/// Per-slice SVDs of a complex cube.
#[derive(Debug, Clone)]
pub struct SlicesSvd {
    pub slices: Vec<MatrixSvd>,
}

/// SVD of a single complex matrix with singular values sorted nonincreasing.
/// `slice` only labels the failure.
pub fn svd_matrix(a: &DMatrix<Complex64>, slice: usize) -> Result<MatrixSvd> {
    let (m, n) = a.shape();
    let s = m.min(n);
    if a.iter().all(|z| *z == Complex64::default()) {
        // Exact zero: identity-like factors keep downstream products exactly zero.
        return Ok(MatrixSvd {
            u: DMatrix::identity(m, s),
            sigma: vec![0.0; s],
            v_adj: DMatrix::identity(s, n),
        });
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericalFailure { slice });
    }
    let max_iter = 200 * (m + n).max(10);
    let svd = a
        .clone()
        .try_svd(true, true, f64::EPSILON, max_iter)
        .ok_or(Error::NumericalFailure { slice })?;
    let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
        return Err(Error::NumericalFailure { slice });
    };
    let raw: Vec<f64> = svd.singular_values.iter().copied().collect();
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&x, &y| raw[y].total_cmp(&raw[x]));
    let sigma = order.iter().map(|&k| raw[k].max(0.0)).collect();
    let u = DMatrix::from_fn(m, s, |i, k| u[(i, order[k])]);
    let v_adj = DMatrix::from_fn(s, n, |k, j| v_t[(order[k], j)]);
    Ok(MatrixSvd { u, sigma, v_adj })
}

/// Thin SVD of every frontal slice.
pub fn svd_slices(t: &CTensor3) -> Result<SlicesSvd> {
    let slices = (0..t.dims.2)
        .into_par_iter()
        .map(|q| svd_matrix(&t.slice(q), q))
        .collect::<Result<Vec<_>>>()?;
    Ok(SlicesSvd { slices })
}
