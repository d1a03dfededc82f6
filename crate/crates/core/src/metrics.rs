//! Picture quality indices: per-band PSNR and SSIM with their band means,
//! ERGAS and the mean spectral angle (degrees).
//!
//! All indices assume the normalized `[0, 1]` intensity domain.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::Tensor3;

/// PSNR reported when the mean squared error vanishes.
pub const PSNR_CAP: f64 = 99.0;
const MSE_FLOOR: f64 = 1e-12;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;
pub const SSIM_RANGE: f64 = 1.0;

fn check_lengths(x: &[f64], reference: &[f64]) -> Result<()> {
    if x.len() != reference.len() {
        return Err(Error::DimensionMismatch {
            expected: (reference.len(), 1, 1),
            found: (x.len(), 1, 1),
        });
    }
    Ok(())
}

fn check_same_dims(x: &Tensor3, reference: &Tensor3) -> Result<()> {
    if x.dims() != reference.dims() {
        return Err(Error::DimensionMismatch {
            expected: reference.dims(),
            found: x.dims(),
        });
    }
    Ok(())
}

pub fn mse(x: &[f64], reference: &[f64]) -> Result<f64> {
    check_lengths(x, reference)?;
    let sum: f64 = x.iter().zip(reference).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / x.len() as f64)
}

/// `10 log10(peak^2 / MSE)`, capped at [`PSNR_CAP`].
pub fn psnr_band(x: &[f64], reference: &[f64], peak: f64) -> Result<f64> {
    let mse = mse(x, reference)?;
    if mse < MSE_FLOOR {
        return Ok(PSNR_CAP);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
fn gaussian_taps() -> [f64; SSIM_WINDOW] {
    let half = (SSIM_WINDOW / 2) as f64;
    let mut taps = [0.0; SSIM_WINDOW];
    for (k, t) in taps.iter_mut().enumerate() {
        let d = k as f64 - half;
        *t = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Separable "valid" Gaussian filtering of a row-major image.
fn filter_valid(img: &[f64], rows: usize, cols: usize, taps: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let out_c = cols - SSIM_WINDOW + 1;
    let out_r = rows - SSIM_WINDOW + 1;
    let mut horiz = vec![0.0; rows * out_c];
    for i in 0..rows {
        for j in 0..out_c {
            horiz[i * out_c + j] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * img[i * cols + j + k])
                .sum();
        }
    }
    let mut out = vec![0.0; out_r * out_c];
    for i in 0..out_r {
        for j in 0..out_c {
            out[i * out_c + j] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * horiz[(i + k) * out_c + j])
                .sum();
        }
    }
    out
}

/// Mean SSIM over all valid 11x11 Gaussian-weighted windows.
pub fn ssim_band(x: &[f64], reference: &[f64], rows: usize, cols: usize) -> Result<f64> {
    check_lengths(x, reference)?;
    if x.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            expected: (rows, cols, 1),
            found: (x.len(), 1, 1),
        });
    }
    if rows < SSIM_WINDOW || cols < SSIM_WINDOW {
        return Err(Error::ImageTooSmall {
            rows,
            cols,
            window: SSIM_WINDOW,
        });
    }
    let taps = gaussian_taps();
    let c1 = (SSIM_K1 * SSIM_RANGE).powi(2);
    let c2 = (SSIM_K2 * SSIM_RANGE).powi(2);

    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = reference.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(reference).map(|(a, b)| a * b).collect();
    let mu_x = filter_valid(x, rows, cols, &taps);
    let mu_y = filter_valid(reference, rows, cols, &taps);
    let e_xx = filter_valid(&xx, rows, cols, &taps);
    let e_yy = filter_valid(&yy, rows, cols, &taps);
    let e_xy = filter_valid(&xy, rows, cols, &taps);

    let total: f64 = (0..mu_x.len())
        .map(|k| {
            let (mx, my) = (mu_x[k], mu_y[k]);
            let vx = e_xx[k] - mx * mx;
            let vy = e_yy[k] - my * my;
            let cxy = e_xy[k] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
        })
        .sum();
    Ok(total / mu_x.len() as f64)
}

/// `100 sqrt(mean_b (RMSE_b / mean(ref_b))^2)`, no resolution-ratio factor.
pub fn ergas(x: &Tensor3, reference: &Tensor3) -> Result<f64> {
    check_same_dims(x, reference)?;
    let p = x.dims().2;
    let mut acc = 0.0;
    for q in 0..p {
        let band = reference.band(q);
        let mean = band.iter().sum::<f64>() / band.len() as f64;
        if mean == 0.0 {
            return Err(Error::ZeroBandMean { band: q });
        }
        let rmse = mse(x.band(q), band)?.sqrt();
        acc += (rmse / mean).powi(2);
    }
    Ok(100.0 * (acc / p as f64).sqrt())
}

/// Mean spectral angle in degrees over all pixels.
///
/// The angle `arccos(<x, r> / (|x| |r|))` is evaluated as
/// `2 atan2(|x^ - r^|, |x^ + r^|)` on the unit vectors, which agrees with the
/// arccos form but stays accurate near 0 and 180 degrees.
pub fn msad(x: &Tensor3, reference: &Tensor3) -> Result<f64> {
    check_same_dims(x, reference)?;
    let (m, n, p) = x.dims();
    let plane = m * n;
    let (xs, rs) = (x.as_slice(), reference.as_slice());
    let mut total = 0.0;
    for pixel in 0..plane {
        let (mut nx, mut nr) = (0.0, 0.0);
        for q in 0..p {
            nx += xs[q * plane + pixel].powi(2);
            nr += rs[q * plane + pixel].powi(2);
        }
        if nx == 0.0 || nr == 0.0 {
            return Err(Error::ZeroSpectrum { pixel });
        }
        let (nx, nr) = (nx.sqrt(), nr.sqrt());
        let (mut diff, mut sum) = (0.0, 0.0);
        for q in 0..p {
            let a = xs[q * plane + pixel] / nx;
            let b = rs[q * plane + pixel] / nr;
            diff += (a - b) * (a - b);
            sum += (a + b) * (a + b);
        }
        total += (2.0 * diff.sqrt().atan2(sum.sqrt())).to_degrees();
    }
    Ok(total / plane as f64)
}

pub fn mpsnr(x: &Tensor3, reference: &Tensor3) -> Result<f64> {
    check_same_dims(x, reference)?;
    let p = x.dims().2;
    let sum = (0..p)
        .map(|q| psnr_band(x.band(q), reference.band(q), 1.0))
        .sum::<Result<f64>>()?;
    Ok(sum / p as f64)
}

pub fn mssim(x: &Tensor3, reference: &Tensor3) -> Result<f64> {
    check_same_dims(x, reference)?;
    let (m, n, p) = x.dims();
    let per_band = (0..p)
        .into_par_iter()
        .map(|q| ssim_band(x.band(q), reference.band(q), m, n))
        .collect::<Result<Vec<f64>>>()?;
    Ok(per_band.iter().sum::<f64>() / p as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub psnr: Vec<f64>,
    pub ssim: Vec<f64>,
    pub mpsnr: f64,
    pub mssim: f64,
    pub ergas: f64,
    pub msad: f64,
}

impl MetricsReport {
    pub fn compute(x: &Tensor3, reference: &Tensor3) -> Result<Self> {
        check_same_dims(x, reference)?;
        let (m, n, p) = x.dims();
        let psnr = (0..p)
            .map(|q| psnr_band(x.band(q), reference.band(q), 1.0))
            .collect::<Result<Vec<_>>>()?;
        let ssim = (0..p)
            .into_par_iter()
            .map(|q| ssim_band(x.band(q), reference.band(q), m, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            mpsnr: psnr.iter().sum::<f64>() / p as f64,
            mssim: ssim.iter().sum::<f64>() / p as f64,
            psnr,
            ssim,
            ergas: ergas(x, reference)?,
            msad: msad(x, reference)?,
        })
    }
}
