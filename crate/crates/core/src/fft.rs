//! Batched FFTs along one axis of a band-major cube.
//!
//! Both directions are unnormalized: the forward transform is exactly the
//! DFT-matrix product and callers apply the `1/len` factor of the inverse.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

/// Cube axis. `Rows` is mode 1, `Cols` mode 2, `Bands` mode 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Cols,
    Bands,
}

/// Transform every line of `data` (dims `(m, n, p)`, band-major) along `axis`.
pub fn transform_axis(
    data: &mut [Complex64],
    dims: (usize, usize, usize),
    axis: Axis,
    direction: FftDirection,
) {
    let (m, n, p) = dims;
    debug_assert_eq!(data.len(), m * n * p);
    let (len, stride) = match axis {
        Axis::Rows => (m, n),
        Axis::Cols => (n, 1),
        Axis::Bands => (p, m * n),
    };
    if len <= 1 {
        return;
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft(len, direction);

    if stride == 1 {
        fft.process(data);
        return;
    }

    // Gather strided lines into one contiguous batch.
    let lines = data.len() / len;
    let mut batch = vec![Complex64::default(); data.len()];
    let line_starts = line_starts(dims, axis);
    for (l, &start) in line_starts.iter().enumerate() {
        for k in 0..len {
            batch[l * len + k] = data[start + k * stride];
        }
    }
    debug_assert_eq!(line_starts.len(), lines);
    fft.process(&mut batch);
    for (l, &start) in line_starts.iter().enumerate() {
        for k in 0..len {
            data[start + k * stride] = batch[l * len + k];
        }
    }
}

fn line_starts(dims: (usize, usize, usize), axis: Axis) -> Vec<usize> {
    let (m, n, p) = dims;
    match axis {
        Axis::Rows => (0..p)
            .flat_map(|q| (0..n).map(move |j| q * m * n + j))
            .collect(),
        Axis::Cols => (0..p)
            .flat_map(|q| (0..m).map(move |i| q * m * n + i * n))
            .collect(),
        Axis::Bands => (0..m * n).collect(),
    }
}

/// Full 3-D forward transform, in place.
pub fn forward_3d(data: &mut [Complex64], dims: (usize, usize, usize)) {
    for axis in [Axis::Bands, Axis::Rows, Axis::Cols] {
        transform_axis(data, dims, axis, FftDirection::Forward);
    }
}

/// Full 3-D inverse transform including the `1/(m n p)` factor, in place.
pub fn inverse_3d(data: &mut [Complex64], dims: (usize, usize, usize)) {
    for axis in [Axis::Bands, Axis::Rows, Axis::Cols] {
        transform_axis(data, dims, axis, FftDirection::Inverse);
    }
    let scale = 1.0 / (dims.0 * dims.1 * dims.2) as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn direct_dft(line: &[Complex64]) -> Vec<Complex64> {
        let n = line.len();
        (0..n)
            .map(|k| {
                line.iter()
                    .enumerate()
                    .map(|(t, &x)| x * Complex64::from_polar(1.0, -2.0 * PI * (k * t) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn each_axis_matches_direct_dft() {
        let dims = (3, 4, 5);
        let src: Vec<Complex64> = (0..60)
            .map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos()))
            .collect();
        let idx = |i: usize, j: usize, q: usize| q * 12 + i * 4 + j;

        for axis in [Axis::Rows, Axis::Cols, Axis::Bands] {
            let mut data = src.clone();
            transform_axis(&mut data, dims, axis, FftDirection::Forward);
            for a in 0..3 {
                for b in 0..4 {
                    for c in 0..5 {
                        let (line_idx, pos): (Vec<usize>, usize) = match axis {
                            Axis::Rows => ((0..3).map(|i| idx(i, b, c)).collect(), a),
                            Axis::Cols => ((0..4).map(|j| idx(a, j, c)).collect(), b),
                            Axis::Bands => ((0..5).map(|q| idx(a, b, q)).collect(), c),
                        };
                        let line: Vec<Complex64> = line_idx.iter().map(|&k| src[k]).collect();
                        let want = direct_dft(&line)[pos];
                        assert!((data[line_idx[pos]] - want).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn inverse_3d_undoes_forward_3d() {
        let dims = (4, 3, 6);
        let src: Vec<Complex64> = (0..72).map(|k| Complex64::new(k as f64 % 7.0, 0.0)).collect();
        let mut data = src.clone();
        forward_3d(&mut data, dims);
        inverse_3d(&mut data, dims);
        for (a, b) in data.iter().zip(&src) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
