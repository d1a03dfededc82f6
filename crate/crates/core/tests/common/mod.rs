#![allow(dead_code)]

use hsi_restore::Tensor3;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(dims: (usize, usize, usize), rng: &mut impl Rng) -> Tensor3 {
    Tensor3::from_fn(dims, |_, _, _| rng.random_range(-1.0..1.0))
}

pub fn random_complex(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// Unnormalized DFT of every band tube by explicit summation.
pub fn direct_dft(t: &Tensor3) -> Vec<Complex64> {
    let (m, n, p) = t.dims();
    let mut out = vec![Complex64::new(0.0, 0.0); m * n * p];
    for i in 0..m {
        for j in 0..n {
            for k in 0..p {
                let mut acc = Complex64::new(0.0, 0.0);
                for q in 0..p {
                    let ang = -2.0 * PI * (k * q) as f64 / p as f64;
                    acc += Complex64::from_polar(t.get(i, j, q), ang);
                }
                out[k * m * n + i * n + j] = acc;
            }
        }
    }
    out
}

/// Singular values from the eigenvalues of `A^H A`, descending.
pub fn singular_values_via_gram(a: &DMatrix<Complex64>) -> Vec<f64> {
    let (r, c) = a.shape();
    let gram = if r >= c { a.adjoint() * a } else { a * a.adjoint() };
    let eig = gram.symmetric_eigen();
    let mut s: Vec<f64> = eig.eigenvalues.iter().map(|&v| v.max(0.0).sqrt()).collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn perturb(t: &Tensor3, radius: f64, rng: &mut impl Rng) -> Tensor3 {
    t.zip_map(&Tensor3::from_fn(t.dims(), |_, _, _| rng.random_range(-radius..radius)), |a, b| a + b)
}
