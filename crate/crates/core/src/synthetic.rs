//! Seeded synthetic scenes with known low-rank structure, for simulation
//! studies where the clean cube must be known exactly.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tensor::Tensor3;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub dims: (usize, usize, usize),
    /// Number of smooth separable spatial x spectral components.
    pub smooth_components: usize,
    /// Adds one piecewise-constant block map times its own spectrum.
    pub blocks: bool,
    pub seed: u64,
}

impl SceneSpec {
    pub fn new(dims: (usize, usize, usize), seed: u64) -> Self {
        Self {
            dims,
            smooth_components: 3,
            blocks: true,
            seed,
        }
    }
}

fn smooth_spatial(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<f64> {
    let fr = rng.random_range(0.5..2.5);
    let fc = rng.random_range(0.5..2.5);
    let (pr, pc) = (rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI));
    let mut out = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            let a = (2.0 * PI * fr * i as f64 / m as f64 + pr).sin();
            let b = (2.0 * PI * fc * j as f64 / n as f64 + pc).cos();
            out.push(0.5 + 0.25 * a + 0.25 * b);
        }
    }
    out
}

fn smooth_spectrum(rng: &mut ChaCha8Rng, p: usize) -> Vec<f64> {
    let center = rng.random_range(0.0..1.0);
    let width = rng.random_range(0.2..0.6);
    (0..p)
        .map(|q| {
            let t = if p > 1 { q as f64 / (p - 1) as f64 } else { 0.0 };
            0.2 + (-((t - center) / width).powi(2)).exp()
        })
        .collect()
}

fn block_map(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<f64> {
    const CELLS: usize = 4;
    let levels: Vec<f64> = (0..CELLS * CELLS).map(|_| rng.random_range(0.0..1.0)).collect();
    let mut out = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            let (ci, cj) = (i * CELLS / m, j * CELLS / n);
            out.push(levels[ci * CELLS + cj]);
        }
    }
    out
}

/// Sum of separable rank-1 components (plus an optional block component),
/// affinely mapped to `[0.05, 0.95]`.
pub fn low_rank_scene(spec: &SceneSpec) -> Tensor3 {
    let (m, n, p) = spec.dims;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut components: Vec<(Vec<f64>, Vec<f64>)> = (0..spec.smooth_components)
        .map(|_| (smooth_spatial(&mut rng, m, n), smooth_spectrum(&mut rng, p)))
        .collect();
    if spec.blocks {
        components.push((block_map(&mut rng, m, n), smooth_spectrum(&mut rng, p)));
    }
    let mut scene = Tensor3::from_fn(spec.dims, |i, j, q| {
        components
            .iter()
            .map(|(spatial, spectrum)| spatial[i * n + j] * spectrum[q])
            .sum()
    });
    let (lo, hi) = scene
        .as_slice()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    for v in scene.as_mut_slice() {
        *v = if span > 0.0 { 0.05 + 0.9 * (*v - lo) / span } else { 0.5 };
    }
    scene
}
