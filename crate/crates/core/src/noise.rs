//! Seeded mixed-noise degradation: Gaussian, salt-and-pepper impulse,
//! stripes and deadlines, organised as six standard simulation cases.

use std::fmt;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tensor::Tensor3;

/// Stripe offsets have magnitude in this range and a random sign.
pub const STRIPE_AMPLITUDE: (f64, f64) = (0.2, 0.5);

/// Inclusive band range, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandRange {
    pub first: usize,
    pub last: usize,
}

impl BandRange {
    pub fn new(first: usize, last: usize) -> Self {
        Self { first, last }
    }

    fn check(&self, bands: usize) -> Result<()> {
        if self.first < 1 || self.first > self.last || self.last > bands {
            return Err(Error::BandRangeOutOfBounds {
                first: self.first,
                last: self.last,
                bands,
            });
        }
        Ok(())
    }

    /// Whether 0-based band `q` is struck.
    fn contains(&self, q: usize) -> bool {
        (self.first..=self.last).contains(&(q + 1))
    }
}

impl fmt::Display for BandRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.first, self.last)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub case_id: u8,
    /// Per-band Gaussian standard deviation, drawn uniformly from this range.
    pub sigma: (f64, f64),
    /// Per-band fraction of salt-and-pepper pixels, drawn uniformly from this range.
    pub impulse: (f64, f64),
    pub stripe_bands: Option<BandRange>,
    pub stripe_count: (usize, usize),
    pub deadline_bands: Option<BandRange>,
    pub deadline_count: (usize, usize),
    pub deadline_width: (usize, usize),
    pub seed: u64,
}

/// Band ranges of the two reference scenes: (bands, stripes, deadlines).
const REFERENCE_SCENES: [(usize, (usize, usize), (usize, usize)); 2] =
    [(224, (111, 140), (131, 160)), (80, (44, 64), (54, 74))];

fn scaled_range(range: (usize, usize), bands: usize) -> BandRange {
    let (reference, _, _) = REFERENCE_SCENES[0];
    let scale = |b: usize| {
        ((b as f64 * bands as f64 / reference as f64).round() as usize).clamp(1, bands)
    };
    BandRange::new(scale(range.0), scale(range.1))
}

impl NoiseSpec {
    /// Clean pass-through spec: no noise of any kind.
    pub fn none(seed: u64) -> Self {
        Self {
            case_id: 0,
            sigma: (0.0, 0.0),
            impulse: (0.0, 0.0),
            stripe_bands: None,
            stripe_count: (20, 40),
            deadline_bands: None,
            deadline_count: (3, 10),
            deadline_width: (1, 3),
            seed,
        }
    }

    /// Parameters of simulation case `case_id` for a cube with `bands` bands.
    /// Structured-noise band ranges follow the reference scenes when the band
    /// count matches one of them, and are scaled proportionally otherwise.
    pub fn default_case(case_id: u8, bands: usize) -> Result<Self> {
        if !(1..=6).contains(&case_id) {
            return Err(Error::UnknownCase(case_id));
        }
        let (stripes, deadlines) = match REFERENCE_SCENES.iter().find(|s| s.0 == bands) {
            Some(&(_, s, d)) => (BandRange::new(s.0, s.1), BandRange::new(d.0, d.1)),
            None => {
                let (_, s, d) = REFERENCE_SCENES[0];
                (scaled_range(s, bands), scaled_range(d, bands))
            }
        };
        let mut spec = Self::none(0);
        spec.case_id = case_id;
        match case_id {
            1 => {
                spec.sigma = (0.1, 0.1);
                spec.impulse = (0.2, 0.2);
            }
            2 => spec.sigma = (0.1, 0.1),
            _ => {
                spec.sigma = (0.0, 0.2);
                spec.impulse = (0.0, 0.2);
            }
        }
        if matches!(case_id, 4 | 6) {
            spec.stripe_bands = Some(stripes);
        }
        if matches!(case_id, 5 | 6) {
            spec.deadline_bands = Some(deadlines);
        }
        Ok(spec)
    }

    pub fn validate(&self, bands: usize) -> Result<()> {
        let range_ok = |(lo, hi): (f64, f64), max: f64| lo >= 0.0 && lo <= hi && hi <= max;
        if !range_ok(self.sigma, f64::MAX) {
            return Err(Error::InvalidParameter(format!("bad sigma range {:?}", self.sigma)));
        }
        if !range_ok(self.impulse, 1.0) {
            return Err(Error::InvalidParameter(format!(
                "impulse fraction range {:?} not within [0, 1]",
                self.impulse
            )));
        }
        for (name, (lo, hi)) in [
            ("stripe_count", self.stripe_count),
            ("deadline_count", self.deadline_count),
            ("deadline_width", self.deadline_width),
        ] {
            if lo > hi {
                return Err(Error::InvalidParameter(format!("{name} range {lo}..{hi} is reversed")));
            }
        }
        if self.deadline_width.0 == 0 {
            return Err(Error::InvalidParameter("deadline width must be >= 1".into()));
        }
        for r in [self.stripe_bands, self.deadline_bands].into_iter().flatten() {
            r.check(bands)?;
        }
        Ok(())
    }
}

/// Where each structured corruption landed. Bands and columns are 0-based.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NoiseDescriptor {
    pub band_sigma: Vec<f64>,
    pub band_impulse: Vec<f64>,
    /// Per band, row-major pixel indices set to 0 or 1.
    pub impulse_pixels: Vec<Vec<usize>>,
    pub stripes: Vec<Stripe>,
    pub deadlines: Vec<Deadline>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stripe {
    pub band: usize,
    pub col: usize,
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Deadline {
    pub band: usize,
    pub col: usize,
}

fn draw_uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

fn draw_count(rng: &mut ChaCha8Rng, (lo, hi): (usize, usize)) -> usize {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Corrupts `clean` according to `spec`. Bands are processed in order with
/// Gaussian noise, then stripes, then impulse, then deadlines. The result is
/// not clipped.
pub fn apply_noise(clean: &Tensor3, spec: &NoiseSpec) -> Result<(Tensor3, NoiseDescriptor)> {
    let (m, n, p) = clean.dims();
    spec.validate(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut noisy = clean.clone();
    let mut desc = NoiseDescriptor::default();

    for q in 0..p {
        let sigma = draw_uniform(&mut rng, spec.sigma);
        let frac = draw_uniform(&mut rng, spec.impulse);
        desc.band_sigma.push(sigma);
        desc.band_impulse.push(frac);
        let band = noisy.band_mut(q);

        if sigma > 0.0 {
            for v in band.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *v += sigma * z;
            }
        }

        if spec.stripe_bands.is_some_and(|r| r.contains(q)) {
            let count = draw_count(&mut rng, spec.stripe_count).min(n);
            let mut cols = index::sample(&mut rng, n, count).into_vec();
            cols.sort_unstable();
            for col in cols {
                let magnitude = rng.random_range(STRIPE_AMPLITUDE.0..=STRIPE_AMPLITUDE.1);
                let offset = if rng.random_bool(0.5) { magnitude } else { -magnitude };
                for i in 0..m {
                    band[i * n + col] += offset;
                }
                desc.stripes.push(Stripe { band: q, col, offset });
            }
        }

        let hits = ((frac * (m * n) as f64).round() as usize).min(m * n);
        let mut pixels = index::sample(&mut rng, m * n, hits).into_vec();
        pixels.sort_unstable();
        for &k in &pixels {
            band[k] = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
        }
        desc.impulse_pixels.push(pixels);

        if spec.deadline_bands.is_some_and(|r| r.contains(q)) {
            let count = draw_count(&mut rng, spec.deadline_count);
            let mut struck = vec![false; n];
            for _ in 0..count {
                let width = draw_count(&mut rng, spec.deadline_width).min(n);
                let start = rng.random_range(0..=n - width);
                struck[start..start + width].iter_mut().for_each(|s| *s = true);
            }
            for (col, _) in struck.iter().enumerate().filter(|(_, s)| **s) {
                for i in 0..m {
                    band[i * n + col] = 0.0;
                }
                desc.deadlines.push(Deadline { band: q, col });
            }
        }
    }
    Ok((noisy, desc))
}
