use crate::tensor::Tensor3;

/// Per-band `(min, max)` of the original data.
#[derive(Debug, Clone, PartialEq)]
pub struct BandTransform {
    pub ranges: Vec<(f64, f64)>,
}

impl BandTransform {
    /// Applies the forward map of each band to another tensor of the same
    /// band count, e.g. a reference cube that must live in the same domain.
    pub fn apply(&self, t: &Tensor3) -> Tensor3 {
        let mut out = t.clone();
        for (q, &(lo, hi)) in self.ranges.iter().enumerate() {
            let span = hi - lo;
            for v in out.band_mut(q) {
                *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
            }
        }
        out
    }
}

/// Maps each band affinely onto `[0, 1]`. Constant bands map to 0.
pub fn normalize_bands(t: &Tensor3) -> (Tensor3, BandTransform) {
    let p = t.dims().2;
    let ranges = (0..p)
        .map(|q| {
            t.band(q)
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
        })
        .collect();
    let transform = BandTransform { ranges };
    (transform.apply(t), transform)
}

/// Inverse of [`normalize_bands`]; degenerate bands are restored to their constant.
pub fn denormalize_bands(t: &Tensor3, transform: &BandTransform) -> Tensor3 {
    let mut out = t.clone();
    for (q, &(lo, hi)) in transform.ranges.iter().enumerate() {
        let span = hi - lo;
        for v in out.band_mut(q) {
            *v = if span > 0.0 { lo + *v * span } else { lo };
        }
    }
    out
}
