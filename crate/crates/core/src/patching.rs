//! Overlapping spatial windows spanning all bands: extraction, the adjoint
//! scatter, mean-by-coverage aggregation and the closed-form `J` update.

use crate::error::{Error, Result};
use crate::tensor::Tensor3;

#[derive(Debug, Clone, PartialEq)]
pub struct PatchGrid {
    dims: (usize, usize, usize),
    patch: (usize, usize),
    stride: (usize, usize),
    corners: Vec<(usize, usize)>,
    coverage: Vec<u32>,
}

/// Corner offsets along one axis: multiples of `stride`, plus a final
/// window flush with the far edge when the regular ones stop short.
fn axis_corners(len: usize, size: usize, stride: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..)
        .map(|k| k * stride)
        .take_while(|&c| c + size <= len)
        .collect();
    if let Some(&last) = out.last() {
        if last + size < len {
            out.push(len - size);
        }
    }
    out
}

impl PatchGrid {
    pub fn new(
        dims: (usize, usize, usize),
        patch: (usize, usize),
        stride: (usize, usize),
    ) -> Result<Self> {
        let (m, n, p) = dims;
        if m == 0 || n == 0 || p == 0 {
            return Err(Error::InvalidParameter(format!("image dims {dims:?} must be positive")));
        }
        if patch.0 == 0 || patch.1 == 0 || stride.0 == 0 || stride.1 == 0 {
            return Err(Error::InvalidParameter(format!(
                "patch {patch:?} and stride {stride:?} must be positive"
            )));
        }
        if stride.0 > patch.0 || stride.1 > patch.1 {
            return Err(Error::InvalidParameter(format!(
                "stride {stride:?} exceeds patch {patch:?}; windows would leave gaps"
            )));
        }
        if patch.0 > m || patch.1 > n {
            return Err(Error::PatchLargerThanImage {
                patch,
                rows: m,
                cols: n,
            });
        }
        let rows = axis_corners(m, patch.0, stride.0);
        let cols = axis_corners(n, patch.1, stride.1);
        let corners: Vec<(usize, usize)> = rows
            .iter()
            .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
            .collect();
        let mut coverage = vec![0u32; m * n];
        for &(r, c) in &corners {
            for i in r..r + patch.0 {
                for cov in &mut coverage[i * n + c..i * n + c + patch.1] {
                    *cov += 1;
                }
            }
        }
        Ok(Self {
            dims,
            patch,
            stride,
            corners,
            coverage,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn patch_size(&self) -> (usize, usize) {
        self.patch
    }

    pub fn stride(&self) -> (usize, usize) {
        self.stride
    }

    pub fn patch_dims(&self) -> (usize, usize, usize) {
        (self.patch.0, self.patch.1, self.dims.2)
    }

    /// Top-left corners, in window-index order.
    pub fn corners(&self) -> &[(usize, usize)] {
        &self.corners
    }

    pub fn len(&self) -> usize {
        self.corners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corners.is_empty()
    }

    /// Per-pixel window count, row-major `m*n`.
    pub fn coverage(&self) -> &[u32] {
        &self.coverage
    }

    /// Coverage broadcast over bands.
    pub fn coverage_tensor(&self) -> Tensor3 {
        let n = self.dims.1;
        Tensor3::from_fn(self.dims, |i, j, _| self.coverage[i * n + j] as f64)
    }

    fn check_index(&self, index: usize) -> Result<(usize, usize)> {
        self.corners.get(index).copied().ok_or(Error::IndexOutOfRange {
            index,
            count: self.corners.len(),
        })
    }

    fn check_image(&self, t: &Tensor3) -> Result<()> {
        if t.dims() != self.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims,
                found: t.dims(),
            });
        }
        Ok(())
    }

    fn check_patch(&self, t: &Tensor3) -> Result<()> {
        if t.dims() != self.patch_dims() {
            return Err(Error::DimensionMismatch {
                expected: self.patch_dims(),
                found: t.dims(),
            });
        }
        Ok(())
    }

    /// Copy of window `index` (the `P_ij` operator).
    pub fn extract(&self, t: &Tensor3, index: usize) -> Result<Tensor3> {
        self.check_image(t)?;
        let (r, c) = self.check_index(index)?;
        let (m1, n1) = self.patch;
        let (m, n, p) = self.dims;
        let mut out = Tensor3::zeros(self.patch_dims());
        let src = t.as_slice();
        let dst = out.as_mut_slice();
        for q in 0..p {
            for i in 0..m1 {
                let from = q * m * n + (r + i) * n + c;
                let to = q * m1 * n1 + i * n1;
                dst[to..to + n1].copy_from_slice(&src[from..from + n1]);
            }
        }
        Ok(out)
    }

    /// Every window, in index order.
    pub fn extract_all(&self, t: &Tensor3) -> Result<Vec<Tensor3>> {
        (0..self.len()).map(|k| self.extract(t, k)).collect()
    }

    /// `acc += P_ij^T(patch)`.
    pub fn scatter_add(&self, acc: &mut Tensor3, index: usize, patch: &Tensor3) -> Result<()> {
        self.check_image(acc)?;
        self.check_patch(patch)?;
        let (r, c) = self.check_index(index)?;
        let (m1, n1) = self.patch;
        let (m, n, p) = self.dims;
        let src = patch.as_slice();
        let dst = acc.as_mut_slice();
        for q in 0..p {
            for i in 0..m1 {
                let to = q * m * n + (r + i) * n + c;
                let from = q * m1 * n1 + i * n1;
                for (d, s) in dst[to..to + n1].iter_mut().zip(&src[from..from + n1]) {
                    *d += s;
                }
            }
        }
        Ok(())
    }

    /// `P_ij^T(patch)` as a full-size tensor.
    pub fn adjoint(&self, index: usize, patch: &Tensor3) -> Result<Tensor3> {
        let mut out = Tensor3::zeros(self.dims);
        self.scatter_add(&mut out, index, patch)?;
        Ok(out)
    }

    /// Sum of all windows' adjoints, accumulated in window order.
    pub fn scatter_sum(&self, patches: &[Tensor3]) -> Result<Tensor3> {
        if patches.len() != self.len() {
            return Err(Error::MissingWindow(patches.len().min(self.len())));
        }
        let mut acc = Tensor3::zeros(self.dims);
        for (k, patch) in patches.iter().enumerate() {
            self.scatter_add(&mut acc, k, patch)?;
        }
        Ok(acc)
    }

    /// Mean of all overlapping contributions at each voxel. Every window must
    /// appear exactly once; the input order does not matter.
    pub fn aggregate(&self, patches: &[(usize, Tensor3)]) -> Result<Tensor3> {
        let mut slot: Vec<Option<&Tensor3>> = vec![None; self.len()];
        for (index, patch) in patches {
            self.check_index(*index)?;
            self.check_patch(patch)?;
            if slot[*index].replace(patch).is_some() {
                return Err(Error::DuplicateWindow(*index));
            }
        }
        let mut ordered = Vec::with_capacity(self.len());
        for (k, s) in slot.into_iter().enumerate() {
            ordered.push(s.ok_or(Error::MissingWindow(k))?);
        }
        Ok(self.running_mean(&ordered))
    }

    /// Same as [`aggregate`](Self::aggregate) for patches already in window order.
    pub fn aggregate_ordered(&self, patches: &[Tensor3]) -> Result<Tensor3> {
        if patches.len() != self.len() {
            return Err(Error::MissingWindow(patches.len().min(self.len())));
        }
        for patch in patches {
            self.check_patch(patch)?;
        }
        let refs: Vec<&Tensor3> = patches.iter().collect();
        Ok(self.running_mean(&refs))
    }

    /// Incremental mean in window order; identical contributions reproduce
    /// their value bit-for-bit.
    fn running_mean(&self, patches: &[&Tensor3]) -> Tensor3 {
        let (m1, n1) = self.patch;
        let (m, n, p) = self.dims;
        let mut acc = Tensor3::zeros(self.dims);
        let mut seen = vec![0u32; m * n];
        let dst = acc.as_mut_slice();
        for (&(r, c), patch) in self.corners.iter().zip(patches) {
            let src = patch.as_slice();
            for i in 0..m1 {
                for jj in 0..n1 {
                    let px = (r + i) * n + c + jj;
                    seen[px] += 1;
                    let k = seen[px] as f64;
                    for q in 0..p {
                        let d = &mut dst[q * m * n + px];
                        *d += (src[q * m1 * n1 + i * n1 + jj] - *d) / k;
                    }
                }
            }
        }
        acc
    }

    /// `t ./= (offset + coverage)`, broadcast over bands.
    fn divide_by_coverage(&self, t: &mut Tensor3, offset: f64) {
        let plane = self.coverage.len();
        for band in t.as_mut_slice().chunks_mut(plane) {
            for (v, &c) in band.iter_mut().zip(&self.coverage) {
                *v /= offset + c as f64;
            }
        }
    }

    /// Closed-form `J` update:
    /// `(X - Lam_X/mu + sum_ij P_ij^T(L_ij + Lam_L_ij/mu)) ./ (1 + coverage)`.
    pub fn update_j(
        &self,
        x: &Tensor3,
        lam_x: &Tensor3,
        l_patches: &[Tensor3],
        lam_l_patches: &[Tensor3],
        mu: f64,
    ) -> Result<Tensor3> {
        self.check_image(x)?;
        self.check_image(lam_x)?;
        if l_patches.len() != self.len() || lam_l_patches.len() != self.len() {
            return Err(Error::MissingWindow(l_patches.len().min(lam_l_patches.len())));
        }
        let mut acc = Tensor3::zeros(self.dims);
        for (k, (l, lam)) in l_patches.iter().zip(lam_l_patches).enumerate() {
            self.check_patch(lam)?;
            let mut shifted = l.clone();
            shifted.axpy(1.0 / mu, lam);
            self.scatter_add(&mut acc, k, &shifted)?;
        }
        acc.axpy(1.0, x);
        acc.axpy(-1.0 / mu, lam_x);
        self.divide_by_coverage(&mut acc, 1.0);
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(dims: (usize, usize, usize), rng: &mut impl Rng) -> Tensor3 {
        Tensor3::from_fn(dims, |_, _, _| rng.random_range(-1.0..1.0))
    }

    /// Window membership recount straight from the corner list.
    fn recount(grid: &PatchGrid) -> Vec<u32> {
        let (m, n, _) = grid.dims();
        let (m1, n1) = grid.patch_size();
        let mut out = vec![0; m * n];
        for i in 0..m {
            for j in 0..n {
                out[i * n + j] = grid
                    .corners()
                    .iter()
                    .filter(|&&(r, c)| r <= i && i < r + m1 && c <= j && j < c + n1)
                    .count() as u32;
            }
        }
        out
    }

    #[test]
    fn single_full_window() {
        let g = PatchGrid::new((4, 4, 2), (4, 4), (4, 4)).unwrap();
        assert_eq!(g.corners(), &[(0, 0)]);
        assert!(g.coverage().iter().all(|&c| c == 1));
    }

    #[test]
    fn half_overlap_grid() {
        let g = PatchGrid::new((6, 6, 1), (4, 4), (2, 2)).unwrap();
        assert_eq!(g.corners(), &[(0, 0), (0, 2), (2, 0), (2, 2)]);
        assert_eq!(g.coverage(), recount(&g).as_slice());
        for i in 2..4 {
            for j in 2..4 {
                assert_eq!(g.coverage()[i * 6 + j], 4);
            }
        }
    }

    #[test]
    fn edge_window_is_clamped() {
        let g = PatchGrid::new((5, 4, 1), (4, 4), (4, 4)).unwrap();
        assert_eq!(g.corners(), &[(0, 0), (1, 0)]);
        assert_eq!(g.coverage(), recount(&g).as_slice());
    }

    #[test]
    fn oversized_patch_rejected() {
        assert!(matches!(
            PatchGrid::new((3, 8, 1), (4, 4), (1, 1)),
            Err(Error::PatchLargerThanImage { .. })
        ));
    }

    #[test]
    fn extract_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let t = random_tensor((4, 5, 3), &mut rng);
        let full = PatchGrid::new((4, 5, 3), (4, 5), (1, 1)).unwrap();
        assert_eq!(full.extract(&t, 0).unwrap(), t);

        let unit = PatchGrid::new((4, 5, 3), (1, 1), (1, 1)).unwrap();
        assert_eq!(unit.extract(&t, 0).unwrap().as_slice(), t.tube(0, 0).as_slice());

        let g = PatchGrid::new((4, 5, 3), (2, 3), (1, 1)).unwrap();
        for k in 0..g.len() {
            let (r, c) = g.corners()[k];
            let patch = g.extract(&t, k).unwrap();
            for q in 0..3 {
                for i in 0..2 {
                    for j in 0..3 {
                        assert_eq!(patch.get(i, j, q), t.get(r + i, c + j, q));
                    }
                }
            }
        }
        assert!(matches!(g.extract(&t, g.len()), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn aggregate_examples() {
        let g = PatchGrid::new((6, 6, 2), (4, 4), (2, 2)).unwrap();
        let c = Tensor3::filled(g.patch_dims(), 0.3);
        let all: Vec<_> = (0..g.len()).map(|k| (k, c.clone())).collect();
        let agg = g.aggregate(&all).unwrap();
        assert!(agg.as_slice().iter().all(|v| (v - 0.3).abs() < 1e-15));

        let missing: Vec<_> = all[1..].to_vec();
        assert!(matches!(g.aggregate(&missing), Err(Error::MissingWindow(0))));
        let mut dup = all.clone();
        dup.push((2, c.clone()));
        assert!(matches!(g.aggregate(&dup), Err(Error::DuplicateWindow(2))));
        assert!(matches!(
            PatchGrid::new((3, 3, 2), (3, 3), (1, 1)).unwrap().aggregate(&[(0, c.clone())]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn aggregate_matches_scatter_add_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let g = PatchGrid::new((6, 6, 3), (4, 4), (2, 2)).unwrap();
        let patches: Vec<Tensor3> = (0..g.len()).map(|_| random_tensor(g.patch_dims(), &mut rng)).collect();
        let mut sum = vec![0.0; 6 * 6 * 3];
        let counts = recount(&g);
        for (k, patch) in patches.iter().enumerate() {
            let (r, c) = g.corners()[k];
            for q in 0..3 {
                for i in 0..4 {
                    for j in 0..4 {
                        sum[q * 36 + (r + i) * 6 + c + j] += patch.get(i, j, q);
                    }
                }
            }
        }
        let reversed: Vec<_> = patches.iter().cloned().enumerate().rev().collect();
        let agg = g.aggregate(&reversed).unwrap();
        for (idx, (&a, &s)) in agg.as_slice().iter().zip(&sum).enumerate() {
            assert!((a - s / counts[idx % 36] as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn update_j_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let g = PatchGrid::new((4, 4, 2), (4, 4), (4, 4)).unwrap();
        let x = random_tensor((4, 4, 2), &mut rng);
        let l = random_tensor((4, 4, 2), &mut rng);
        let zero = Tensor3::zeros((4, 4, 2));
        let j = g.update_j(&x, &zero, &[l.clone()], &[zero.clone()], 2.0).unwrap();
        let want = (&x + &l).map(|v| v / 2.0);
        assert!((&j - &want).max_abs() < 1e-15);

        // Coverage 1 everywhere and L = X reproduces X.
        let g = PatchGrid::new((4, 6, 2), (4, 3), (3, 3)).unwrap();
        let x = random_tensor((4, 6, 2), &mut rng);
        let l = g.extract_all(&x).unwrap();
        let lam = vec![Tensor3::zeros(g.patch_dims()); g.len()];
        let zero = Tensor3::zeros((4, 6, 2));
        let j = g.update_j(&x, &zero, &l, &lam, 1.0).unwrap();
        assert!((&j - &x).max_abs() < 1e-15);
    }
}
