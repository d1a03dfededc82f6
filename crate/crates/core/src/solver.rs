//! Two-block ADMM for the patchwise low-rank + global SSTV restoration model.
//!
//! Block one updates every window's `(L, S, N)` independently; block two
//! updates the global `(J, X, U)`. `J` ties the windows to the global image,
//! `X` carries the TV term through `U = D X`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics;
use crate::patching::PatchGrid;
use crate::proximal::{soft, update_l_patch, update_n_patch, GammaPenalty};
use crate::sstv::{diff, update_u, update_x, DiffField, DiffWeights};
use crate::tensor::Tensor3;

/// Divisor applied to `lambda` when no explicit `beta` is configured.
pub const AUTO_BETA_DIVISOR: f64 = 64.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// `C` in `lambda = C / sqrt(max(m, n) * p)`.
    pub lambda_c: f64,
    pub tau: f64,
    /// Gaussian-term weight; `None` uses `lambda / 64`.
    pub beta: Option<f64>,
    pub gamma: f64,
    pub weights: DiffWeights,
    pub patch: (usize, usize),
    pub stride: (usize, usize),
    pub mu0: f64,
    pub rho: f64,
    pub mu_max: f64,
    pub eps: f64,
    pub max_iter: usize,
    /// Record per-iteration MPSNR/MSSIM when a reference is supplied.
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda_c: 35.0,
            tau: 0.03,
            beta: None,
            gamma: 0.3,
            weights: DiffWeights::default(),
            patch: (20, 20),
            stride: (10, 10),
            mu0: 1e-2,
            rho: 1.5,
            mu_max: 1e6,
            eps: 1e-6,
            max_iter: 60,
            record_trace: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda_c", self.lambda_c),
            ("tau", self.tau),
            ("gamma", self.gamma),
            ("mu0", self.mu0),
            ("mu_max", self.mu_max),
            ("eps", self.eps),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        if let Some(beta) = self.beta {
            if !(beta > 0.0 && beta.is_finite()) {
                return Err(Error::InvalidParameter(format!("beta must be > 0, got {beta}")));
            }
        }
        if !(self.rho > 1.0 && self.rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho must be > 1, got {}", self.rho)));
        }
        if self.mu0 > self.mu_max {
            return Err(Error::InvalidParameter("mu0 exceeds mu_max".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        if self.patch.0 == 0 || self.patch.1 == 0 || self.stride.0 == 0 || self.stride.1 == 0 {
            return Err(Error::InvalidParameter("patch and stride must be positive".into()));
        }
        Ok(())
    }

    /// Sparse-term weight for an image of the given dims.
    pub fn lambda(&self, dims: (usize, usize, usize)) -> f64 {
        let (m, n, p) = dims;
        self.lambda_c / ((m.max(n) * p) as f64).sqrt()
    }

    pub fn beta_for(&self, dims: (usize, usize, usize)) -> f64 {
        self.beta.unwrap_or_else(|| self.lambda(dims) / AUTO_BETA_DIVISOR)
    }

    /// Penalty after `k` completed iterations: `min(mu0 * rho^k, mu_max)`.
    pub fn mu_at(&self, k: usize) -> f64 {
        (self.mu0 * self.rho.powi(k as i32)).min(self.mu_max)
    }
}

/// Per-window iterates and multipliers.
#[derive(Debug, Clone)]
pub struct WindowState {
    pub low_rank: Tensor3,
    pub sparse: Tensor3,
    pub gaussian: Tensor3,
    pub lam_o: Tensor3,
    pub lam_l: Tensor3,
    /// Singular values of each Fourier slice of `low_rank`, for the next
    /// linearization.
    pub sigma: Vec<Vec<f64>>,
}

impl WindowState {
    fn zeros(dims: (usize, usize, usize)) -> Self {
        let z = Tensor3::zeros(dims);
        Self {
            low_rank: z.clone(),
            sparse: z.clone(),
            gaussian: z.clone(),
            lam_o: z.clone(),
            lam_l: z,
            sigma: vec![vec![0.0; dims.0.min(dims.1)]; dims.2],
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub grid: PatchGrid,
    pub observed_patches: Vec<Tensor3>,
    pub windows: Vec<WindowState>,
    /// Mean-by-coverage aggregates of the window iterates.
    pub low_rank: Tensor3,
    pub sparse: Tensor3,
    pub gaussian: Tensor3,
    pub j: Tensor3,
    pub x: Tensor3,
    pub u: DiffField,
    pub lam: DiffField,
    pub lam_x: Tensor3,
    pub weights: DiffWeights,
    pub mu: f64,
    pub iteration: usize,
}

impl SolverState {
    /// All iterates and multipliers zero, `mu = mu0`.
    pub fn new(observed: &Tensor3, cfg: &SolverConfig) -> Result<Self> {
        let grid = PatchGrid::new(observed.dims(), cfg.patch, cfg.stride)?;
        let observed_patches = grid.extract_all(observed)?;
        let dims = observed.dims();
        let windows = vec![WindowState::zeros(grid.patch_dims()); grid.len()];
        let z = Tensor3::zeros(dims);
        Ok(Self {
            grid,
            observed_patches,
            windows,
            low_rank: z.clone(),
            sparse: z.clone(),
            gaussian: z.clone(),
            j: z.clone(),
            x: z.clone(),
            u: DiffField::zeros(dims),
            lam: DiffField::zeros(dims),
            lam_x: z,
            weights: cfg.weights,
            mu: cfg.mu0,
            iteration: 0,
        })
    }
}

/// Multiplier ascent with the current `mu`:
/// `Lam_O += mu (O - L - S - N)`, `Lam_L += mu (L - J)` per window,
/// `Lam_X += mu (J - X)`, `Lam += mu (U - D X)`.
pub fn lagrangian_step(state: &mut SolverState) -> Result<()> {
    let mu = state.mu;
    let grid = &state.grid;
    let j = &state.j;
    state
        .windows
        .par_iter_mut()
        .zip(&state.observed_patches)
        .enumerate()
        .try_for_each(|(k, (w, o))| -> Result<()> {
            let mut r = o - &w.low_rank;
            r.axpy(-1.0, &w.sparse);
            r.axpy(-1.0, &w.gaussian);
            w.lam_o.axpy(mu, &r);
            let jw = grid.extract(j, k)?;
            w.lam_l.axpy(mu, &(&w.low_rank - &jw));
            Ok(())
        })?;
    state.lam_x.axpy(mu, &(&state.j - &state.x));
    let dx = diff(&state.x, state.weights);
    let mut r = state.u.clone();
    r.axpy(-1.0, &dx);
    state.lam.axpy(mu, &r);
    Ok(())
}

/// Infinity-norm feasibility errors
/// `[max_ij |O_ij - L_ij - S_ij - N_ij|, max_ij |L_ij - J_ij|, |J - X|]`
/// and whether their maximum is within `eps`.
pub fn convergence_check(state: &SolverState, eps: f64) -> Result<(bool, [f64; 3])> {
    let mut e1 = 0.0f64;
    let mut e2 = 0.0f64;
    for (k, (w, o)) in state.windows.iter().zip(&state.observed_patches).enumerate() {
        let mut r = o - &w.low_rank;
        r.axpy(-1.0, &w.sparse);
        r.axpy(-1.0, &w.gaussian);
        e1 = e1.max(r.max_abs());
        let jw = state.grid.extract(&state.j, k)?;
        e2 = e2.max((&w.low_rank - &jw).max_abs());
    }
    let e3 = (&state.j - &state.x).max_abs();
    let errors = [e1, e2, e3];
    let worst = errors.iter().copied().fold(0.0, f64::max);
    Ok((worst <= eps, errors))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub errors: [f64; 3],
    pub mpsnr: Option<f64>,
    pub mssim: Option<f64>,
}

impl TraceRow {
    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub rows: Vec<TraceRow>,
    /// False when `max_iter` was reached before the errors fell below `eps`.
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct Restoration {
    pub low_rank: Tensor3,
    pub sparse: Tensor3,
    pub gaussian: Tensor3,
    pub trace: IterationTrace,
}

/// Drives the iteration one sweep at a time.
#[derive(Debug, Clone)]
pub struct Solver {
    cfg: SolverConfig,
    penalty: GammaPenalty,
    lambda: f64,
    beta: f64,
    state: SolverState,
}

impl Solver {
    pub fn new(observed: &Tensor3, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let dims = observed.dims();
        Ok(Self {
            cfg: cfg.clone(),
            penalty: GammaPenalty::new(cfg.gamma)?,
            lambda: cfg.lambda(dims),
            beta: cfg.beta_for(dims),
            state: SolverState::new(observed, cfg)?,
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// One full sweep: windows `(L, S, N)`, aggregation, `J`, `X`, `U`,
    /// multipliers, then the penalty increase. Returns the feasibility errors.
    pub fn step(&mut self) -> Result<[f64; 3]> {
        let mu = self.state.mu;
        let (lambda, beta, pen) = (self.lambda, self.beta, self.penalty);
        let st = &mut self.state;

        let grid = &st.grid;
        let j = &st.j;
        st.windows
            .par_iter_mut()
            .zip(&st.observed_patches)
            .enumerate()
            .try_for_each(|(k, (w, o))| -> Result<()> {
                let jw = grid.extract(j, k)?;
                // Prox center of the two quadratic couplings on L.
                let mut center = o + &jw;
                center.axpy(-1.0, &w.sparse);
                center.axpy(-1.0, &w.gaussian);
                center.axpy(1.0 / mu, &w.lam_o);
                center.axpy(-1.0 / mu, &w.lam_l);
                let center = &center * 0.5;
                let (l, sigma) = update_l_patch(&center, &w.sigma, mu, pen)?;

                let mut s_center = o - &l;
                s_center.axpy(-1.0, &w.gaussian);
                s_center.axpy(1.0 / mu, &w.lam_o);
                let s = soft(&s_center, lambda / mu);
                let n = update_n_patch(o, &l, &s, &w.lam_o, mu, beta);

                w.low_rank = l;
                w.sparse = s;
                w.gaussian = n;
                w.sigma = sigma;
                Ok(())
            })?;

        let gather = |f: fn(&WindowState) -> &Tensor3| -> Vec<Tensor3> {
            st.windows.iter().map(|w| f(w).clone()).collect()
        };
        let l_patches = gather(|w| &w.low_rank);
        let lam_l_patches = gather(|w| &w.lam_l);
        st.low_rank = st.grid.aggregate_ordered(&l_patches)?;
        st.sparse = st.grid.aggregate_ordered(&gather(|w| &w.sparse))?;
        st.gaussian = st.grid.aggregate_ordered(&gather(|w| &w.gaussian))?;

        st.j = st.grid.update_j(&st.x, &st.lam_x, &l_patches, &lam_l_patches, mu)?;
        st.x = update_x(&st.j, &st.lam_x, &st.u, &st.lam, st.weights, mu)?;
        st.u = update_u(&st.x, &st.lam, st.weights, self.cfg.tau, mu);

        lagrangian_step(st)?;
        let (_, errors) = convergence_check(st, self.cfg.eps)?;
        st.iteration += 1;
        st.mu = self.cfg.mu_at(st.iteration);
        Ok(errors)
    }

    /// Iterates until the errors fall below `eps` or `max_iter` sweeps.
    pub fn run(mut self, reference: Option<&Tensor3>) -> Result<Restoration> {
        if let Some(r) = reference {
            if r.dims() != self.state.grid.dims() {
                return Err(Error::DimensionMismatch {
                    expected: self.state.grid.dims(),
                    found: r.dims(),
                });
            }
        }
        let mut trace = IterationTrace::default();
        for _ in 0..self.cfg.max_iter {
            let errors = self.step()?;
            let (mpsnr, mssim) = match reference {
                Some(r) if self.cfg.record_trace => (
                    Some(metrics::mpsnr(&self.state.low_rank, r)?),
                    metrics::mssim(&self.state.low_rank, r).ok(),
                ),
                _ => (None, None),
            };
            let row = TraceRow {
                iteration: self.state.iteration,
                errors,
                mpsnr,
                mssim,
            };
            trace.rows.push(row);
            if row.max_error() <= self.cfg.eps {
                trace.converged = true;
                break;
            }
        }
        let st = self.state;
        Ok(Restoration {
            low_rank: st.low_rank,
            sparse: st.sparse,
            gaussian: st.gaussian,
            trace,
        })
    }
}

/// Restores `observed` (values expected in `[0, 1]`). Reaching `max_iter`
/// is not an error: the last iterate is returned and the trace records
/// `converged = false`.
pub fn denoise(
    observed: &Tensor3,
    cfg: &SolverConfig,
    reference: Option<&Tensor3>,
) -> Result<Restoration> {
    Solver::new(observed, cfg)?.run(reference)
}
