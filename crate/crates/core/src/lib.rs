//! Mixed-noise hyperspectral image restoration.
//!
//! The restoration model splits an observed cube `O` into a clean part `L`,
//! a sparse part `S` (impulse, stripes, deadlines) and a dense Gaussian part
//! `N`. `L` is recovered patch by patch under a nonconvex tensor rank
//! surrogate (exponential penalty on the singular values of the spectral
//! Fourier slices), and the patches are tied together by a global weighted
//! spatial-spectral total variation term. The whole problem is solved with
//! a two-block ADMM; see [`solver::denoise`].
//!
//! Besides the solver the crate carries the supporting pieces needed for
//! simulation studies: seeded noise generators ([`noise`]), quality indices
//! ([`metrics`]), and a small binary cube format plus configuration files
//! ([`io`]).

pub mod error;
pub mod fft;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod patching;
pub mod proximal;
pub mod solver;
pub mod sstv;
pub mod synthetic;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{CTensor3, Tensor3};
