//! Coarse-grained (fuzzy) correlations of macroscopic entangled states and
//! the Bell and steering witnesses built from them.
//!
//! The crate is organized bottom-up:
//!
//! - [`kernel`]: discrete and continuous Gaussian smearing kernels;
//! - [`correlation`]: fuzzy correlators for pure and Werner states;
//! - [`witness`]: `m`-setting Bell and linear steering witnesses;
//! - [`optimizer`]: deterministic multi-start maximization over angles;
//! - [`transition`]: bisection for quantum-to-classical transition points;
//! - [`cli`]: the `fuzzy-witness` command-line front end.

pub mod cli;
pub mod correlation;
pub mod error;
pub mod kernel;
pub mod optimizer;
pub mod transition;
pub mod witness;

pub use correlation::{
    corr_full, corr_reference, corr_reference_quadrature, corr_resolution, corr_werner_full,
    corr_werner_resolution, q_func, r_func, CoarseningParams, Correlator, FuzzyCorrelator, Regime,
    Scaled, StateSpec,
};
pub use error::{Error, Result};
pub use kernel::{distinguishability, zeta, DiscreteKernel, ReferenceKernel};
pub use optimizer::{maximize, maximize_profile, maximize_with_starts, OptResult, OptimizerConfig};
pub use transition::{BoundaryCurve, SearchParameter, TransitionPoint, TransitionSolver};
pub use witness::{AngleAssignment, WitnessKind, WitnessSpec};
