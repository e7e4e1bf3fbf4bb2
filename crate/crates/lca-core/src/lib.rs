//! Sparse approximation with a locally competitive network.
//!
//! The core of this crate is a continuous-time dynamical system whose
//! outputs solve sparsity-penalized least-squares problems such as basis
//! pursuit denoising: internal node states follow
//!
//!   tau * du/dt = -u - (Phi^T Phi - I) T_lambda(u) + Phi^T y,
//!
//! and the thresholded outputs a = T_lambda(u) descend the objective
//! 0.5*||y - Phi a||^2 + lambda * sum C(a_n). Alongside the simulator the
//! crate ships the instruments needed to verify the convergence theory at
//! desk scale: critical-point slack, switch counting, restricted-isometry
//! constants of active submatrices, exponential rate bounds, and the
//! error-variable properties behind them, plus an ISTA/FISTA reference
//! solver for cross-checking solutions.
//!
//! Modules:
//! - [`model`]: dictionaries, problems, and seeded synthetic instances
//! - [`activation`]: thresholding functions and their admissibility checks
//! - [`dynamics`]: fixed-step integration with switch-event recording
//! - [`diagnostics`]: the verification instruments
//! - [`baseline`]: ISTA/FISTA digital reference solver

pub mod activation;
pub mod baseline;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod model;

pub use activation::{validate_conditions, ActivationSpec, ConditionReport};
pub use baseline::{ista_solve, spectral_norm_estimate, IstaConfig, IstaResult};
pub use diagnostics::{
    count_switches, critical_point_slack, decay_curve, delta_over_trajectory, estimate_delta,
    fixed_point_residual, lemma1_check, map_output_to_state, objective, rate_bound,
    CriticalPointReport, ErrorVariables, Lemma1Report, RateEstimate,
};
pub use dynamics::{
    active_set, rhs_partitioned, simulate, step, udot, LcaState, Method, SolverConfig,
    SwitchEvent, Trajectory, TrajectorySample,
};
pub use error::{Error, Result};
pub use model::{
    canonical_sinusoid_dictionary, generate_instance, generate_instance_with, normalize_columns,
    Dictionary, GroundTruth, Problem,
};
