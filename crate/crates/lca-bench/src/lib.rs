//! Shared fixtures for the benchmark targets.

use lca_core::{generate_instance, ActivationSpec, GroundTruth, Problem, SolverConfig};

/// A canonical-dictionary instance plus matching solver setup.
pub fn fixture(m: usize, s: usize) -> (Problem, GroundTruth, ActivationSpec, SolverConfig) {
    let lambda = 0.025;
    let (problem, truth) =
        generate_instance(1, m, 2 * m, s, 0.0062, lambda).expect("valid benchmark instance");
    let spec = ActivationSpec::soft_threshold(lambda).expect("lambda > 0");
    let mut config = SolverConfig::for_tau(0.01);
    config.residual_tol = 1e-8;
    config.max_time = 3.0;
    config.record_stride = usize::MAX;
    (problem, truth, spec, config)
}
