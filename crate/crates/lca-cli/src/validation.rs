//! The `validate` subcommand: a fast invariant suite over the library.
//!
//! Checks the activation admissibility conditions, the four error-variable
//! properties on randomized inputs, objective descent along a sample
//! trajectory, agreement between the network and the reference solver, and
//! the partitioned-dynamics identity.

use lca_core::{
    critical_point_slack, generate_instance, ista_solve, lemma1_check, rhs_partitioned, simulate,
    udot, validate_conditions, ActivationSpec, IstaConfig, SolverConfig,
};
use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Runs the whole suite with the library's stock activations.
pub fn run_checks(quick: bool) -> Vec<CheckResult> {
    let soft = ActivationSpec::soft_threshold(0.025).expect("lambda > 0");
    let saturating = ActivationSpec::saturating(0.025).expect("lambda > 0");
    run_checks_with_specs(&soft, &saturating, quick)
}

/// Same suite with caller-supplied activations, so a misdeclared spec (for
/// example an understated alpha) is caught by the randomized properties.
pub fn run_checks_with_specs(
    soft: &ActivationSpec,
    generic: &ActivationSpec,
    quick: bool,
) -> Vec<CheckResult> {
    let trials = if quick { 1_000 } else { 10_000 };
    let mut results = Vec::new();

    results.push(condition_check("activation conditions (soft threshold)", soft));
    results.push(condition_check("activation conditions (saturating)", generic));
    results.push(lemma1_c("lemma-1 properties (soft threshold)", soft, trials));
    results.push(lemma1_c("lemma-1 properties (saturating)", generic, trials));
    results.push(monotone_objective_check(soft));
    results.push(agreement_check(if quick { 2 } else { 5 }));
    results.push(partitioned_identity_check());
    results
}

fn condition_check(name: &'static str, spec: &ActivationSpec) -> CheckResult {
    let lambda = spec.lambda();
    let report = validate_conditions(spec, lambda, 40.0 * lambda, 4001);
    CheckResult {
        name,
        passed: report.all_ok(),
        detail: format!(
            "odd={} boundary={} monotone={} dominated={} worst={:.2e}",
            report.odd_symmetry_ok,
            report.boundary_zero_ok,
            report.monotone_ok,
            report.dominated_ok,
            report.worst_violation
        ),
    }
}

fn lemma1_c(name: &'static str, spec: &ActivationSpec, trials: usize) -> CheckResult {
    let failures = lemma1_trial_failures(spec, trials, 20_2020);
    CheckResult {
        name,
        passed: failures == 0,
        detail: format!("{failures}/{trials} randomized trials violated a property"),
    }
}

/// Randomized error-variable trials; returns how many violated any of the
/// four properties. Scales are mixed around the threshold so both branches
/// of the activation are exercised.
pub fn lemma1_trial_failures(spec: &ActivationSpec, trials: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lambda = spec.lambda();
    let mut failures = 0;
    for trial in 0..trials {
        let dim = if trial % 2 == 0 { 1 } else { 8 };
        let scale = [0.1, 1.0, 10.0][trial % 3] * lambda;
        let u_star = Array1::from_shape_fn(dim, |_| scale * 4.0 * (rng.random::<f64>() - 0.5));
        let u_tilde = Array1::from_shape_fn(dim, |_| scale * 4.0 * (rng.random::<f64>() - 0.5));
        if !lemma1_check(spec, &u_star, &u_tilde).all_ok() {
            failures += 1;
        }
    }
    failures
}

fn monotone_objective_check(spec: &ActivationSpec) -> CheckResult {
    let name = "objective non-increasing along trajectory";
    let (problem, _) = match generate_instance(7, 32, 64, 3, 0.0062, spec.lambda()) {
        Ok(v) => v,
        Err(e) => {
            return CheckResult {
                name,
                passed: false,
                detail: e.to_string(),
            }
        }
    };
    let mut config = SolverConfig::for_tau(0.01);
    config.residual_tol = 1e-8;
    let traj = match simulate(&problem, spec, &config, Array1::zeros(64)) {
        Ok(t) => t,
        Err(e) => {
            return CheckResult {
                name,
                passed: false,
                detail: e.to_string(),
            }
        }
    };
    let mut worst = 0.0f64;
    let mut ok = traj.converged;
    for w in traj.samples.windows(2) {
        let slack = 1e-8 * (1.0 + w[0].objective.abs());
        let rise = w[1].objective - w[0].objective;
        if rise > slack {
            ok = false;
        }
        worst = worst.max(rise);
    }
    CheckResult {
        name,
        passed: ok,
        detail: format!("converged={} worst rise={:.2e}", traj.converged, worst),
    }
}

fn agreement_check(seeds: u64) -> CheckResult {
    let name = "network matches reference solver";
    let spec = match ActivationSpec::soft_threshold(0.025) {
        Ok(s) => s,
        Err(e) => {
            return CheckResult {
                name,
                passed: false,
                detail: e.to_string(),
            }
        }
    };
    let mut worst = 0.0f64;
    for seed in 0..seeds {
        let outcome = (|| -> anyhow::Result<f64> {
            let (problem, _) = generate_instance(seed, 32, 64, 3, 0.0062, 0.025)?;
            let mut config = SolverConfig::for_tau(0.01);
            config.residual_tol = 1e-8;
            config.record_stride = usize::MAX;
            let traj = simulate(&problem, &spec, &config, Array1::zeros(64))?;
            let ista = ista_solve(&problem, &IstaConfig::default())?;
            let slack = critical_point_slack(&problem, &spec, traj.final_output())?;
            anyhow::ensure!(traj.converged, "network did not converge");
            anyhow::ensure!(slack.active_slack <= 1e-4, "active slack {}", slack.active_slack);
            Ok(traj
                .final_output()
                .iter()
                .zip(ista.a.iter())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
        })();
        match outcome {
            Ok(d) => worst = worst.max(d),
            Err(e) => {
                return CheckResult {
                    name,
                    passed: false,
                    detail: format!("seed {seed}: {e}"),
                }
            }
        }
    }
    CheckResult {
        name,
        passed: worst <= 1e-3,
        detail: format!("worst |a_lca - a_ista|_inf = {worst:.2e} over {seeds} seeds"),
    }
}

fn partitioned_identity_check() -> CheckResult {
    let name = "partitioned dynamics identity";
    let outcome = (|| -> anyhow::Result<f64> {
        let (problem, _) = generate_instance(5, 4, 8, 2, 0.01, 0.1)?;
        let spec = ActivationSpec::soft_threshold(0.1)?;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let tau = 0.01;
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let u = Array1::from_shape_fn(8, |_| 0.5 * (rng.random::<f64>() - 0.5));
            let part = rhs_partitioned(&problem, &spec, &u, tau);
            let full = udot(&problem, &spec, &u, tau);
            let jac = spec.jacobian_diag(&u);
            for (k, &j) in part.active.iter().enumerate() {
                worst = worst.max((part.a_dot_active[k] - jac[j] * full[j]).abs());
            }
            for (k, &j) in part.inactive.iter().enumerate() {
                worst = worst.max((part.u_dot_inactive[k] - full[j]).abs());
            }
        }
        Ok(worst)
    })();
    match outcome {
        Ok(worst) => CheckResult {
            name,
            passed: worst <= 1e-12,
            detail: format!("worst deviation {worst:.2e}"),
        },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let results = run_checks(true);
        for r in &results {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }

    #[test]
    fn understated_alpha_fails_the_lemma_check() {
        // soft-threshold formulas but alpha declared as 0.5
        let lambda = 0.025;
        let bad = ActivationSpec::generic(
            lambda,
            move |u: f64| u - lambda * u.signum(),
            |_| 1.0,
            0.5,
            None,
        )
        .unwrap();
        let soft = ActivationSpec::soft_threshold(lambda).unwrap();
        let results = run_checks_with_specs(&soft, &bad, true);
        let lemma = results
            .iter()
            .find(|r| r.name == "lemma-1 properties (saturating)")
            .unwrap();
        assert!(!lemma.passed, "understated alpha must be caught");
        assert!(results.iter().any(|r| !r.passed));
    }
}
