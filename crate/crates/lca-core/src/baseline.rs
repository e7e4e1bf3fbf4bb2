//! Discrete-time reference solver for the l1 problem.
//!
//! Iterative soft thresholding (ISTA), optionally with FISTA acceleration,
//! serves as the independent digital oracle the network solutions are
//! compared against. The proximal step mirrors the soft-threshold
//! activation, so the two solvers target exactly the same objective.

use ndarray::Array1;

use crate::activation::ActivationSpec;
use crate::diagnostics::objective;
use crate::error::{Error, Result};
use crate::model::{Dictionary, Problem};

/// Parameters for [`ista_solve`].
#[derive(Clone, Copy, Debug)]
pub struct IstaConfig {
    /// Gradient step eta; `None` picks 0.9 / sigma_max^2. Must not exceed
    /// 1 / sigma_max^2 (power-iteration estimate) for guaranteed descent.
    pub step_size: Option<f64>,
    pub max_iters: usize,
    /// Stop once ||a_{k+1} - a_k||_inf < tol.
    pub tol: f64,
    /// FISTA momentum; the objective history is then not necessarily monotone.
    pub accelerated: bool,
}

impl Default for IstaConfig {
    fn default() -> Self {
        IstaConfig {
            step_size: None,
            max_iters: 50_000,
            tol: 1e-10,
            accelerated: false,
        }
    }
}

/// Solver output: final iterate, update count, and the objective at every
/// iterate (starting value included).
#[derive(Clone, Debug)]
pub struct IstaResult {
    pub a: Array1<f64>,
    pub iters: usize,
    pub objective_history: Vec<f64>,
    pub converged: bool,
}

/// Largest squared singular value of the dictionary, by power iteration on
/// Phi^T Phi until the Rayleigh quotient changes by less than 1e-6
/// relatively.
pub fn spectral_norm_estimate(dictionary: &Dictionary) -> f64 {
    let n = dictionary.n();
    // deterministic start, slightly tilted so it is not orthogonal to the
    // principal eigenvector
    let mut v = Array1::from_shape_fn(n, |i| 1.0 + 0.01 * ((i % 7) as f64));
    let norm = v.dot(&v).sqrt();
    v /= norm;

    let mut est = 0.0;
    for _ in 0..10_000 {
        let w = dictionary.correlate(&dictionary.synthesize(&v));
        let new_est = v.dot(&w);
        let wnorm = w.dot(&w).sqrt();
        if wnorm < 1e-300 {
            return 0.0;
        }
        v = w / wnorm;
        if (new_est - est).abs() <= 1e-6 * new_est.abs().max(1e-300) {
            return new_est;
        }
        est = new_est;
    }
    est
}

/// Proximal-gradient iteration a <- T_{lambda*eta}(a + eta * Phi^T (y - Phi a))
/// from a = 0.
pub fn ista_solve(problem: &Problem, config: &IstaConfig) -> Result<IstaResult> {
    if config.max_iters == 0 {
        return Err(Error::invalid("max_iters", "must be at least 1"));
    }
    if !(config.tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }

    let sigma_sq = spectral_norm_estimate(problem.dictionary());
    let bound = 1.0 / sigma_sq;
    let eta = config.step_size.unwrap_or(0.9 * bound);
    // small slack so eta = 1/sigma_max^2 itself (exact for orthonormal
    // dictionaries) passes the power-iteration estimate
    if !(eta > 0.0) || eta > bound * (1.0 + 1e-6) {
        return Err(Error::StepTooLarge { step: eta, bound });
    }

    let lambda = problem.lambda();
    let spec = ActivationSpec::soft_threshold(lambda)?;
    let prox = ActivationSpec::soft_threshold(lambda * eta)?;

    let mut a: Array1<f64> = Array1::zeros(problem.n());
    let mut momentum = a.clone(); // FISTA extrapolation point
    let mut t_k = 1.0f64;

    let mut history = vec![objective(problem, &spec, &a)?];
    let mut converged = false;
    let mut iters = 0;

    for _ in 0..config.max_iters {
        let point = if config.accelerated { &momentum } else { &a };
        let residual = problem.y() - &problem.dictionary().synthesize(point);
        let grad_step = point + &(problem.dictionary().correlate(&residual) * eta);
        let a_next = prox.apply(&grad_step);
        iters += 1;

        let delta = a_next
            .iter()
            .zip(a.iter())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));

        if config.accelerated {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_k * t_k).sqrt());
            momentum = &a_next + &((&a_next - &a) * ((t_k - 1.0) / t_next));
            t_k = t_next;
        }
        a = a_next;
        history.push(objective(problem, &spec, &a)?);

        if delta < config.tol {
            converged = true;
            break;
        }
    }

    Ok(IstaResult {
        a,
        iters,
        objective_history: history,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::critical_point_slack;
    use crate::model::{canonical_sinusoid_dictionary, generate_instance, normalize_columns};
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array2};

    #[test]
    fn spectral_norm_orthonormal_is_one() {
        let d = normalize_columns(Array2::eye(5)).unwrap();
        assert_abs_diff_eq!(spectral_norm_estimate(&d), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn spectral_norm_union_of_bases_is_two() {
        let d = canonical_sinusoid_dictionary(64).unwrap();
        assert_abs_diff_eq!(spectral_norm_estimate(&d), 2.0, epsilon = 1e-4);
    }

    #[test]
    fn spectral_norm_identical_pair_is_two() {
        let mat = Array2::from_shape_fn((3, 2), |(i, _)| if i == 2 { 1.0 } else { 0.0 });
        let d = normalize_columns(mat).unwrap();
        assert_abs_diff_eq!(spectral_norm_estimate(&d), 2.0, epsilon = 1e-6);
    }

    #[test]
    fn orthonormal_solved_in_one_proximal_step() {
        let d = normalize_columns(Array2::eye(4)).unwrap();
        let p = Problem::new(d, array![1.0, -0.4, 0.05, 0.0], 0.1).unwrap();
        let config = IstaConfig {
            step_size: Some(1.0),
            ..IstaConfig::default()
        };
        let result = ista_solve(&p, &config).unwrap();
        assert!(result.converged);
        assert!(result.iters <= 2, "iters = {}", result.iters);
        let spec = ActivationSpec::soft_threshold(0.1).unwrap();
        let expected = p.driving_input().mapv(|v| spec.apply_scalar(v));
        for (a, b) in result.a.iter().zip(expected.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_signal_stays_at_zero() {
        let d = canonical_sinusoid_dictionary(8).unwrap();
        let p = Problem::new(d, Array1::zeros(8), 0.1).unwrap();
        let result = ista_solve(&p, &IstaConfig::default()).unwrap();
        assert!(result.converged);
        assert!(result.a.iter().all(|&v| v == 0.0));
        assert_eq!(result.iters, 1);
    }

    #[test]
    fn step_size_invariant_enforced() {
        let d = canonical_sinusoid_dictionary(8).unwrap(); // sigma_max^2 = 2
        let p = Problem::new(d, Array1::zeros(8), 0.1).unwrap();
        let config = IstaConfig {
            step_size: Some(0.9),
            ..IstaConfig::default()
        };
        match ista_solve(&p, &config) {
            Err(Error::StepTooLarge { bound, .. }) => {
                assert_abs_diff_eq!(bound, 0.5, epsilon = 1e-4);
            }
            other => panic!("expected StepTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn objective_history_nonincreasing_without_acceleration() {
        let (problem, _) = generate_instance(31, 32, 64, 3, 0.0062, 0.025).unwrap();
        let result = ista_solve(&problem, &IstaConfig::default()).unwrap();
        assert!(result.converged);
        for w in result.objective_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "objective rose: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn fista_reaches_the_same_solution() {
        let (problem, _) = generate_instance(31, 32, 64, 3, 0.0062, 0.025).unwrap();
        let plain = ista_solve(&problem, &IstaConfig::default()).unwrap();
        let fast = ista_solve(
            &problem,
            &IstaConfig {
                accelerated: true,
                ..IstaConfig::default()
            },
        )
        .unwrap();
        assert!(fast.converged);
        for (a, b) in plain.a.iter().zip(fast.a.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-7);
        }
    }

    #[test]
    fn solution_satisfies_optimality_within_ten_tolerances() {
        let spec = ActivationSpec::soft_threshold(0.025).unwrap();
        let config = IstaConfig::default();
        for seed in 0..5u64 {
            let (problem, _) = generate_instance(seed, 32, 64, 3, 0.0062, 0.025).unwrap();
            let result = ista_solve(&problem, &config).unwrap();
            assert!(result.converged);
            let report = critical_point_slack(&problem, &spec, &result.a).unwrap();
            assert!(report.active_slack <= 10.0 * config.tol, "{report:?}");
            assert!(report.inactive_slack <= 10.0 * config.tol, "{report:?}");
        }
    }
}
