//! Verification instruments for the convergence theory.
//!
//! Objective evaluation, critical-point (subgradient) slack for the l1
//! cost, the output-to-state fixed-point map, switch counting, the
//! restricted-isometry constant delta of active submatrices, the
//! exponential rate bound c = (1 - alpha*delta)/tau, normalized decay
//! curves, and the four error-variable properties the rate proof rests on.

use std::collections::HashSet;
use std::io::{self, Write};

use ndarray::Array1;
use serde::Serialize;

use crate::activation::ActivationSpec;
use crate::dynamics::{udot, SwitchEvent, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigenvalues;
use crate::model::{Dictionary, Problem};

// =========================================================================
// Objective
// =========================================================================

/// V(a) = 0.5*||y - Phi a||^2 + lambda * sum_n C(a_n).
///
/// For the soft threshold C(a_n) = |a_n|. For generic activations the
/// penalty is recovered from the activation itself: lambda*C(a_n) is the
/// integral of (f^{-1}(x) - x) from 0 to |a_n|, evaluated by adaptive
/// trapezoid quadrature to 1e-9.
pub fn objective(problem: &Problem, spec: &ActivationSpec, a: &Array1<f64>) -> Result<f64> {
    let residual = problem.y() - &problem.dictionary().synthesize(a);
    let fidelity = 0.5 * residual.dot(&residual);

    let mut penalty = 0.0;
    if spec.is_soft_threshold() {
        penalty = problem.lambda() * a.iter().map(|v| v.abs()).sum::<f64>();
    } else {
        for &an in a.iter() {
            if an != 0.0 {
                penalty += penalty_integral(spec, an.abs())?;
            }
        }
    }
    Ok(fidelity + penalty)
}

/// Integral of (f^{-1}(x) - x) over [0, hi]; equals lambda * C(hi).
fn penalty_integral(spec: &ActivationSpec, hi: f64) -> Result<f64> {
    let lambda = spec.lambda();
    let g = |x: f64| -> Result<f64> {
        if x == 0.0 {
            // f(lambda) = 0, so the inverse tends to lambda at the origin
            Ok(lambda)
        } else {
            Ok(spec.invert(x)? - x)
        }
    };
    adaptive_trapezoid(&g, 0.0, hi, g(0.0)?, g(hi)?, 1e-9, 40)
}

fn adaptive_trapezoid(
    g: &dyn Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
    ga: f64,
    gb: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let gm = g(mid)?;
    let coarse = 0.5 * (b - a) * (ga + gb);
    let fine = 0.25 * (b - a) * (ga + 2.0 * gm + gb);
    if depth == 0 || (fine - coarse).abs() <= 3.0 * tol {
        return Ok(fine);
    }
    let left = adaptive_trapezoid(g, a, mid, ga, gm, 0.5 * tol, depth - 1)?;
    let right = adaptive_trapezoid(g, mid, b, gm, gb, 0.5 * tol, depth - 1)?;
    Ok(left + right)
}

// =========================================================================
// Critical points and fixed points
// =========================================================================

/// Subgradient slack of the l1 objective at an output `a`.
///
/// With rho = Phi^T (y - Phi a): on the support the optimality condition is
/// rho_n = lambda*sign(a_n); off the support it is |rho_n| <= lambda. Both
/// slacks vanish exactly at a critical point.
#[derive(Clone, Debug, Serialize)]
pub struct CriticalPointReport {
    pub active_slack: f64,
    pub inactive_slack: f64,
    pub active_set: Vec<usize>,
}

pub fn critical_point_slack(
    problem: &Problem,
    spec: &ActivationSpec,
    a: &Array1<f64>,
) -> Result<CriticalPointReport> {
    if !spec.is_soft_threshold() {
        return Err(Error::UnsupportedCost);
    }
    if a.len() != problem.n() {
        return Err(Error::DimensionMismatch {
            context: "output a",
            expected: problem.n(),
            actual: a.len(),
        });
    }
    let lambda = problem.lambda();
    let residual = problem.y() - &problem.dictionary().synthesize(a);
    let rho = problem.dictionary().correlate(&residual);

    let mut active_slack = 0.0f64;
    let mut inactive_max = 0.0f64;
    let mut active_set = Vec::new();
    for (n, &an) in a.iter().enumerate() {
        if an != 0.0 {
            active_set.push(n);
            active_slack = active_slack.max((rho[n] - lambda * an.signum()).abs());
        } else {
            inactive_max = inactive_max.max(rho[n].abs());
        }
    }
    let inactive_slack = (inactive_max - lambda).max(0.0);
    Ok(CriticalPointReport {
        active_slack,
        inactive_slack,
        active_set,
    })
}

/// Magnitude of the unscaled right-hand side `-u - (Phi^T Phi - I) a + Phi^T y`
/// in the infinity norm; zero exactly at a fixed point.
pub fn fixed_point_residual(problem: &Problem, spec: &ActivationSpec, u: &Array1<f64>) -> f64 {
    let rhs = udot(problem, spec, u, 1.0);
    rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// The state a fixed output corresponds to: `u* = a* - Phi^T Phi a* + Phi^T y`.
pub fn map_output_to_state(problem: &Problem, a_star: &Array1<f64>) -> Array1<f64> {
    let w = problem.dictionary().synthesize(a_star);
    let mut u = problem.driving_input();
    u -= &problem.dictionary().correlate(&w);
    u += a_star;
    u
}

/// Number of recorded switch events, with the events themselves.
pub fn count_switches(trajectory: &Trajectory) -> (usize, &[SwitchEvent]) {
    (trajectory.switch_events.len(), &trajectory.switch_events)
}

// =========================================================================
// Restricted-isometry constant and rate bound
// =========================================================================

/// delta(S) = max(sigma_max^2 - 1, 1 - sigma_min^2) over the atoms in `support`,
/// from the eigenvalues of the Gram matrix Phi_S^T Phi_S.
pub fn estimate_delta(dictionary: &Dictionary, support: &[usize]) -> Result<f64> {
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut sorted: Vec<usize> = support.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if let Some(&j) = sorted.iter().find(|&&j| j >= dictionary.n()) {
        return Err(Error::invalid(
            "support",
            format!("index {j} out of range for dictionary with n = {}", dictionary.n()),
        ));
    }
    let sub = dictionary.submatrix(&sorted);
    let gram = sub.t().dot(&sub);
    let eigs = symmetric_eigenvalues(&gram);
    let min = eigs.first().copied().unwrap_or(1.0).max(0.0);
    let max = eigs.last().copied().unwrap_or(1.0);
    Ok((max - 1.0).max(1.0 - min).max(0.0))
}

/// delta on the final support, and the maximum of delta over every visited
/// active set unioned with that support.
///
/// The visited sets are reconstructed exactly from the first sample and the
/// recorded switch events, so the result does not depend on the record
/// stride.
pub fn delta_over_trajectory(
    dictionary: &Dictionary,
    trajectory: &Trajectory,
    gamma_star: &[usize],
) -> Result<(f64, f64)> {
    let delta_final = estimate_delta(dictionary, gamma_star)?;

    let first = trajectory
        .samples
        .first()
        .ok_or_else(|| Error::invalid("trajectory", "must contain at least one sample"))?;
    let mut gamma: Vec<usize> = first
        .a
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(i, _)| i)
        .collect();

    let star: Vec<usize> = {
        let mut s = gamma_star.to_vec();
        s.sort_unstable();
        s.dedup();
        s
    };

    let union_with_star = |gamma: &[usize]| -> Vec<usize> {
        let mut u: Vec<usize> = gamma.iter().chain(star.iter()).copied().collect();
        u.sort_unstable();
        u.dedup();
        u
    };

    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut delta_max = 0.0f64;
    let mut visit = |set: Vec<usize>, delta_max: &mut f64| -> Result<()> {
        if !set.is_empty() && seen.insert(set.clone()) {
            *delta_max = delta_max.max(estimate_delta(dictionary, &set)?);
        }
        Ok(())
    };

    visit(union_with_star(&gamma), &mut delta_max)?;
    for event in &trajectory.switch_events {
        for &j in &event.entered {
            if let Err(pos) = gamma.binary_search(&j) {
                gamma.insert(pos, j);
            }
        }
        for &j in &event.left {
            if let Ok(pos) = gamma.binary_search(&j) {
                gamma.remove(pos);
            }
        }
        visit(union_with_star(&gamma), &mut delta_max)?;
    }

    Ok((delta_final, delta_max.max(delta_final)))
}

/// The convergence-speed bundle: speed c = (1 - alpha*delta)/tau, meaningful
/// whenever alpha*delta < 1.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RateEstimate {
    pub alpha: f64,
    pub delta: f64,
    pub tau: f64,
    pub speed: f64,
    pub valid: bool,
}

pub fn rate_bound(alpha: f64, delta: f64, tau: f64) -> RateEstimate {
    let product = alpha * delta;
    RateEstimate {
        alpha,
        delta,
        tau,
        speed: (1.0 - product) / tau,
        valid: product < 1.0,
    }
}

// =========================================================================
// Decay curves
// =========================================================================

/// Normalized state-error curve: (t, ||u(t) - u*|| / ||u(0) - u*||), so the
/// first point is exactly 1.
pub fn decay_curve(trajectory: &Trajectory, u_star: &Array1<f64>) -> Result<Vec<(f64, f64)>> {
    let first = trajectory
        .samples
        .first()
        .ok_or_else(|| Error::invalid("trajectory", "must contain at least one sample"))?;
    if first.u.len() != u_star.len() {
        return Err(Error::DimensionMismatch {
            context: "fixed point u_star",
            expected: first.u.len(),
            actual: u_star.len(),
        });
    }
    let diff0 = &first.u - u_star;
    let d0 = diff0.dot(&diff0).sqrt();
    if d0 < 1e-14 {
        return Err(Error::DegenerateStart { norm: d0 });
    }
    Ok(trajectory
        .samples
        .iter()
        .map(|s| {
            let diff = &s.u - u_star;
            (s.t, diff.dot(&diff).sqrt() / d0)
        })
        .collect())
}

/// Least-squares slope of ln(value) against t, restricted to points with
/// t >= t_min and value >= floor. None when fewer than two points qualify.
pub fn fit_log_slope(curve: &[(f64, f64)], t_min: f64, floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .filter(|(t, v)| *t >= t_min && *v >= floor && *v > 0.0)
        .map(|&(t, v)| (t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let st: f64 = pts.iter().map(|(t, _)| t).sum();
    let sv: f64 = pts.iter().map(|(_, v)| v).sum();
    let stt: f64 = pts.iter().map(|(t, _)| t * t).sum();
    let stv: f64 = pts.iter().map(|(t, v)| t * v).sum();
    let denom = n * stt - st * st;
    if denom.abs() < 1e-300 {
        return None;
    }
    Some((n * stv - st * sv) / denom)
}

/// CSV export of a decay curve and the two exponential bounds
/// exp(-speed_final * t) and exp(-speed_max * t).
pub fn write_decay_csv<W: Write>(
    w: &mut W,
    curve: &[(f64, f64)],
    speed_final: f64,
    speed_max: f64,
) -> io::Result<()> {
    writeln!(w, "t,normalized_error,bound_final,bound_max")?;
    for &(t, v) in curve {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            t,
            v,
            (-speed_final * t).exp(),
            (-speed_max * t).exp()
        )?;
    }
    Ok(())
}

// =========================================================================
// Error variables and their four properties
// =========================================================================

/// Deviations from a fixed point: u_tilde = u - u*, a_tilde = T(u) - T(u*).
#[derive(Clone, Debug)]
pub struct ErrorVariables {
    pub u_tilde: Array1<f64>,
    pub a_tilde: Array1<f64>,
}

impl ErrorVariables {
    pub fn new(spec: &ActivationSpec, u_star: &Array1<f64>, u: &Array1<f64>) -> Self {
        ErrorVariables {
            u_tilde: u - u_star,
            a_tilde: &spec.apply(u) - &spec.apply(u_star),
        }
    }
}

/// Which of the four error-variable properties hold for a given pair.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Lemma1Report {
    /// (i) a_tilde_n is zero or shares the sign of u_tilde_n
    pub sign_consistent: bool,
    /// (ii) |a_tilde_n| <= alpha |u_tilde_n|
    pub magnitude_bounded: bool,
    /// (iii) a~^T a~ <= alpha u~^T a~ <= alpha^2 u~^T u~, componentwise (hence
    /// on every index subset)
    pub quadratic_chain: bool,
    /// (iv) sum_n int_0^{u~_n} [T(s + u*_n) - T(u*_n)] ds <= u~^T a~
    pub integral_bounded: bool,
}

impl Lemma1Report {
    pub fn all_ok(&self) -> bool {
        self.sign_consistent && self.magnitude_bounded && self.quadratic_chain && self.integral_bounded
    }
}

pub fn lemma1_check(
    spec: &ActivationSpec,
    u_star: &Array1<f64>,
    u_tilde: &Array1<f64>,
) -> Lemma1Report {
    assert_eq!(u_star.len(), u_tilde.len(), "u_star and u_tilde must have equal length");
    let alpha = spec.alpha();
    let u = u_star + u_tilde;
    let vars = ErrorVariables::new(spec, u_star, &u);

    let mut sign_consistent = true;
    let mut magnitude_bounded = true;
    let mut quadratic_chain = true;
    let mut integral_sum = 0.0;

    for n in 0..u_tilde.len() {
        let ut = vars.u_tilde[n];
        let at = vars.a_tilde[n];

        // roundoff guard: differences at the 1e-14 scale count as zero
        let at_eff = if at.abs() <= 1e-14 * (1.0 + u_star[n].abs()) {
            0.0
        } else {
            at
        };
        if at_eff != 0.0 && at_eff.signum() != ut.signum() {
            sign_consistent = false;
        }
        if at.abs() > alpha * ut.abs() + 1e-12 {
            magnitude_bounded = false;
        }
        if at * at > alpha * ut * at + 1e-12 || alpha * ut * at > alpha * alpha * ut * ut + 1e-12 {
            quadratic_chain = false;
        }
        integral_sum += shifted_activation_integral(spec, u_star[n], ut);
    }

    let inner = vars.u_tilde.dot(&vars.a_tilde);
    let integral_bounded = integral_sum <= inner + 1e-9;

    Lemma1Report {
        sign_consistent,
        magnitude_bounded,
        quadratic_chain,
        integral_bounded,
    }
}

/// Integral of g(s) = T(s + u*) - T(u*) from 0 to u_tilde by composite
/// trapezoid, with panel boundaries placed on the activation kinks
/// (s = +/-lambda - u*) so the soft-threshold case integrates exactly.
fn shifted_activation_integral(spec: &ActivationSpec, u_star: f64, u_tilde: f64) -> f64 {
    if u_tilde == 0.0 {
        return 0.0;
    }
    let base = spec.apply_scalar(u_star);
    let g = |s: f64| spec.apply_scalar(s + u_star) - base;

    let (lo, hi) = if u_tilde > 0.0 { (0.0, u_tilde) } else { (u_tilde, 0.0) };
    let mut nodes = vec![lo, hi];
    for kink in [spec.lambda() - u_star, -spec.lambda() - u_star] {
        if kink > lo && kink < hi {
            nodes.push(kink);
        }
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

    const PANELS: usize = 512;
    let mut total = 0.0;
    for pair in nodes.windows(2) {
        let (x0, x1) = (pair[0], pair[1]);
        if x1 <= x0 {
            continue;
        }
        let h = (x1 - x0) / PANELS as f64;
        let mut acc = 0.5 * (g(x0) + g(x1));
        for k in 1..PANELS {
            acc += g(x0 + h * k as f64);
        }
        total += acc * h;
    }
    if u_tilde > 0.0 {
        total
    } else {
        -total
    }
}
