//! Thresholding activation functions.
//!
//! An activation maps an internal state u to an output a: zero when
//! |u| <= lambda, and f(u) above threshold. The soft threshold
//! (f(u) = u - lambda*sign(u)) is the canonical instance and corresponds to
//! the l1 cost; generic activations supply f, its derivative, a derivative
//! bound alpha, and optionally a closed-form inverse. Admissible f must be
//! odd with f(lambda) = 0, strictly increasing, and dominated by the
//! identity on u >= 0.

use std::fmt;
use std::sync::Arc;

use ndarray::Array1;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    SoftThreshold,
    Generic {
        f: ScalarFn,
        f_deriv: ScalarFn,
        alpha: f64,
        f_inverse: Option<ScalarFn>,
    },
}

/// A thresholding activation with threshold `lambda`.
#[derive(Clone)]
pub struct ActivationSpec {
    lambda: f64,
    kind: Kind,
}

impl fmt::Debug for ActivationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::SoftThreshold => write!(f, "ActivationSpec::soft_threshold({})", self.lambda),
            Kind::Generic { alpha, .. } => {
                write!(f, "ActivationSpec::generic(lambda={}, alpha={})", self.lambda, alpha)
            }
        }
    }
}

impl ActivationSpec {
    /// Soft threshold: 0 inside [-lambda, lambda], u - lambda*sign(u) outside.
    pub fn soft_threshold(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::invalid("lambda", format!("must be positive, got {lambda}")));
        }
        Ok(ActivationSpec {
            lambda,
            kind: Kind::SoftThreshold,
        })
    }

    /// A generic thresholding activation. `f` and `f_deriv` are evaluated on
    /// the domain |u| >= lambda; `alpha` must bound |f'| over the states the
    /// caller will visit.
    pub fn generic(
        lambda: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
        alpha: f64,
        f_inverse: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    ) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::invalid("lambda", format!("must be positive, got {lambda}")));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::invalid("alpha", format!("must be positive, got {alpha}")));
        }
        Ok(ActivationSpec {
            lambda,
            kind: Kind::Generic {
                f: Arc::new(f),
                f_deriv: Arc::new(f_deriv),
                alpha,
                f_inverse,
            },
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Bound on |f'|; exactly 1 for the soft threshold.
    pub fn alpha(&self) -> f64 {
        match &self.kind {
            Kind::SoftThreshold => 1.0,
            Kind::Generic { alpha, .. } => *alpha,
        }
    }

    pub fn is_soft_threshold(&self) -> bool {
        matches!(self.kind, Kind::SoftThreshold)
    }

    /// T_lambda at a single state. Ties |u| = lambda map to zero.
    pub fn apply_scalar(&self, u: f64) -> f64 {
        if u.abs() <= self.lambda {
            return 0.0;
        }
        match &self.kind {
            Kind::SoftThreshold => u - self.lambda * u.signum(),
            Kind::Generic { f, .. } => f(u),
        }
    }

    /// Componentwise T_lambda.
    pub fn apply(&self, u: &Array1<f64>) -> Array1<f64> {
        u.mapv(|v| self.apply_scalar(v))
    }

    /// dT/du at a single state: 0 at or below threshold, f'(u) above.
    pub fn deriv_scalar(&self, u: f64) -> f64 {
        if u.abs() <= self.lambda {
            return 0.0;
        }
        match &self.kind {
            Kind::SoftThreshold => 1.0,
            Kind::Generic { f_deriv, .. } => f_deriv(u),
        }
    }

    /// Diagonal of the activation Jacobian at u.
    pub fn jacobian_diag(&self, u: &Array1<f64>) -> Array1<f64> {
        u.mapv(|v| self.deriv_scalar(v))
    }

    /// Inverts the above-threshold branch: returns u with f(u) = a, a != 0.
    ///
    /// Uses the closed form when supplied, otherwise bisection on the domain
    /// (monotonicity makes the root unique), expanding the bracket
    /// geometrically and stopping at 1e-12 on u.
    pub fn invert(&self, a: f64) -> Result<f64> {
        if a == 0.0 {
            return Err(Error::invalid("a", "inversion target must be nonzero"));
        }
        match &self.kind {
            Kind::SoftThreshold => Ok(a + self.lambda * a.signum()),
            Kind::Generic { f, f_inverse, .. } => {
                if let Some(inv) = f_inverse {
                    return Ok(inv(a));
                }
                bisect_inverse(f.as_ref(), self.lambda, a)
            }
        }
    }

    /// lambda * C'(a) for a != 0, via the correspondence
    /// lambda*C'(a) = u - T_lambda(u) evaluated at u = f^{-1}(a).
    /// For the soft threshold this is lambda*sign(a).
    pub fn cost_gradient(&self, a: f64) -> Result<f64> {
        let u = self.invert(a)?;
        Ok(u - a)
    }

    /// A saturating-slope activation, the built-in generic (non-l1) instance:
    ///
    ///   f(u) = sign(u) * (|u| - lambda) * |u| / (lambda + |u|)
    ///
    /// Odd with f(lambda) = 0, strictly increasing with f' < 1 (so alpha = 1),
    /// dominated by the identity, and invertible in closed form:
    /// |u| = ((lambda + |a|) + sqrt((lambda + |a|)^2 + 4 |a| lambda)) / 2.
    pub fn saturating(lambda: f64) -> Result<Self> {
        let f = move |u: f64| {
            let x = u.abs();
            u.signum() * (x - lambda) * x / (lambda + x)
        };
        let fd = move |u: f64| {
            let x = u.abs();
            (x * x + 2.0 * lambda * x - lambda * lambda) / ((lambda + x) * (lambda + x))
        };
        let inv: ScalarFn = Arc::new(move |a: f64| {
            let t = a.abs();
            let x = 0.5 * ((lambda + t) + ((lambda + t) * (lambda + t) + 4.0 * t * lambda).sqrt());
            a.signum() * x
        });
        ActivationSpec::generic(lambda, f, fd, 1.0, Some(inv))
    }
}

/// Bisection for f(u) = target on the branch sign(target)*[lambda, inf).
fn bisect_inverse(f: &(dyn Fn(f64) -> f64 + Send + Sync), lambda: f64, target: f64) -> Result<f64> {
    let sign = target.signum();
    let t = target.abs();
    // Work on the positive branch via oddness: g(x) = sign * f(sign * x).
    let g = |x: f64| sign * f(sign * x);

    let mut lo = lambda;
    let mut hi = lambda.max(1e-3);
    let mut expansions = 0;
    while g(hi) < t {
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 || !hi.is_finite() {
            return Err(Error::InversionFailure { target });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < t {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 {
            break;
        }
    }
    Ok(sign * 0.5 * (lo + hi))
}

/// Outcome of sampling the admissibility conditions on a grid.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ConditionReport {
    pub odd_symmetry_ok: bool,
    pub boundary_zero_ok: bool,
    pub monotone_ok: bool,
    pub dominated_ok: bool,
    pub worst_violation: f64,
    pub samples_checked: usize,
}

impl ConditionReport {
    pub fn all_ok(&self) -> bool {
        self.odd_symmetry_ok && self.boundary_zero_ok && self.monotone_ok && self.dominated_ok
    }
}

/// Tolerance used by [`validate_conditions`].
pub const CONDITION_TOL: f64 = 1e-9;

/// Samples f on a grid of [lo, hi] (and mirrored negatives) and checks odd
/// symmetry with f(lambda) = 0, strict monotonicity, and domination
/// f(u) <= u for u >= 0.
pub fn validate_conditions(
    spec: &ActivationSpec,
    lo: f64,
    hi: f64,
    num_samples: usize,
) -> ConditionReport {
    let lambda = spec.lambda();
    let lo = lo.max(lambda);
    let num_samples = num_samples.max(2);
    let raw_f = |u: f64| -> f64 {
        // evaluate the above-threshold branch itself, including at u = lambda
        match &spec.kind {
            Kind::SoftThreshold => u - lambda * u.signum(),
            Kind::Generic { f, .. } => f(u),
        }
    };

    let mut worst: f64 = 0.0;
    let mut odd_ok = true;
    let mut monotone_ok = true;
    let mut dominated_ok = true;

    let boundary = raw_f(lambda).abs();
    let boundary_ok = boundary <= CONDITION_TOL;
    worst = worst.max(if boundary_ok { 0.0 } else { boundary });

    let mut prev = f64::NEG_INFINITY;
    for i in 0..num_samples {
        let u = lo + (hi - lo) * (i as f64) / ((num_samples - 1) as f64);
        let fu = raw_f(u);
        let fneg = raw_f(-u);

        let odd_violation = (fneg + fu).abs();
        if odd_violation > CONDITION_TOL {
            odd_ok = false;
            worst = worst.max(odd_violation);
        }

        if fu <= prev {
            monotone_ok = false;
            worst = worst.max(prev - fu);
        }
        prev = fu;

        let dom_violation = fu - u;
        if dom_violation > CONDITION_TOL {
            dominated_ok = false;
            worst = worst.max(dom_violation);
        }
    }

    ConditionReport {
        odd_symmetry_ok: odd_ok,
        boundary_zero_ok: boundary_ok,
        monotone_ok,
        dominated_ok,
        worst_violation: worst,
        samples_checked: num_samples,
    }
}
