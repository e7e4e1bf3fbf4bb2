//! Continuous-time network dynamics and their fixed-step integration.
//!
//! The internal states follow
//!
//!   tau * du/dt = -u - (Phi^T Phi - I) a + Phi^T y,    a = T_lambda(u),
//!
//! a switched system: nodes with |u_n| > lambda form the active set, and
//! every change of that set is a switch event. [`simulate`] integrates with
//! forward Euler (default) or classical RK4, records time-stamped samples
//! and switch events, and stops once ||du/dt||_inf falls below the residual
//! tolerance or the time horizon runs out.

use std::io::{self, Write};

use ndarray::{Array1, Array2};

use crate::activation::ActivationSpec;
use crate::diagnostics::objective;
use crate::error::{Error, Result};
use crate::model::Problem;

/// Indices with |u_n| strictly above lambda. A node sitting exactly on the
/// threshold counts as inactive.
pub fn active_set(u: &Array1<f64>, lambda: f64) -> Vec<usize> {
    u.iter()
        .enumerate()
        .filter(|(_, &v)| v.abs() > lambda)
        .map(|(i, _)| i)
        .collect()
}

/// Snapshot of the network at one instant.
#[derive(Clone, Debug)]
pub struct LcaState {
    pub t: f64,
    pub u: Array1<f64>,
    pub a: Array1<f64>,
    pub active_set: Vec<usize>,
}

impl LcaState {
    /// Builds a consistent state: `a` and the active set are derived from `u`.
    pub fn new(t: f64, u: Array1<f64>, spec: &ActivationSpec) -> Self {
        let a = spec.apply(&u);
        let active = active_set(&u, spec.lambda());
        LcaState {
            t,
            u,
            a,
            active_set: active,
        }
    }
}

/// Integration method for the fixed-step solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Euler,
    Rk4,
}

/// Fixed-step solver parameters.
#[derive(Clone, Copy, Debug)]
pub struct SolverConfig {
    /// System time constant tau.
    pub tau: f64,
    /// Integration step; must satisfy dt <= tau.
    pub dt: f64,
    /// Time horizon; integration stops here if the residual never drops.
    pub max_time: f64,
    /// Stop once ||du/dt||_inf < residual_tol.
    pub residual_tol: f64,
    /// Record every k-th step (the initial and final states are always kept).
    pub record_stride: usize,
    pub method: Method,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig::for_tau(0.01)
    }
}

impl SolverConfig {
    /// Defaults scaled to a time constant: dt = tau/10, horizon 100*tau.
    pub fn for_tau(tau: f64) -> Self {
        SolverConfig {
            tau,
            dt: tau / 10.0,
            max_time: 100.0 * tau,
            residual_tol: 1e-6,
            record_stride: 1,
            method: Method::Euler,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::invalid("tau", format!("must be positive, got {}", self.tau)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if self.dt > self.tau {
            return Err(Error::invalid(
                "dt",
                format!("stability guard requires dt <= tau, got dt={}, tau={}", self.dt, self.tau),
            ));
        }
        if !(self.max_time > 0.0) {
            return Err(Error::invalid("max_time", "must be positive".to_string()));
        }
        if !(self.residual_tol > 0.0) {
            return Err(Error::invalid("residual_tol", "must be positive".to_string()));
        }
        if self.record_stride == 0 {
            return Err(Error::invalid("record_stride", "must be at least 1".to_string()));
        }
        Ok(())
    }
}

/// Right-hand side of the state ODE at `u`:
/// `(-u - (Phi^T Phi - I) T(u) + Phi^T y) / tau`.
pub fn udot(problem: &Problem, spec: &ActivationSpec, u: &Array1<f64>, tau: f64) -> Array1<f64> {
    let a = spec.apply(u);
    let w = problem.dictionary().synthesize(&a); // Phi a
    let mut out = problem.dictionary().correlate(&w); // Phi^T Phi a
    out -= &a; // (Phi^T Phi - I) a
    out -= &problem.driving_input();
    out += u;
    out.mapv_inplace(|v| -v / tau);
    out
}

/// The dynamics split over the active/inactive partition.
#[derive(Clone, Debug)]
pub struct PartitionedRhs {
    pub active: Vec<usize>,
    /// da/dt on the active set (chain rule through the activation).
    pub a_dot_active: Array1<f64>,
    pub inactive: Vec<usize>,
    /// du/dt on the inactive set.
    pub u_dot_inactive: Array1<f64>,
}

/// Evaluates the partitioned form of the dynamics directly from submatrix
/// products:
///
///   da_G/dt  = F'_G (-u_G + a_G - Phi_G^T Phi_G a_G + Phi_G^T y) / tau
///   du_Gc/dt = (-u_Gc - Phi_Gc^T Phi_G a_G + Phi_Gc^T y) / tau
pub fn rhs_partitioned(
    problem: &Problem,
    spec: &ActivationSpec,
    u: &Array1<f64>,
    tau: f64,
) -> PartitionedRhs {
    let lambda = spec.lambda();
    let active = active_set(u, lambda);
    let inactive: Vec<usize> = (0..u.len()).filter(|i| u[*i].abs() <= lambda).collect();
    let a = spec.apply(u);

    // Phi_G a_G, assembled column by column.
    let mut w = Array1::zeros(problem.m());
    for &j in &active {
        w.scaled_add(a[j], &problem.dictionary().column(j));
    }

    let y = problem.y();
    let mut a_dot_active = Array1::zeros(active.len());
    for (k, &j) in active.iter().enumerate() {
        let col = problem.dictionary().column(j);
        let gram_term = col.dot(&w);
        let drive = col.dot(y);
        a_dot_active[k] = spec.deriv_scalar(u[j]) * (-u[j] + a[j] - gram_term + drive) / tau;
    }

    let mut u_dot_inactive = Array1::zeros(inactive.len());
    for (k, &j) in inactive.iter().enumerate() {
        let col = problem.dictionary().column(j);
        let gram_term = col.dot(&w);
        let drive = col.dot(y);
        u_dot_inactive[k] = (-u[j] - gram_term + drive) / tau;
    }

    PartitionedRhs {
        active,
        a_dot_active,
        inactive,
        u_dot_inactive,
    }
}

/// Precomputed operator for the integration loop: interconnection matrix and
/// driving input are formed once per problem.
struct LcaSystem<'a> {
    spec: &'a ActivationSpec,
    gram: Array2<f64>, // Phi^T Phi - I, symmetric
    drive: Array1<f64>,
    tau: f64,
}

impl<'a> LcaSystem<'a> {
    fn new(problem: &Problem, spec: &'a ActivationSpec, tau: f64) -> Self {
        LcaSystem {
            spec,
            gram: problem.interconnection(),
            drive: problem.driving_input(),
            tau,
        }
    }

    fn udot(&self, u: &Array1<f64>) -> Array1<f64> {
        let a = self.spec.apply(u);
        let mut out = self.drive.clone();
        out -= u;
        // G a, exploiting output sparsity; G is symmetric so row j = column j.
        for (j, &c) in a.iter().enumerate() {
            if c != 0.0 {
                out.scaled_add(-c, &self.gram.row(j));
            }
        }
        out.mapv_inplace(|v| v / self.tau);
        out
    }
}

fn advance(sys: &LcaSystem<'_>, state: &LcaState, config: &SolverConfig, k1: &Array1<f64>) -> Result<LcaState> {
    let dt = config.dt;
    let u_next = match config.method {
        Method::Euler => &state.u + &(k1 * dt),
        Method::Rk4 => {
            let k2 = sys.udot(&(&state.u + &(k1 * (dt / 2.0))));
            let k3 = sys.udot(&(&state.u + &(&k2 * (dt / 2.0))));
            let k4 = sys.udot(&(&state.u + &(&k3 * dt)));
            &state.u + &((k1 + &(&k2 * 2.0) + &(&k3 * 2.0) + &k4) * (dt / 6.0))
        }
    };
    let t_next = state.t + dt;
    if u_next.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState { t: t_next });
    }
    Ok(LcaState::new(t_next, u_next, sys.spec))
}

/// Advances one step of the configured method and rebuilds the output and
/// active set. Prefer [`simulate`] for whole trajectories; this entry point
/// re-derives the interconnection matrix on every call.
pub fn step(
    state: &LcaState,
    problem: &Problem,
    spec: &ActivationSpec,
    config: &SolverConfig,
) -> Result<LcaState> {
    config.validate()?;
    let sys = LcaSystem::new(problem, spec, config.tau);
    let k1 = sys.udot(&state.u);
    advance(&sys, state, config, &k1)
}

/// One recorded point along a trajectory.
#[derive(Clone, Debug)]
pub struct TrajectorySample {
    pub t: f64,
    pub u: Array1<f64>,
    pub a: Array1<f64>,
    /// Objective value V(a) at this sample.
    pub objective: f64,
}

/// A change of the active set between two consecutive steps.
#[derive(Clone, Debug)]
pub struct SwitchEvent {
    pub t: f64,
    pub entered: Vec<usize>,
    pub left: Vec<usize>,
}

/// Recorded history of one integration run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub switch_events: Vec<SwitchEvent>,
    pub converged: bool,
    pub final_state: LcaState,
}

impl Trajectory {
    pub fn final_output(&self) -> &Array1<f64> {
        &self.final_state.a
    }

    pub fn final_support(&self) -> Vec<usize> {
        self.final_state
            .a
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// CSV export: one row per sample with `t,V,nnz`, optionally followed by
    /// the full u and a vectors. Floats carry 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: &mut W, include_vectors: bool) -> io::Result<()> {
        let n = self.final_state.u.len();
        write!(w, "t,V,nnz")?;
        if include_vectors {
            for i in 0..n {
                write!(w, ",u{i}")?;
            }
            for i in 0..n {
                write!(w, ",a{i}")?;
            }
        }
        writeln!(w)?;
        for s in &self.samples {
            let nnz = s.a.iter().filter(|&&v| v != 0.0).count();
            write!(w, "{:.16e},{:.16e},{}", s.t, s.objective, nnz)?;
            if include_vectors {
                for v in s.u.iter() {
                    write!(w, ",{v:.16e}")?;
                }
                for v in s.a.iter() {
                    write!(w, ",{v:.16e}")?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// JSON export of the full structure, with floats printed to 17
    /// significant digits for reproducible files.
    pub fn to_json(&self) -> String {
        fn vec_json(v: &Array1<f64>) -> String {
            let items: Vec<String> = v.iter().map(|x| format!("{x:.16e}")).collect();
            format!("[{}]", items.join(","))
        }
        fn idx_json(v: &[usize]) -> String {
            let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            format!("[{}]", items.join(","))
        }
        let mut out = String::new();
        out.push_str(&format!("{{\"converged\":{},", self.converged));
        out.push_str("\"samples\":[");
        for (i, s) in self.samples.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "{{\"t\":{:.16e},\"V\":{:.16e},\"u\":{},\"a\":{}}}",
                s.t,
                s.objective,
                vec_json(&s.u),
                vec_json(&s.a)
            ));
        }
        out.push_str("],\"switch_events\":[");
        for (i, e) in self.switch_events.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "{{\"t\":{:.16e},\"entered\":{},\"left\":{}}}",
                e.t,
                idx_json(&e.entered),
                idx_json(&e.left)
            ));
        }
        out.push_str(&format!(
            "],\"final_state\":{{\"t\":{:.16e},\"u\":{},\"a\":{},\"active_set\":{}}}}}",
            self.final_state.t,
            vec_json(&self.final_state.u),
            vec_json(&self.final_state.a),
            idx_json(&self.final_state.active_set)
        ));
        out
    }
}

fn set_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    // both inputs sorted
    let mut out = Vec::new();
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j >= b.len() || b[j] != x {
            out.push(x);
        }
    }
    out
}

/// Integrates from `u0` until the residual criterion or the time horizon is
/// met. Samples are recorded every `record_stride` steps (always including
/// the initial and final states); a switch event is recorded whenever the
/// active set changes between consecutive steps.
pub fn simulate(
    problem: &Problem,
    spec: &ActivationSpec,
    config: &SolverConfig,
    u0: Array1<f64>,
) -> Result<Trajectory> {
    config.validate()?;
    if u0.len() != problem.n() {
        return Err(Error::DimensionMismatch {
            context: "initial state u0",
            expected: problem.n(),
            actual: u0.len(),
        });
    }

    let sys = LcaSystem::new(problem, spec, config.tau);
    let mut state = LcaState::new(0.0, u0, spec);
    let mut samples = Vec::new();
    let mut switch_events = Vec::new();

    let record =
        |state: &LcaState, samples: &mut Vec<TrajectorySample>| -> Result<()> {
            samples.push(TrajectorySample {
                t: state.t,
                u: state.u.clone(),
                a: state.a.clone(),
                objective: objective(problem, spec, &state.a)?,
            });
            Ok(())
        };

    record(&state, &mut samples)?;

    let max_steps = (config.max_time / config.dt).ceil() as usize;
    let mut converged = false;

    for step_index in 1..=max_steps {
        let k1 = sys.udot(&state.u);
        let residual = k1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if residual < config.residual_tol {
            converged = true;
            break;
        }

        let next = advance(&sys, &state, config, &k1)?;
        if next.active_set != state.active_set {
            switch_events.push(SwitchEvent {
                t: next.t,
                entered: set_difference(&next.active_set, &state.active_set),
                left: set_difference(&state.active_set, &next.active_set),
            });
        }
        state = next;

        if step_index % config.record_stride == 0 {
            record(&state, &mut samples)?;
        }

        if step_index == max_steps {
            // horizon reached; re-check so a run landing on the fixed point
            // at the last step still reports convergence
            let k = sys.udot(&state.u);
            let r = k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            converged = r < config.residual_tol;
        }
    }

    // final state is always recorded
    if samples.last().map(|s| s.t) != Some(state.t) {
        record(&state, &mut samples)?;
    }

    Ok(Trajectory {
        samples,
        switch_events,
        converged,
        final_state: state,
    })
}
