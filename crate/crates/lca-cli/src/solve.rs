//! The `solve` subcommand: run one instance through the network or the
//! ISTA reference solver and emit a solution report.

use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use lca_core::{
    critical_point_slack, ista_solve, objective, simulate, ActivationSpec, GroundTruth,
    IstaConfig, Problem, Trajectory,
};
use ndarray::Array1;
use serde_json::json;

use crate::instance::{InstanceParams, SolverParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solver {
    Lca,
    Ista,
}

pub struct SolveRequest {
    pub source: ProblemSource,
    pub solver: Solver,
    pub solver_params: SolverParams,
    pub ista: IstaConfig,
    pub save_problem: Option<PathBuf>,
    pub save_truth: Option<PathBuf>,
    pub trajectory_csv: Option<PathBuf>,
    pub trajectory_json: Option<PathBuf>,
    pub include_vectors: bool,
}

pub enum ProblemSource {
    File(PathBuf),
    Generated(InstanceParams),
}

pub struct SolveOutcome {
    pub report: serde_json::Value,
    pub trajectory: Option<Trajectory>,
}

pub fn run_solve(request: &SolveRequest) -> anyhow::Result<SolveOutcome> {
    let (problem, truth): (Problem, Option<GroundTruth>) = match &request.source {
        ProblemSource::File(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading problem file {}", path.display()))?;
            (Problem::from_json(&text)?, None)
        }
        ProblemSource::Generated(params) => {
            let (p, t) = params.generate()?;
            (p, Some(t))
        }
    };

    if let Some(path) = &request.save_problem {
        fs::write(path, problem.to_json())
            .with_context(|| format!("writing problem file {}", path.display()))?;
    }
    if let (Some(path), Some(t)) = (&request.save_truth, &truth) {
        fs::write(path, t.to_json())
            .with_context(|| format!("writing ground-truth file {}", path.display()))?;
    }

    let spec = ActivationSpec::soft_threshold(problem.lambda())?;

    let (a, solver_info, converged, trajectory): (Array1<f64>, serde_json::Value, bool, Option<Trajectory>) =
        match request.solver {
            Solver::Lca => {
                let config = request.solver_params.config();
                let traj = simulate(&problem, &spec, &config, Array1::zeros(problem.n()))?;
                let info = json!({
                    "final_t": traj.final_state.t,
                    "switch_count": traj.switch_events.len(),
                });
                (traj.final_output().clone(), info, traj.converged, Some(traj))
            }
            Solver::Ista => {
                let result = ista_solve(&problem, &request.ista)?;
                let info = json!({ "iterations": result.iters });
                (result.a, info, result.converged, None)
            }
        };

    let support: Vec<usize> = a
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(i, _)| i)
        .collect();
    let slack = critical_point_slack(&problem, &spec, &a)?;
    let value = objective(&problem, &spec, &a)?;

    let mut report = json!({
        "solver": match request.solver { Solver::Lca => "lca", Solver::Ista => "ista" },
        "converged": converged,
        "nnz": support.len(),
        "support": support,
        "objective": value,
        "active_slack": slack.active_slack,
        "inactive_slack": slack.inactive_slack,
        "a": a.to_vec(),
        "m": problem.m(),
        "n": problem.n(),
        "lambda": problem.lambda(),
    });
    report[match request.solver {
        Solver::Lca => "lca",
        Solver::Ista => "ista",
    }] = solver_info;

    if let Some(t) = &truth {
        let recovered = support == {
            let mut s = t.support.clone();
            s.sort_unstable();
            s
        };
        report["truth"] = json!({
            "support": t.support,
            "recovered": recovered,
        });
    }

    Ok(SolveOutcome { report, trajectory })
}
