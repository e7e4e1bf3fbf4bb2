//! Switch-count experiment: many seeded trials, a histogram of the number
//! of active-set changes before convergence, and a min/median/max summary.

use anyhow::bail;
use lca_core::{simulate, ActivationSpec};
use ndarray::Array1;
use rayon::prelude::*;
use serde_json::json;

use crate::instance::{InstanceParams, SolverParams};

#[derive(Clone, Copy, Debug)]
pub struct SwitchesArgs {
    pub instance: InstanceParams,
    pub solver: SolverParams,
    pub trials: usize,
}

pub struct SwitchesOutput {
    pub histogram_csv: String,
    pub summary: serde_json::Value,
    pub counts: Vec<usize>,
    pub all_converged: bool,
}

pub fn run_switches(args: &SwitchesArgs) -> anyhow::Result<SwitchesOutput> {
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }

    // Trials run in parallel; the per-trial seed is base seed + index and the
    // results are collected in seed order, so output does not depend on
    // scheduling.
    let results: Vec<anyhow::Result<(bool, usize)>> = (0..args.trials)
        .into_par_iter()
        .map(|k| {
            let params = InstanceParams {
                seed: args.instance.seed + k as u64,
                ..args.instance
            };
            let (problem, _) = params.generate()?;
            let spec = ActivationSpec::soft_threshold(problem.lambda())?;
            let mut config = args.solver.config();
            config.record_stride = usize::MAX; // only events matter here
            let traj = simulate(&problem, &spec, &config, Array1::zeros(problem.n()))?;
            Ok((traj.converged, traj.switch_events.len()))
        })
        .collect();

    let mut counts = Vec::with_capacity(args.trials);
    let mut all_converged = true;
    for r in results {
        let (converged, count) = r?;
        all_converged &= converged;
        counts.push(count);
    }

    let mut sorted = counts.clone();
    sorted.sort_unstable();
    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2] as f64
    } else {
        (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) as f64 / 2.0
    };

    let mut histogram_csv = String::from("switch_count,percentage\n");
    let mut k = 0;
    while k < sorted.len() {
        let value = sorted[k];
        let mut freq = 0;
        while k < sorted.len() && sorted[k] == value {
            freq += 1;
            k += 1;
        }
        histogram_csv.push_str(&format!(
            "{},{:.16e}\n",
            value,
            100.0 * freq as f64 / args.trials as f64
        ));
    }

    let summary = json!({
        "trials": args.trials,
        "all_converged": all_converged,
        "min": min,
        "median": median,
        "max": max,
    });

    Ok(SwitchesOutput {
        histogram_csv,
        summary,
        counts,
        all_converged,
    })
}
