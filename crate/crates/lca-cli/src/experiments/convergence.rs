//! Convergence experiment: node trajectories, final-solution comparison
//! against the reference solver, and multi-start state trajectories in a
//! two-node plane.

use anyhow::Context;
use lca_core::{ista_solve, simulate, ActivationSpec, IstaConfig};
use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::instance::{InstanceParams, SolverParams};

#[derive(Clone, Copy, Debug)]
pub struct ConvergenceArgs {
    pub instance: InstanceParams,
    pub solver: SolverParams,
    /// Number of random initial states for the multi-start study.
    pub starts: usize,
    /// Number of nodes whose trajectories are exported.
    pub nodes: usize,
}

pub struct ConvergenceOutput {
    pub nodes_csv: String,
    pub comparison_csv: String,
    pub multistart_csv: String,
    pub summary: serde_json::Value,
}

pub fn run_convergence(args: &ConvergenceArgs) -> anyhow::Result<ConvergenceOutput> {
    let (problem, truth) = args.instance.generate()?;
    let spec = ActivationSpec::soft_threshold(problem.lambda())?;
    let config = args.solver.config();

    let trajectory = simulate(&problem, &spec, &config, Array1::zeros(problem.n()))?;
    let ista = ista_solve(&problem, &IstaConfig::default()).context("reference solve failed")?;

    let final_support = trajectory.final_support();

    // --- node trajectories (a subset of active and inactive nodes) ---
    let mut rng = ChaCha8Rng::seed_from_u64(args.instance.seed);
    rng.set_stream(1); // independent of the instance-generation stream
    let picked = pick_nodes(&mut rng, &final_support, problem.n(), args.nodes);
    let mut nodes_csv = String::from("t,node,u,active_at_solution\n");
    for sample in &trajectory.samples {
        for &node in &picked {
            let tag = final_support.binary_search(&node).is_ok() as u8;
            nodes_csv.push_str(&format!(
                "{:.16e},{},{:.16e},{}\n",
                sample.t, node, sample.u[node], tag
            ));
        }
    }

    // --- final-solution comparison on the joint support ---
    let mut joint: Vec<usize> = truth
        .support
        .iter()
        .copied()
        .chain(final_support.iter().copied())
        .chain(
            ista.a
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(i, _)| i),
        )
        .collect();
    joint.sort_unstable();
    joint.dedup();
    let mut comparison_csv = String::from("index,a0,a_lca,a_ista\n");
    for &j in &joint {
        comparison_csv.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e}\n",
            j,
            truth.a0[j],
            trajectory.final_output()[j],
            ista.a[j]
        ));
    }

    // --- multi-start trajectories in a two-node plane ---
    let (ni, nj) = display_plane(&final_support);
    let mut multistart_csv = format!("start,t,u_{ni},u_{nj}\n");
    let mut finals: Vec<Array1<f64>> = Vec::with_capacity(args.starts);
    for start in 0..args.starts {
        let u0 = Array1::from_shape_fn(problem.n(), |_| {
            let z: f64 = rng.random();
            2.0 * z - 1.0
        });
        let traj = simulate(&problem, &spec, &config, u0)?;
        for sample in &traj.samples {
            multistart_csv.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e}\n",
                start, sample.t, sample.u[ni], sample.u[nj]
            ));
        }
        finals.push(traj.final_state.u.clone());
    }
    let max_pairwise = max_pairwise_linf(&finals);

    let lca_vs_ista = trajectory
        .final_output()
        .iter()
        .zip(ista.a.iter())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));

    let summary = json!({
        "converged": trajectory.converged,
        "nnz": final_support.len(),
        "support_recovered": final_support == sorted(&truth.support),
        "switch_count": trajectory.switch_events.len(),
        "lca_vs_ista_linf": lca_vs_ista,
        "multistart": {
            "starts": args.starts,
            "max_pairwise_final_linf": max_pairwise,
            "plane_nodes": [ni, nj],
        },
        "exported_nodes": picked,
    });

    Ok(ConvergenceOutput {
        nodes_csv,
        comparison_csv,
        multistart_csv,
        summary,
    })
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut out = v.to_vec();
    out.sort_unstable();
    out
}

/// A mix of solution-active and solution-inactive nodes.
fn pick_nodes(rng: &mut ChaCha8Rng, support: &[usize], n: usize, count: usize) -> Vec<usize> {
    let count = count.min(n);
    let mut picked: Vec<usize> = support.iter().copied().take(count / 2).collect();
    while picked.len() < count {
        let j = rng.random_range(0..n);
        if !picked.contains(&j) {
            picked.push(j);
        }
    }
    picked.sort_unstable();
    picked
}

/// Two nodes from the final active set to define the display plane
/// (falling back to the first coordinates when the set is too small).
fn display_plane(support: &[usize]) -> (usize, usize) {
    match support {
        [] => (0, 1),
        [only] => (*only, if *only == 0 { 1 } else { 0 }),
        [first, .., last] => (*first, *last),
    }
}

/// Largest pairwise infinity-norm distance among a set of final states.
pub fn max_pairwise_linf(finals: &[Array1<f64>]) -> f64 {
    let mut max = 0.0f64;
    for i in 0..finals.len() {
        for j in (i + 1)..finals.len() {
            let d = finals[i]
                .iter()
                .zip(finals[j].iter())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            max = max.max(d);
        }
    }
    max
}
