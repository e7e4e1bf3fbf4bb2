//! `lca` — simulate a locally competitive network for sparse approximation
//! and reproduce the convergence, switching, and rate experiments.
//!
//! Exit codes: 0 success, 1 failed invariant check, 2 usage or I/O error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use lca_cli::experiments::{
    run_convergence, run_rate, run_switches, ConvergenceArgs, RateArgs, SwitchesArgs,
};
use lca_cli::instance::{parse_gen_bundle, InstanceParams, SolverParams};
use lca_cli::output::{comment_line, resolve_out_dir, write_with_comment};
use lca_cli::solve::{run_solve, ProblemSource, SolveRequest, Solver};
use lca_cli::validation::run_checks;
use lca_core::IstaConfig;

#[derive(Parser)]
#[command(
    name = "lca",
    version,
    about = "Sparse approximation with a locally competitive network",
    long_about = "Solves sparsity-penalized least-squares problems by integrating a \
                  continuous-time competitive network, with an ISTA reference solver and \
                  experiment harnesses for convergence, switching, and rate studies.\n\n\
                  All emitted CSV files start with a `#` comment line carrying the full \
                  parameter set; runs are deterministic for a fixed --seed. The output \
                  directory defaults to $LCA_OUT_DIR, then `.`."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print a solution report as JSON.
    Solve(SolveArgs),
    /// Reproduce an experiment and write plot-ready CSV files.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Run the library invariant suite; exits 1 if any check fails.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Problem file (JSON). Mutually exclusive with --gen.
    #[arg(long, conflicts_with = "gen")]
    problem: Option<PathBuf>,
    /// Generate an instance: comma-separated m=..,n=..,s=..,noise=..,seed=..
    /// (n defaults to 2m).
    #[arg(long)]
    gen: Option<String>,
    /// Threshold / sparsity tradeoff for generated instances.
    #[arg(long, default_value_t = 0.025)]
    lambda: f64,
    /// Solver: the network itself or the ISTA reference.
    #[arg(long, default_value = "lca", value_parser = ["lca", "ista"])]
    solver: String,
    #[command(flatten)]
    dynamics: DynamicsArgs,
    /// ISTA stopping tolerance on the iterate change.
    #[arg(long, default_value_t = 1e-10)]
    ista_tol: f64,
    /// ISTA iteration cap.
    #[arg(long, default_value_t = 50_000)]
    max_iters: usize,
    /// ISTA gradient step; defaults to 0.9 / sigma_max^2.
    #[arg(long)]
    step_size: Option<f64>,
    /// Use FISTA momentum in the reference solver.
    #[arg(long)]
    accelerated: bool,
    /// Write the solution JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Save the (possibly generated) problem as JSON.
    #[arg(long)]
    save_problem: Option<PathBuf>,
    /// Save the generator ground truth as JSON.
    #[arg(long)]
    save_truth: Option<PathBuf>,
    /// Export the network trajectory as CSV (t,V,nnz[,u*,a*]).
    #[arg(long)]
    trajectory_csv: Option<PathBuf>,
    /// Export the full trajectory structure as JSON.
    #[arg(long)]
    trajectory_json: Option<PathBuf>,
    /// Include the full u and a vectors in the trajectory CSV.
    #[arg(long)]
    include_vectors: bool,
}

#[derive(Args, Clone, Copy)]
struct DynamicsArgs {
    /// Network time constant.
    #[arg(long, default_value_t = 0.01)]
    tau: f64,
    /// Integration step (must not exceed tau).
    #[arg(long, default_value_t = 0.001)]
    dt: f64,
    /// Stop once ||du/dt||_inf drops below this.
    #[arg(long, default_value_t = 1e-6)]
    residual_tol: f64,
    /// Integration horizon; defaults to 100*tau.
    #[arg(long)]
    max_time: Option<f64>,
    /// Record every k-th step.
    #[arg(long, default_value_t = 1)]
    record_stride: usize,
    /// Integrate with classical RK4 instead of forward Euler.
    #[arg(long)]
    rk4: bool,
}

impl DynamicsArgs {
    fn params(&self) -> SolverParams {
        SolverParams {
            tau: self.tau,
            dt: self.dt,
            residual_tol: self.residual_tol,
            max_time: self.max_time,
            record_stride: self.record_stride,
            rk4: self.rk4,
        }
    }
}

#[derive(Args, Clone, Copy)]
struct GeneratorArgs {
    /// Signal dimension M.
    #[arg(long, default_value_t = 256)]
    m: usize,
    /// Dictionary size N (must equal 2M for the built-in dictionary).
    #[arg(long)]
    n: Option<usize>,
    /// Number of nonzeros in the true coefficients.
    #[arg(long, default_value_t = 5)]
    s: usize,
    /// Measurement-noise standard deviation.
    #[arg(long, default_value_t = 0.0062)]
    noise: f64,
    /// Base RNG seed; all outputs are deterministic in it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Threshold / sparsity tradeoff.
    #[arg(long, default_value_t = 0.025)]
    lambda: f64,
}

impl GeneratorArgs {
    fn params(&self) -> InstanceParams {
        InstanceParams {
            m: self.m,
            n: self.n.unwrap_or(2 * self.m),
            s: self.s,
            noise: self.noise,
            seed: self.seed,
            lambda: self.lambda,
        }
    }
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Node trajectories, solution comparison, and a multi-start study.
    ///
    /// Writes nodes.csv (t,node,u,active_at_solution), comparison.csv
    /// (index,a0,a_lca,a_ista on the joint support), and multistart.csv
    /// (start,t,u_i,u_j in a two-node plane); prints a JSON summary.
    Convergence {
        #[command(flatten)]
        generator: GeneratorArgs,
        #[command(flatten)]
        dynamics: DynamicsArgs,
        /// Number of random initial states.
        #[arg(long, default_value_t = 30)]
        starts: usize,
        /// Number of node trajectories to export.
        #[arg(long, default_value_t = 10)]
        nodes: usize,
        /// Output directory (default: $LCA_OUT_DIR, then `.`).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Histogram of switch counts over many seeded trials.
    ///
    /// Writes switch_histogram.csv (switch_count,percentage); prints a JSON
    /// summary with min/median/max.
    Switches {
        #[command(flatten)]
        generator: GeneratorArgs,
        #[command(flatten)]
        dynamics: DynamicsArgs,
        /// Number of trials; trial k uses seed + k.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Normalized state-error decay against the exponential bounds.
    ///
    /// Writes rate.csv (t,normalized_error,bound_final,bound_max); prints a
    /// JSON summary with the fitted slope and both theoretical slopes.
    Rate {
        #[command(flatten)]
        generator: GeneratorArgs,
        #[command(flatten)]
        dynamics: DynamicsArgs,
        /// Problem file overriding the generator.
        #[arg(long)]
        problem: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ValidateArgs {
    /// Reduced trial counts for a faster pass.
    #[arg(long)]
    quick: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Experiment(cmd) => cmd_experiment(cmd),
        Command::Validate(args) => Ok(cmd_validate(args)),
    }
}

fn cmd_solve(args: SolveArgs) -> anyhow::Result<ExitCode> {
    let source = match (&args.problem, &args.gen) {
        (Some(path), None) => ProblemSource::File(path.clone()),
        (None, Some(bundle)) => {
            ProblemSource::Generated(parse_gen_bundle(bundle, args.lambda)?)
        }
        (None, None) => anyhow::bail!("either --problem or --gen is required"),
        (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
    };
    let request = SolveRequest {
        source,
        solver: if args.solver == "ista" { Solver::Ista } else { Solver::Lca },
        solver_params: args.dynamics.params(),
        ista: IstaConfig {
            step_size: args.step_size,
            max_iters: args.max_iters,
            tol: args.ista_tol,
            accelerated: args.accelerated,
        },
        save_problem: args.save_problem.clone(),
        save_truth: args.save_truth.clone(),
        trajectory_csv: args.trajectory_csv.clone(),
        trajectory_json: args.trajectory_json.clone(),
        include_vectors: args.include_vectors,
    };

    let started = Instant::now();
    let outcome = run_solve(&request)?;
    eprintln!("solved in {:.3}s", started.elapsed().as_secs_f64());

    if let Some(traj) = &outcome.trajectory {
        if let Some(path) = &request.trajectory_csv {
            let mut body = Vec::new();
            traj.write_csv(&mut body, request.include_vectors)?;
            let comment = comment_line("solve-trajectory", &request.solver_params.describe());
            write_with_comment(path, &comment, &String::from_utf8(body)?)?;
        }
        if let Some(path) = &request.trajectory_json {
            fs::write(path, traj.to_json())?;
        }
    }

    let text = serde_json::to_string_pretty(&outcome.report)?;
    match &args.out {
        Some(path) => fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_experiment(cmd: ExperimentCommand) -> anyhow::Result<ExitCode> {
    match cmd {
        ExperimentCommand::Convergence {
            generator,
            dynamics,
            starts,
            nodes,
            out_dir,
        } => {
            let args = ConvergenceArgs {
                instance: generator.params(),
                solver: dynamics.params(),
                starts,
                nodes,
            };
            let output = run_convergence(&args)?;
            let dir = resolve_out_dir(out_dir);
            let params = format!(
                "{} {} starts={starts} nodes={nodes}",
                args.instance.describe(),
                args.solver.describe()
            );
            write_with_comment(
                &dir.join("nodes.csv"),
                &comment_line("experiment-convergence", &params),
                &output.nodes_csv,
            )?;
            write_with_comment(
                &dir.join("comparison.csv"),
                &comment_line("experiment-convergence", &params),
                &output.comparison_csv,
            )?;
            write_with_comment(
                &dir.join("multistart.csv"),
                &comment_line("experiment-convergence", &params),
                &output.multistart_csv,
            )?;
            println!("{}", serde_json::to_string_pretty(&output.summary)?);
            Ok(ExitCode::SUCCESS)
        }
        ExperimentCommand::Switches {
            generator,
            dynamics,
            trials,
            out_dir,
        } => {
            let args = SwitchesArgs {
                instance: generator.params(),
                solver: dynamics.params(),
                trials,
            };
            let output = run_switches(&args)?;
            let dir = resolve_out_dir(out_dir);
            let params = format!(
                "{} {} trials={trials}",
                args.instance.describe(),
                args.solver.describe()
            );
            write_with_comment(
                &dir.join("switch_histogram.csv"),
                &comment_line("experiment-switches", &params),
                &output.histogram_csv,
            )?;
            println!("{}", serde_json::to_string_pretty(&output.summary)?);
            Ok(ExitCode::SUCCESS)
        }
        ExperimentCommand::Rate {
            generator,
            dynamics,
            problem,
            out_dir,
        } => {
            let args = RateArgs {
                instance: generator.params(),
                solver: dynamics.params(),
                problem,
            };
            let output = run_rate(&args)?;
            let dir = resolve_out_dir(out_dir);
            let params = format!("{} {}", args.instance.describe(), args.solver.describe());
            write_with_comment(
                &dir.join("rate.csv"),
                &comment_line("experiment-rate", &params),
                &output.decay_csv,
            )?;
            println!("{}", serde_json::to_string_pretty(&output.summary)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn cmd_validate(args: ValidateArgs) -> ExitCode {
    let results = run_checks(args.quick);
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut all_passed = true;
    for r in &results {
        all_passed &= r.passed;
        println!(
            "{}  {:width$}  {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail,
        );
    }
    if all_passed {
        println!("all checks passed");
        ExitCode::SUCCESS
    } else {
        println!("one or more checks failed");
        ExitCode::from(1)
    }
}
