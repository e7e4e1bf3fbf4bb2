//! Experiment runners behind the `experiment` subcommands. Each returns
//! plot-ready CSV bodies plus a JSON summary; file emission and comment
//! lines are handled by the caller.

pub mod convergence;
pub mod rate;
pub mod switches;

pub use convergence::{run_convergence, ConvergenceArgs, ConvergenceOutput};
pub use rate::{run_rate, RateArgs, RateOutput};
pub use switches::{run_switches, SwitchesArgs, SwitchesOutput};
