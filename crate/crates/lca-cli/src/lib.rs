//! Library backing the `lca` command-line harness; the binary in `main.rs`
//! is a thin argument-parsing layer over these runners.

pub mod experiments;
pub mod instance;
pub mod output;
pub mod solve;
pub mod validation;
