//! Output-file plumbing: every emitted CSV starts with a `#` comment line
//! carrying the library version and the full parameter set.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Resolves the output directory: explicit flag, then the LCA_OUT_DIR
/// environment variable, then the working directory.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("LCA_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

pub fn comment_line(subcommand: &str, params: &str) -> String {
    format!("# lca v{VERSION} {subcommand} {params}\n")
}

pub fn write_with_comment(path: &Path, comment: &str, body: &str) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating output directory {}", parent.display()))?;
        }
    }
    fs::write(path, format!("{comment}{body}"))
        .with_context(|| format!("writing {}", path.display()))
}
