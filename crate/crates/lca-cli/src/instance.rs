//! Shared parameter bundles for the subcommands.

use anyhow::{bail, Context};
use lca_core::{generate_instance, GroundTruth, Method, Problem, SolverConfig};

/// Generator parameters: dimensions, sparsity, noise, seed, threshold.
#[derive(Clone, Copy, Debug)]
pub struct InstanceParams {
    pub m: usize,
    pub n: usize,
    pub s: usize,
    pub noise: f64,
    pub seed: u64,
    pub lambda: f64,
}

impl InstanceParams {
    pub fn generate(&self) -> anyhow::Result<(Problem, GroundTruth)> {
        generate_instance(self.seed, self.m, self.n, self.s, self.noise, self.lambda)
            .context("instance generation failed")
    }

    pub fn describe(&self) -> String {
        format!(
            "m={} n={} s={} noise={} seed={} lambda={}",
            self.m, self.n, self.s, self.noise, self.seed, self.lambda
        )
    }
}

/// Parses the `--gen` bundle: comma-separated `key=value` pairs with keys
/// m, n, s, noise, seed.
pub fn parse_gen_bundle(bundle: &str, lambda: f64) -> anyhow::Result<InstanceParams> {
    let mut m = None;
    let mut n = None;
    let mut s = None;
    let mut noise = 0.0f64;
    let mut seed = 0u64;
    for part in bundle.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (key, value) = part
            .split_once('=')
            .with_context(|| format!("--gen entry `{part}` is not key=value"))?;
        match key {
            "m" => m = Some(value.parse().with_context(|| format!("--gen m=`{value}`"))?),
            "n" => n = Some(value.parse().with_context(|| format!("--gen n=`{value}`"))?),
            "s" => s = Some(value.parse().with_context(|| format!("--gen s=`{value}`"))?),
            "noise" => noise = value.parse().with_context(|| format!("--gen noise=`{value}`"))?,
            "seed" => seed = value.parse().with_context(|| format!("--gen seed=`{value}`"))?,
            other => bail!("--gen has unknown key `{other}` (expected m,n,s,noise,seed)"),
        }
    }
    let m = m.context("--gen is missing `m`")?;
    let n = n.unwrap_or(2 * m);
    let s = s.context("--gen is missing `s`")?;
    Ok(InstanceParams {
        m,
        n,
        s,
        noise,
        seed,
        lambda,
    })
}

/// Solver knobs shared by the subcommands.
#[derive(Clone, Copy, Debug)]
pub struct SolverParams {
    pub tau: f64,
    pub dt: f64,
    pub residual_tol: f64,
    pub max_time: Option<f64>,
    pub record_stride: usize,
    pub rk4: bool,
}

impl SolverParams {
    pub fn config(&self) -> SolverConfig {
        let mut config = SolverConfig::for_tau(self.tau);
        config.dt = self.dt;
        config.residual_tol = self.residual_tol;
        config.max_time = self.max_time.unwrap_or(100.0 * self.tau);
        config.record_stride = self.record_stride;
        config.method = if self.rk4 { Method::Rk4 } else { Method::Euler };
        config
    }

    pub fn describe(&self) -> String {
        format!(
            "tau={} dt={} residual_tol={} max_time={} record_stride={} method={}",
            self.tau,
            self.dt,
            self.residual_tol,
            self.max_time.unwrap_or(100.0 * self.tau),
            self.record_stride,
            if self.rk4 { "rk4" } else { "euler" }
        )
    }
}
