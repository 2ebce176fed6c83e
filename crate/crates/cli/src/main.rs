//! `wl2`: reproducible experiments over the wl2-core constructions.
//!
//! Exit codes: 0 when every verification passes, 1 when one fails (or a
//! premise of the construction does not hold), 2 on usage errors.

mod commands;
mod output;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

use wl2_core::Tolerances;

#[derive(Debug, Parser, Serialize)]
#[command(name = "wl2", version, about = "Weighted l2 Fourier constructions on the circle")]
pub struct Cli {
    /// Directory receiving reports and the run manifest.
    #[arg(long, global = true, env = "WL2_OUTPUT_DIR", default_value = "wl2-out")]
    pub output_dir: PathBuf,

    /// Seed for randomized sweeps.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Use all cores for internal parallel loops (results are identical either way).
    #[arg(long, global = true)]
    pub parallel: bool,

    /// Tolerance override, e.g. `--tol tau_supp=1e-8`; repeatable.
    #[arg(long = "tol", global = true, value_name = "KEY=VALUE", value_parser = parse_tol)]
    pub tol: Vec<(String, f64)>,

    #[command(subcommand)]
    pub command: Command,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected KEY=VALUE")?;
    let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    Tolerances::default().set(k.trim(), v)?;
    Ok((k.trim().to_string(), v))
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Weight diagnostics.
    #[command(subcommand)]
    Weights(WeightsCmd),
    /// Building blocks.
    #[command(subcommand)]
    Block(BlockCmd),
    /// Localizing functions.
    #[command(subcommand)]
    Localizer(LocalizerCmd),
    /// Finite-stage deletion runs.
    #[command(subcommand)]
    Baire(BaireCmd),
    /// Continuous function with divergent weighted energy.
    #[command(subcommand)]
    Appendix(AppendixCmd),
    /// Weights forcing full support.
    #[command(subcommand)]
    Iistrong(IiStrongCmd),
    /// Korner-Meyer hypothesis values.
    #[command(subcommand)]
    Km(KmCmd),
    /// Representation counts.
    #[command(subcommand)]
    Sidon(SidonCmd),
}

/// Weight sequence: a power weight `(1+n)^gamma` or a CSV table `n,value`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct WeightArgs {
    /// Exponent of the power weight (1+n)^gamma.
    #[arg(long, conflicts_with = "weights_csv")]
    pub gamma: Option<f64>,
    /// CSV file with header `n,value`.
    #[arg(long)]
    pub weights_csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightsCmd {
    /// Doubling constant, M estimate, summation constants and divergence witness.
    Check {
        #[command(flatten)]
        weight: WeightArgs,
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
        #[arg(long, default_value_t = 5.0)]
        target: f64,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockCmd {
    /// Build and verify g_{eta,M,S}.
    Build {
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        s: u32,
        #[arg(long, default_value_t = 8192)]
        grid: usize,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalizerCmd {
    /// Build and verify psi_eps.
    Build {
        #[command(flatten)]
        weight: WeightArgs,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 16384)]
        grid: usize,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaireCmd {
    /// Delete arcs at equally spaced points from (1, circle).
    Run {
        #[command(flatten)]
        weight: WeightArgs,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 16384)]
        grid: usize,
        /// Budgets b_k = first * geom^k.
        #[arg(long, default_value_t = 0.5)]
        budget_geom: f64,
        #[arg(long, default_value_t = 1.0)]
        budget_first: f64,
        #[arg(long, default_value_t = 0.2)]
        eps_init: f64,
        #[arg(long, default_value_t = 12)]
        max_halvings: usize,
        /// Shrink factor delta of the initial smoothing (1 - delta/2).
        #[arg(long, default_value_t = 0.0)]
        prepare_delta: f64,
        /// Keep the raw product instead of restoring the mean.
        #[arg(long)]
        no_renormalize: bool,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AppendixCmd {
    /// Build f = sum_j lambda_{n_j}^{-1/2} zeta^{n_j} T0 over J blocks.
    Divergence {
        /// Exponent of the weight (1+n)^gamma.
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 20)]
        blocks: usize,
        /// Fejer order of T0.
        #[arg(long, default_value_t = 64)]
        k: usize,
        #[arg(long, default_value_t = 4096)]
        grid: usize,
        #[arg(long, default_value_t = 1 << 22)]
        cap: usize,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IiStrongCmd {
    /// Build the interpolated weight and check its invariants.
    Build {
        /// `identity`, `xlog`, or `power:P`.
        #[arg(long, default_value = "identity")]
        phi: String,
        /// CSV table `x,phi` overriding --phi.
        #[arg(long)]
        phi_table: Option<PathBuf>,
        #[arg(long, default_value_t = 6)]
        stages: usize,
        #[arg(long, default_value_t = 1)]
        stretch: usize,
        /// Comma-separated eps_1 > eps_2 > ...; default 2^{1-k}.
        #[arg(long)]
        eps: Option<String>,
        /// Random unit-ball vectors for the tail-sup check.
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KmCmd {
    /// Evaluate both hypotheses and the support gap of a coefficient CSV.
    Test {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 16384)]
        grid: usize,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Auto,
    Exhaustive,
    Mitm,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SidonCmd {
    /// R(n, Gamma) for one n.
    Count {
        #[arg(long)]
        set: Option<String>,
        #[arg(long)]
        set_file: Option<PathBuf>,
        #[arg(long)]
        n: i64,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
    /// sup_n R(n, Gamma) against 3^{gamma |Gamma|}.
    Profile {
        #[arg(long)]
        set: Option<String>,
        #[arg(long)]
        set_file: Option<PathBuf>,
        #[arg(long)]
        gamma: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
