//! `steinlab`: experiment runner for eigenfunction value-distribution
//! studies. Subcommands map onto the library's modules; experiments are
//! described by an optional JSON config with flag overrides and emit
//! results.json / results.csv / plot/*.csv.
//!
//! Exit codes: 0 success, 1 invalid configuration or runtime failure,
//! 2 assertion failure under `--assert`.

mod config;
mod experiments;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{resolve, ConfigError, ExperimentKind, Overrides};

#[derive(Parser)]
#[command(
    name = "steinlab",
    version,
    about = "Exact and Monte Carlo experiments on the normality of Laplacian eigenfunction value distributions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// JSON experiment config; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Eigenfunction spec JSON file (family tag + fields).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Base stream id for sample streams.
    #[arg(long)]
    stream: Option<u64>,
    /// Monte Carlo sample count N.
    #[arg(long)]
    samples: Option<u64>,
    /// Number of equiprobable-normal cells K for tv_hat.
    #[arg(long)]
    bins: Option<usize>,
    /// Worker thread cap (further capped by STEINLAB_THREADS). Results do
    /// not depend on this value.
    #[arg(long)]
    shards: Option<usize>,
    /// Exit with code 2 if any experiment assertion fails.
    #[arg(long = "assert")]
    assert_mode: bool,
    /// Output directory (default steinlab-out).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact sphere moments with a Monte Carlo cross-check.
    Moments {
        #[command(flatten)]
        common: CommonArgs,
        /// Ambient dimension (default 5).
        #[arg(long)]
        n: Option<usize>,
        /// Maximum total degree of the enumerated even multi-indices.
        #[arg(long)]
        max_degree: Option<u32>,
    },
    /// Evaluate the exact family bound and the generic Monte Carlo bound.
    Bounds {
        #[command(flatten)]
        common: CommonArgs,
        /// Override μ for the Monte Carlo bound.
        #[arg(long)]
        mu: Option<f64>,
    },
    /// Estimate the distance of f(X) to the standard normal.
    Tv {
        #[command(flatten)]
        common: CommonArgs,
        /// Which metric gates the assertions: tv, ks or both.
        #[arg(long)]
        metric: Option<String>,
    },
    /// Drift/diffusion/third-moment checks for the geodesic pair.
    Pairlab {
        #[command(flatten)]
        common: CommonArgs,
        /// Strictly decreasing step sizes, comma separated.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        /// Antithetic pair count per (point, eps).
        #[arg(long)]
        draws: Option<u64>,
        /// Number of random base points.
        #[arg(long)]
        base_points: Option<usize>,
    },
    /// Verify the combinatorial identities exactly.
    Identities {
        #[command(flatten)]
        common: CommonArgs,
        /// Largest (odd) degree checked.
        #[arg(long)]
        max_ell: Option<u32>,
        /// Largest p for the hypergeometric inner sum.
        #[arg(long)]
        max_p: Option<u32>,
    },
    /// Merge results.json files from earlier runs into one table.
    Report {
        #[command(flatten)]
        common: CommonArgs,
        /// results.json files to merge (repeatable).
        #[arg(long = "input")]
        inputs: Vec<PathBuf>,
    },
    /// Rerun a base experiment (tv, bounds or pairlab) over a parameter
    /// grid: n, ell, N (samples), K (bins) or eps.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        parameter: Option<String>,
        /// Grid values, comma separated.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        /// Base experiment kind (default tv).
        #[arg(long)]
        base: Option<String>,
    },
}

fn overrides(common: &CommonArgs) -> Overrides {
    Overrides {
        config: common.config.clone(),
        spec_path: common.spec.clone(),
        seed: common.seed,
        stream: common.stream,
        samples: common.samples,
        bins: common.bins,
        shards: common.shards,
        out_dir: common.out_dir.clone(),
        assert_mode: common.assert_mode,
        ..Overrides::default()
    }
}

fn split(cli: Cli) -> (ExperimentKind, Overrides) {
    match cli.command {
        Command::Moments { common, n, max_degree } => {
            let mut o = overrides(&common);
            o.n = n;
            o.max_degree = max_degree;
            (ExperimentKind::Moments, o)
        }
        Command::Bounds { common, mu } => {
            let mut o = overrides(&common);
            o.mu = mu;
            (ExperimentKind::Bounds, o)
        }
        Command::Tv { common, metric } => {
            let mut o = overrides(&common);
            o.metric = metric;
            (ExperimentKind::Tv, o)
        }
        Command::Pairlab {
            common,
            eps,
            draws,
            base_points,
        } => {
            let mut o = overrides(&common);
            o.eps = eps;
            o.draws = draws;
            o.base_points = base_points;
            (ExperimentKind::Pairlab, o)
        }
        Command::Identities {
            common,
            max_ell,
            max_p,
        } => {
            let mut o = overrides(&common);
            o.max_ell = max_ell;
            o.max_p = max_p;
            (ExperimentKind::Identities, o)
        }
        Command::Report { common, inputs } => {
            let mut o = overrides(&common);
            o.inputs = inputs;
            (ExperimentKind::Report, o)
        }
        Command::Sweep {
            common,
            parameter,
            values,
            base,
        } => {
            let mut o = overrides(&common);
            o.sweep_parameter = parameter;
            o.sweep_values = values;
            o.sweep_base = base;
            (ExperimentKind::Sweep, o)
        }
    }
}

/// Caps the rayon worker count from --shards and STEINLAB_THREADS. The
/// outputs are identical for any setting; this only controls parallelism.
fn setup_threads(shards: Option<usize>) {
    let env_cap = std::env::var("STEINLAB_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok());
    let threads = match (shards, env_cap) {
        (Some(s), Some(e)) => Some(s.min(e)),
        (Some(s), None) => Some(s),
        (None, Some(e)) => Some(e),
        (None, None) => None,
    };
    if let Some(t) = threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global();
    }
}

fn run(kind: ExperimentKind, flags: Overrides) -> Result<bool, ConfigError> {
    let resolved = resolve(kind, flags)?;
    setup_threads(resolved.shards);
    let fingerprint = resolved.fingerprint();
    let outcome = experiments::run(&resolved)?;
    let config_json = serde_json::to_value(&resolved)
        .map_err(|e| ConfigError(format!("serializing config: {e}")))?;
    let written = output::write_outputs(
        &resolved.out_dir,
        &fingerprint,
        kind.name(),
        config_json,
        &outcome,
    )
    .map_err(|e| ConfigError(format!("writing outputs: {e}")))?;

    println!(
        "{} [{}] -> {} {}",
        kind.name(),
        fingerprint,
        written.results_json.display(),
        written.results_csv.display()
    );
    for plot in &written.plots {
        println!("  plot: {}", plot.display());
    }
    let mut any_failed = false;
    for assertion in &outcome.assertions {
        let status = if assertion.pass { "PASS" } else { "FAIL" };
        println!("  {status} {}: {}", assertion.name, assertion.detail);
        any_failed |= !assertion.pass;
    }
    Ok(any_failed && resolved.assert_mode)
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version are not errors.
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let (kind, flags) = split(cli);
    match run(kind, flags) {
        Ok(false) => {}
        Ok(true) => std::process::exit(2),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
