//! Experiment implementations behind the CLI subcommands. Each returns an
//! [`Outcome`]: a JSON payload, flat CSV rows stamped with the config
//! fingerprint and seed, optional plot series, and the assertions that
//! `--assert` turns into the exit code.

pub mod bounds;
pub mod identities;
pub mod moments;
pub mod pairlab;
pub mod report;
pub mod sweep;
pub mod tv;

use steinlab_core::eigenfunctions::EigenfunctionSpec;
use steinlab_core::stein_bounds::{
    degree_l_bound, quadratic_bound, torus_bound, BoundReport,
};

use crate::config::{ConfigResult, ExperimentKind, Resolved};

#[derive(Clone, Debug)]
pub struct PlotSeries {
    pub name: String,
    pub header: String,
    pub rows: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Assertion {
    pub fn check(name: &str, pass: bool, detail: String) -> Self {
        Assertion {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub data: serde_json::Value,
    pub csv_header: String,
    pub csv_rows: Vec<String>,
    pub plots: Vec<PlotSeries>,
    pub assertions: Vec<Assertion>,
}

/// Fingerprint + seed prefix shared by every CSV row of a run.
pub fn row_prefix(r: &Resolved) -> String {
    format!("{},{}", r.fingerprint(), r.seed)
}

pub fn run(r: &Resolved) -> ConfigResult<Outcome> {
    match r.kind {
        ExperimentKind::Identities => identities::run(r),
        ExperimentKind::Moments => moments::run(r),
        ExperimentKind::Bounds => bounds::run(r),
        ExperimentKind::Tv => tv::run(r),
        ExperimentKind::Pairlab => pairlab::run(r),
        ExperimentKind::Report => report::run(r),
        ExperimentKind::Sweep => sweep::run(r),
    }
}

/// CSV header a sub-experiment of the given kind produces (used by sweep
/// to prepend the swept column).
pub fn run_header(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Tv => {
            "fingerprint,seed,family,n,mu,samples,bins,tv_hat,ks_stat,slack,bound_value,bound_vacuous"
        }
        ExperimentKind::Bounds => {
            "fingerprint,seed,family,dimension,mu,bound_value,method,vacuous,standard_error,samples,seed,stream_id,terms"
        }
        ExperimentKind::Pairlab => {
            "fingerprint,seed,point,condition,eps,estimate,std_err,reference,residual"
        }
        _ => "",
    }
}

/// The family's own exact bound, when it has one.
pub fn family_bound(
    spec: &EigenfunctionSpec,
    mu_hint: Option<f64>,
) -> ConfigResult<BoundReport> {
    let report = match spec {
        EigenfunctionSpec::Quadratic(q) => quadratic_bound(q.spectrum()),
        EigenfunctionSpec::Gegenbauer(g) => {
            degree_l_bound(g.degree(), g.dimension(), g.coefficients())
        }
        EigenfunctionSpec::Torus(t) => {
            // μ is overridden exactly only through config rationals; the
            // float hint is matched against the default mean when given.
            let _ = mu_hint;
            torus_bound(t.frequency_set(), None)
        }
    };
    report.map_err(|e| crate::config::ConfigError(format!("bound evaluation: {e}")))
}
