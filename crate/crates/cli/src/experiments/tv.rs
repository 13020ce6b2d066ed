//! `steinlab tv`: empirical distance of f(X) to the standard normal, with
//! per-bin counts emitted for external plotting.

use serde_json::json;
use steinlab_core::tv_estimation::{
    bin_counts, ks_stat, normal_cell_bounds, sample_values, tv_hat, tv_slack,
};

use crate::config::{materialize_spec, ConfigError, ConfigResult, Metric, Resolved};

use super::{family_bound, row_prefix, Assertion, Outcome, PlotSeries};

pub fn run(r: &Resolved) -> ConfigResult<Outcome> {
    let spec = materialize_spec(r)?;
    let stream = r.tv_stream();
    let sample = sample_values(&spec, r.samples, stream)
        .map_err(|e| ConfigError(format!("sampling: {e}")))?;
    let tv = tv_hat(&sample, r.bins).map_err(|e| ConfigError(format!("tv_hat: {e}")))?;
    let ks = ks_stat(&sample);
    let slack = tv_slack(r.bins, r.samples);
    let bound = family_bound(&spec, r.mu)?;

    let mut assertions = Vec::new();
    if matches!(r.metric, Metric::Tv | Metric::Both) {
        let cap = bound.bound_value + slack;
        assertions.push(Assertion::check(
            "tv_below_bound_plus_slack",
            bound.vacuous || tv <= cap,
            format!(
                "tv_hat = {tv:.5} vs bound {:.5} + slack {slack:.5}{}",
                bound.bound_value,
                if bound.vacuous { " (bound vacuous)" } else { "" }
            ),
        ));
    }
    if matches!(r.metric, Metric::Both) {
        assertions.push(Assertion::check(
            "ks_below_tv_plus_slack",
            ks <= tv + slack,
            format!("ks = {ks:.5} vs tv {tv:.5} + slack {slack:.5}"),
        ));
    }

    let counts = bin_counts(&sample, r.bins).map_err(|e| ConfigError(e.to_string()))?;
    let bounds = normal_cell_bounds(r.bins);
    let uniform = 1.0 / r.bins as f64;
    let plot_rows: Vec<String> = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let left = if k == 0 {
                "-inf".to_string()
            } else {
                format!("{:.9}", bounds[k - 1])
            };
            let right = if k == r.bins - 1 {
                "inf".to_string()
            } else {
                format!("{:.9}", bounds[k])
            };
            format!("{k},{left},{right},{c},{uniform:.9}")
        })
        .collect();

    let prefix = row_prefix(r);
    let row = format!(
        "{prefix},{},{},{:.6},{},{},{:.8},{:.8},{:.8},{:.8e},{}",
        spec.family_name(),
        spec.ambient_dim(),
        spec.mean_eigenvalue(),
        r.samples,
        r.bins,
        tv,
        ks,
        slack,
        bound.bound_value,
        bound.vacuous,
    );
    Ok(Outcome {
        data: json!({
            "family": spec.family_name(),
            "dimension": spec.ambient_dim(),
            "mu": spec.mean_eigenvalue(),
            "samples": r.samples,
            "bins": r.bins,
            "tv_hat": tv,
            "ks_stat": ks,
            "slack": slack,
            "sample_mean": sample.mean(),
            "sample_variance": sample.variance(),
            "bound": bound,
            "spec_fingerprint": spec.fingerprint(),
        }),
        csv_header:
            "fingerprint,seed,family,n,mu,samples,bins,tv_hat,ks_stat,slack,bound_value,bound_vacuous"
                .into(),
        csv_rows: vec![row],
        plots: vec![PlotSeries {
            name: "bins".into(),
            header: "bin,left,right,count,expected_mass".into(),
            rows: plot_rows,
        }],
        assertions,
    })
}
