//! File emission: results.json, results.csv and plot/*.csv under the
//! experiment's output directory. Nothing is written until an experiment
//! has fully succeeded, so failed runs leave no partial outputs.

use std::io;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::experiments::Outcome;

pub struct WrittenFiles {
    pub results_json: PathBuf,
    pub results_csv: PathBuf,
    pub plots: Vec<PathBuf>,
}

pub fn write_outputs(
    out_dir: &Path,
    fingerprint: &str,
    kind: &str,
    config: serde_json::Value,
    outcome: &Outcome,
) -> io::Result<WrittenFiles> {
    std::fs::create_dir_all(out_dir)?;
    let results_json = out_dir.join("results.json");
    let doc = json!({
        "fingerprint": fingerprint,
        "kind": kind,
        "config": config,
        "data": outcome.data,
        "assertions": outcome
            .assertions
            .iter()
            .map(|a| json!({"name": a.name, "pass": a.pass, "detail": a.detail}))
            .collect::<Vec<_>>(),
        "csv": {
            "header": outcome.csv_header,
            "rows": outcome.csv_rows,
        },
    });
    std::fs::write(
        &results_json,
        serde_json::to_string_pretty(&doc)? + "\n",
    )?;

    let results_csv = out_dir.join("results.csv");
    let mut csv = String::with_capacity(1024);
    csv.push_str(&outcome.csv_header);
    csv.push('\n');
    for row in &outcome.csv_rows {
        csv.push_str(row);
        csv.push('\n');
    }
    std::fs::write(&results_csv, csv)?;

    let mut plots = Vec::new();
    if !outcome.plots.is_empty() {
        let plot_dir = out_dir.join("plot");
        std::fs::create_dir_all(&plot_dir)?;
        for series in &outcome.plots {
            let path = plot_dir.join(format!("{}.csv", series.name));
            let mut text = String::new();
            text.push_str(&series.header);
            text.push('\n');
            for row in &series.rows {
                text.push_str(row);
                text.push('\n');
            }
            std::fs::write(&path, text)?;
            plots.push(path);
        }
    }
    Ok(WrittenFiles {
        results_json,
        results_csv,
        plots,
    })
}
