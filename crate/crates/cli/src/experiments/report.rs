//! `steinlab report`: merge results.json files from earlier runs into one
//! stacked table.

use serde::Deserialize;
use serde_json::json;

use crate::config::{parse_json_file, ConfigResult, Resolved};

use super::Outcome;

#[derive(Deserialize)]
struct StoredResults {
    fingerprint: String,
    kind: String,
    csv: StoredCsv,
    #[serde(default)]
    assertions: Vec<serde_json::Value>,
}

#[derive(Deserialize)]
struct StoredCsv {
    header: String,
    rows: Vec<String>,
}

pub fn run(r: &Resolved) -> ConfigResult<Outcome> {
    let mut sections: Vec<(String, Vec<String>)> = Vec::new();
    let mut summary = Vec::new();
    for path in &r.inputs {
        let stored: StoredResults = parse_json_file(path)?;
        summary.push(json!({
            "path": path.display().to_string(),
            "fingerprint": stored.fingerprint,
            "kind": stored.kind,
            "rows": stored.csv.rows.len(),
            "assertions": stored.assertions,
        }));
        match sections.iter_mut().find(|(h, _)| *h == stored.csv.header) {
            Some((_, rows)) => rows.extend(stored.csv.rows),
            None => sections.push((stored.csv.header, stored.csv.rows)),
        }
    }
    // Stack sections; each keeps its own header line.
    let mut csv_rows = Vec::new();
    let csv_header = sections
        .first()
        .map(|(h, _)| h.clone())
        .unwrap_or_default();
    for (i, (header, rows)) in sections.iter().enumerate() {
        if i > 0 {
            csv_rows.push(String::new());
            csv_rows.push(header.clone());
        }
        csv_rows.extend(rows.iter().cloned());
    }
    Ok(Outcome {
        data: json!({
            "inputs": summary,
            "sections": sections.len(),
        }),
        csv_header,
        csv_rows,
        plots: vec![],
        assertions: vec![],
    })
}
