//! `steinlab sweep`: rerun a base experiment over a parameter grid and
//! emit one row plus plot series per value.

use serde_json::json;

use crate::config::{config_err, ConfigResult, ExperimentKind, Resolved, SweepParam};

use super::{Assertion, Outcome, PlotSeries};

/// Stream spacing between sweep rows so their draws are independent.
const ROW_STREAM_STRIDE: u64 = 1 << 33;

pub fn run(r: &Resolved) -> ConfigResult<Outcome> {
    let (param, values) = r
        .sweep
        .clone()
        .expect("validated: sweep section present");
    let base_kind = r.sweep_base_kind();
    if !matches!(
        base_kind,
        ExperimentKind::Tv | ExperimentKind::Bounds | ExperimentKind::Pairlab
    ) {
        return config_err("sweep base must be tv, bounds or pairlab");
    }

    let mut csv_rows = Vec::new();
    let mut rows_json = Vec::new();
    let mut tv_plot = Vec::new();
    let mut bound_plot = Vec::new();
    let mut residual_plot = Vec::new();
    let mut assertions: Vec<Assertion> = Vec::new();

    for (i, &value) in values.iter().enumerate() {
        let mut sub = r.clone();
        sub.kind = base_kind;
        sub.sweep = None;
        sub.stream = r.stream.wrapping_add((i as u64 + 1) * ROW_STREAM_STRIDE);
        apply(&mut sub, param, value)?;
        let outcome = super::run(&sub)?;
        // One flat row per value: the sub-experiment's single headline row
        // (tv/bounds) or its first row (pairlab), prefixed by the value.
        for row in &outcome.csv_rows {
            csv_rows.push(format!("{},{}", format_value(param, value), row));
        }
        for assertion in outcome.assertions {
            assertions.push(Assertion {
                name: format!("{}[{}={}]", assertion.name, param_name(param), value),
                ..assertion
            });
        }
        if let Some(tv) = outcome.data.get("tv_hat").and_then(|v| v.as_f64()) {
            tv_plot.push(format!("{},{tv:.8e}", format_value(param, value)));
        }
        let bound_value = outcome
            .data
            .get("bound")
            .and_then(|b| b.get("bound_value"))
            .or_else(|| outcome.data.get("exact_bound").and_then(|b| b.get("bound_value")))
            .and_then(|v| v.as_f64());
        if let Some(b) = bound_value {
            bound_plot.push(format!("{},{b:.8e}", format_value(param, value)));
        }
        if base_kind == ExperimentKind::Pairlab {
            if let Some(conditions) = outcome.data.get("conditions").and_then(|c| c.as_array()) {
                let mut acc = 0.0;
                let mut count = 0usize;
                for point in conditions {
                    for cond in ["drift", "diffusion"] {
                        if let Some(rows) =
                            point.get(cond).and_then(|d| d.get("rows")).and_then(|x| x.as_array())
                        {
                            for row in rows {
                                if let Some(res) =
                                    row.get("residual").and_then(|v| v.as_f64())
                                {
                                    acc += res.abs();
                                    count += 1;
                                }
                            }
                        }
                    }
                }
                if count > 0 {
                    residual_plot.push(format!(
                        "{},{:.8e}",
                        format_value(param, value),
                        acc / count as f64
                    ));
                }
            }
        }
        rows_json.push(json!({
            "value": value,
            "data": outcome.data,
        }));
    }

    let mut plots = Vec::new();
    let pname = param_name(param);
    if !tv_plot.is_empty() {
        plots.push(PlotSeries {
            name: format!("tv_hat_vs_{pname}"),
            header: format!("{pname},tv_hat"),
            rows: tv_plot,
        });
    }
    if !bound_plot.is_empty() {
        plots.push(PlotSeries {
            name: format!("bound_vs_{pname}"),
            header: format!("{pname},bound_value"),
            rows: bound_plot,
        });
    }
    if !residual_plot.is_empty() {
        plots.push(PlotSeries {
            name: format!("residual_vs_{pname}"),
            header: format!("{pname},mean_abs_residual"),
            rows: residual_plot,
        });
    }

    // Reuse the sub-experiment's header with the swept value prepended.
    let sub_header = super::run_header(base_kind);
    Ok(Outcome {
        data: json!({
            "parameter": pname,
            "values": values,
            "base_kind": base_kind.name(),
            "rows": rows_json,
        }),
        csv_header: format!("{pname},{sub_header}"),
        csv_rows,
        plots,
        assertions,
    })
}

fn param_name(p: SweepParam) -> &'static str {
    match p {
        SweepParam::N => "n",
        SweepParam::Ell => "ell",
        SweepParam::Samples => "samples",
        SweepParam::Bins => "bins",
        SweepParam::Eps => "eps",
    }
}

fn format_value(p: SweepParam, v: f64) -> String {
    match p {
        SweepParam::Eps => format!("{v}"),
        _ => format!("{}", v as u64),
    }
}

fn apply(sub: &mut Resolved, param: SweepParam, value: f64) -> ConfigResult<()> {
    match param {
        SweepParam::N => {
            let n = value as usize;
            if n < 2 {
                return config_err(format!("swept n must be >= 2, got {value}"));
            }
            sub.n = Some(n);
            sub.spec = None; // force regeneration at the new dimension
        }
        SweepParam::Ell => {
            let ell = value as u32;
            let gen = sub
                .spec_gen
                .as_ref()
                .expect("validated: spec_gen present for ell sweeps")
                .with_degree(ell)?;
            sub.spec_gen = Some(gen);
            sub.spec = None;
        }
        SweepParam::Samples => {
            if value < 1.0 {
                return config_err("swept sample count must be positive");
            }
            sub.samples = value as u64;
        }
        SweepParam::Bins => {
            let bins = value as usize;
            if bins < 2 {
                return config_err("swept bin count must be at least 2");
            }
            sub.bins = bins;
        }
        SweepParam::Eps => {
            if value <= 0.0 {
                return config_err("swept eps must be positive");
            }
            sub.eps = vec![value];
        }
    }
    Ok(())
}
