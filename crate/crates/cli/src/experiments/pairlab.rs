//! `steinlab pairlab`: drift / diffusion / third-moment condition checks
//! for the geodesic exchangeable pair at several base points, plus the
//! statistical exchangeability test and its biased negative control.

use serde_json::json;
use steinlab_core::eigenfunctions::SampleSpace;
use steinlab_core::exchangeable_lab::{
    condition_checks, exchangeability_check, exchangeability_check_with_mode, ConditionReport,
    PairMode,
};
use steinlab_core::sampling::{sample_sphere, sample_torus, SeededStream};

use crate::config::{materialize_spec, ConfigError, ConfigResult, Resolved};

use super::{row_prefix, Assertion, Outcome, PlotSeries};

pub fn run(r: &Resolved) -> ConfigResult<Outcome> {
    let spec = materialize_spec(r)?;
    let n = spec.ambient_dim();
    let mut point_rng = SeededStream::new(r.seed, r.stream ^ 0xba5e_0001).rng();
    let mut reports: Vec<(usize, ConditionReport, ConditionReport, ConditionReport)> =
        Vec::new();
    for idx in 0..r.base_points {
        let x = match spec.space() {
            SampleSpace::Sphere(_) => sample_sphere(n, &mut point_rng),
            SampleSpace::Torus(_) => sample_torus(n, &mut point_rng),
        };
        let stream = SeededStream::new(r.seed, r.stream.wrapping_add((idx as u64 + 1) << 32));
        let (drift, diffusion, third) =
            condition_checks(&spec, &x, &r.eps, r.draws, stream)
                .map_err(|e| ConfigError(format!("pairlab: {e}")))?;
        reports.push((idx, drift, diffusion, third));
    }

    let ex_stream = SeededStream::new(r.seed, r.stream ^ 0xba5e_0002);
    let exchangeability = exchangeability_check(&spec, r.eps[0], r.draws, ex_stream)
        .map_err(|e| ConfigError(format!("exchangeability: {e}")))?;
    let control = exchangeability_check_with_mode(
        &spec,
        r.eps[0],
        r.draws,
        SeededStream::new(r.seed, r.stream ^ 0xba5e_0003),
        PairMode::BiasedFixedDirection,
    )
    .map_err(|e| ConfigError(format!("negative control: {e}")))?;

    let mut assertions = Vec::new();
    for (idx, drift, diffusion, third) in &reports {
        assertions.push(Assertion::check(
            &format!("drift_within_4se_point{idx}"),
            drift.residuals_within(4.0),
            format!("rows: {:?}", summarize(drift)),
        ));
        assertions.push(Assertion::check(
            &format!("diffusion_within_4se_point{idx}"),
            diffusion.residuals_within(4.0),
            format!("rows: {:?}", summarize(diffusion)),
        ));
        // With an exactly-halving grid the third moment should halve per
        // step; otherwise just require decay.
        let halving = r
            .eps
            .windows(2)
            .all(|w| (w[1] / w[0] - 0.5).abs() < 1e-12);
        let ratios = third.decay_ratios();
        let third_ok = if halving {
            ratios.iter().all(|&q| (0.3..0.7).contains(&q))
        } else {
            ratios.iter().all(|&q| q < 1.0)
        };
        assertions.push(Assertion::check(
            &format!("third_moment_decay_point{idx}"),
            third_ok || r.eps.len() < 2,
            format!("ratios: {ratios:?}"),
        ));
        if let Some(slope) = third.loglog_slope {
            assertions.push(Assertion::check(
                &format!("third_moment_loglog_slope_point{idx}"),
                slope >= 0.7,
                format!("log-log decay slope {slope:.3} (threshold 0.7)"),
            ));
        }
    }
    assertions.push(Assertion::check(
        "exchangeability",
        exchangeability.pass,
        format!("stats: {:?}", exchangeability.stats),
    ));
    assertions.push(Assertion::check(
        "biased_control_fails",
        !control.pass,
        "the deliberately broken pair must fail the test".into(),
    ));

    let prefix = row_prefix(r);
    let mut csv_rows = Vec::new();
    for (idx, drift, diffusion, third) in &reports {
        for rep in [drift, diffusion, third] {
            for row in &rep.rows {
                csv_rows.push(format!(
                    "{prefix},{},{},{:.6},{:.8e},{:.4e},{:.8e},{:.4e}",
                    idx, rep.condition, row.eps, row.estimate, row.std_err, row.reference,
                    row.residual
                ));
            }
        }
    }

    // Mean |residual| per (condition, ε) across base points.
    let mut plot_rows = Vec::new();
    for condition in ["drift", "diffusion", "third_moment"] {
        for (i, &eps) in r.eps.iter().enumerate() {
            let values: Vec<f64> = reports
                .iter()
                .map(|(_, d, q, t)| match condition {
                    "drift" => d.rows[i].residual.abs(),
                    "diffusion" => q.rows[i].residual.abs(),
                    _ => t.rows[i].estimate,
                })
                .collect();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            plot_rows.push(format!("{condition},{eps},{mean:.8e}"));
        }
    }

    Ok(Outcome {
        data: json!({
            "family": spec.family_name(),
            "dimension": n,
            "eps": r.eps,
            "draws": r.draws,
            "conditions": reports
                .iter()
                .map(|(idx, d, q, t)| json!({
                    "point": idx,
                    "drift": d,
                    "diffusion": q,
                    "third_moment": t,
                }))
                .collect::<Vec<_>>(),
            "exchangeability": exchangeability,
            "negative_control": control,
        }),
        csv_header:
            "fingerprint,seed,point,condition,eps,estimate,std_err,reference,residual".into(),
        csv_rows,
        plots: vec![PlotSeries {
            name: "residual_vs_eps".into(),
            header: "condition,eps,mean_abs_residual".into(),
            rows: plot_rows,
        }],
        assertions,
    })
}

fn summarize(report: &ConditionReport) -> Vec<String> {
    report
        .rows
        .iter()
        .map(|r| {
            format!(
                "eps={} resid={:.3e} se={:.3e}",
                r.eps, r.residual, r.std_err
            )
        })
        .collect()
}
