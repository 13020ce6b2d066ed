//! `steinlab moments`: exact sphere moments for every even multi-index up
//! to a degree, with a seeded Monte Carlo cross-check.

use serde_json::json;
use steinlab_core::sampling::{sample_sphere, run_blocks};
use steinlab_core::sphere_moments::{monomial_moment, MultiIndex};
use steinlab_core::stats::MeanAccumulator;

use crate::config::{ConfigError, ConfigResult, Resolved};

use super::{row_prefix, Assertion, Outcome};

/// Every multi-index with even exponents and total degree ≤ `max_deg`.
pub fn even_multi_indices(n: usize, max_deg: u32) -> Vec<Vec<(usize, u32)>> {
    fn extend(
        n: usize,
        max_deg: u32,
        start: usize,
        used: u32,
        current: &mut Vec<(usize, u32)>,
        out: &mut Vec<Vec<(usize, u32)>>,
    ) {
        for idx in start..n {
            let mut exp = 2u32;
            while used + exp <= max_deg {
                current.push((idx, exp));
                out.push(current.clone());
                extend(n, max_deg, idx + 1, used + exp, current, out);
                current.pop();
                exp += 2;
            }
        }
    }
    let mut out = Vec::new();
    extend(n, max_deg, 0, 0, &mut Vec::new(), &mut out);
    out
}

fn index_label(exps: &[(usize, u32)]) -> String {
    exps.iter()
        .map(|(i, e)| format!("x{i}^{e}"))
        .collect::<Vec<_>>()
        .join("*")
}

pub fn run(r: &Resolved) -> ConfigResult<Outcome> {
    let n = r.n.unwrap_or(5);
    if n < 2 {
        return Err(ConfigError(format!("moments requires n >= 2, got {n}")));
    }
    let indices = even_multi_indices(n, r.max_degree);
    let exact: Vec<_> = indices
        .iter()
        .map(|exps| {
            monomial_moment(n, &MultiIndex::new(n, exps.iter().copied()).unwrap())
                .map_err(|e| ConfigError(format!("moments: {e}")))
        })
        .collect::<ConfigResult<Vec<_>>>()?;

    // Monte Carlo estimate of every index from one shared sample stream.
    let block_results = run_blocks(r.tv_stream(), r.samples, |rng, count, _| {
        let mut accs = vec![MeanAccumulator::new(); indices.len()];
        for _ in 0..count {
            let x = sample_sphere(n, rng);
            for (acc, exps) in accs.iter_mut().zip(&indices) {
                acc.push(exps.iter().map(|&(i, e)| x[i].powi(e as i32)).product());
            }
        }
        accs
    });
    let mut accs = vec![MeanAccumulator::new(); indices.len()];
    for block in &block_results {
        for (total, b) in accs.iter_mut().zip(block) {
            total.merge(b);
        }
    }

    let prefix = row_prefix(r);
    let mut csv_rows = Vec::with_capacity(indices.len());
    let mut worst_z: f64 = 0.0;
    let mut rows_json = Vec::new();
    for ((exps, moment), acc) in indices.iter().zip(&exact).zip(&accs) {
        let exact_f = moment.to_f64();
        let z = if acc.std_err() > 0.0 {
            (acc.mean() - exact_f).abs() / acc.std_err()
        } else {
            0.0
        };
        worst_z = worst_z.max(z);
        let degree: u32 = exps.iter().map(|&(_, e)| e).sum();
        csv_rows.push(format!(
            "{prefix},{},{},{},{},{:.10e},{:.10e},{:.6e},{:.3}",
            index_label(exps),
            degree,
            moment.numer(),
            moment.denom(),
            exact_f,
            acc.mean(),
            acc.std_err(),
            z
        ));
        rows_json.push(json!({
            "index": index_label(exps),
            "degree": degree,
            "exact": moment,
            "mc_mean": acc.mean(),
            "mc_std_err": acc.std_err(),
            "z_score": z,
        }));
    }
    let pass = worst_z <= 4.0;
    Ok(Outcome {
        data: json!({
            "n": n,
            "max_degree": r.max_degree,
            "samples": r.samples,
            "worst_z_score": worst_z,
            "moments": rows_json,
        }),
        csv_header:
            "fingerprint,seed,index,degree,exact_num,exact_den,exact,mc_mean,mc_std_err,z"
                .into(),
        csv_rows,
        plots: vec![],
        assertions: vec![Assertion::check(
            "mc_within_4_std_errs",
            pass,
            format!("worst |z| = {worst_z:.3} over {} indices", indices.len()),
        )],
    })
}
