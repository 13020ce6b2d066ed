//! `steinlab identities`: the exact combinatorial identity table.

use serde_json::json;
use steinlab_core::exact_arith::Rational;
use steinlab_core::identity_verifier::{
    appendix_sum, chu_vandermonde, claim_check, hypergeom_inner_sum, IdentityResult,
};

use crate::config::{ConfigError, ConfigResult, Resolved};

use super::{row_prefix, Assertion, Outcome};

pub fn run(r: &Resolved) -> ConfigResult<Outcome> {
    let mut results: Vec<IdentityResult> = Vec::new();
    let map_err = |e: steinlab_core::identity_verifier::IdentityError| {
        ConfigError(format!("identities: {e}"))
    };
    for ell in (1..=r.max_ell).filter(|l| l % 2 == 1) {
        results.push(appendix_sum(ell).map_err(map_err)?);
        results.push(claim_check(ell).map_err(map_err)?);
    }
    for p in 0..=r.max_p {
        for k in 0..=p {
            results.push(hypergeom_inner_sum(p, k).map_err(map_err)?);
        }
    }
    // A small Chu-Vandermonde battery over integer and half-integer
    // parameters.
    let pairs = [
        (Rational::from_int(1), Rational::from_int(3)),
        (Rational::new(1, 2), Rational::new(5, 2)),
        (Rational::new(3, 2), Rational::new(7, 3)),
    ];
    for n in 0..=5u32 {
        for (b, c) in &pairs {
            results.push(chu_vandermonde(n, b, c).map_err(map_err)?);
        }
    }

    let prefix = row_prefix(r);
    let csv_rows: Vec<String> = results
        .iter()
        .map(|res| {
            format!(
                "{prefix},{},{},{},{},{}",
                res.identity,
                res.params.replace(',', ";"),
                res.computed,
                res.expected,
                res.pass
            )
        })
        .collect();
    let all_pass = results.iter().all(|res| res.pass);
    let failures: Vec<&IdentityResult> = results.iter().filter(|res| !res.pass).collect();
    let assertions = vec![Assertion::check(
        "all_identities_exact",
        all_pass,
        if all_pass {
            format!("{} identities verified exactly", results.len())
        } else {
            format!("{} identities failed: {failures:?}", failures.len())
        },
    )];
    Ok(Outcome {
        data: json!({
            "count": results.len(),
            "all_pass": all_pass,
            "results": results,
        }),
        csv_header: "fingerprint,seed,identity,params,computed,expected,pass".into(),
        csv_rows,
        plots: vec![],
        assertions,
    })
}
