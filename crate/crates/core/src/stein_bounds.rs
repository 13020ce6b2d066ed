//! Evaluators for every total-variation bound in scope: the closed-form
//! quadratic bound, the degree-l bound assembled from exact fourth moments,
//! the torus bound, and a Monte Carlo evaluation of the generic
//! `(2/μ) E|‖∇f‖² - E‖∇f‖²|` bound (plus the eigenvalue-spread term for
//! mixtures).
//!
//! Exact inputs stay exact: values that are square roots of rationals are
//! reported with their radicand, and the only irrational scale that ever
//! appears (`2√2 + √π`, from the spread-term constant algebra) is kept
//! symbolic.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigenfunctions::{
    harmonic_normalizer_squared, Coefficients, EigenError, EigenfunctionSpec, GegenbauerCombo,
    QuadraticHarmonic, SampleSpace, TorusFrequencySet,
};
use crate::exact_arith::Rational;
use crate::sampling::{run_blocks, sample_sphere, sample_torus, SeededStream};
use crate::sphere_moments::{
    expectation_of_square, polynomial_expectation, MomentError, MultiIndex, SpherePolynomial,
};
use crate::stats::MeanAccumulator;

#[derive(Debug, Error)]
pub enum BoundError {
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Moment(#[from] MomentError),
    #[error("μ must be positive, got {0}")]
    BadMu(f64),
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { got: u64, min: u64 },
}

/// Irrational constants that appear as exact scale factors in bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedScale {
    /// `2√2 + √π`; equal to `2(1 + √π/(2√2))·√2`, the spread-term constant.
    TwoSqrtTwoPlusSqrtPi,
}

impl NamedScale {
    pub fn value(self) -> f64 {
        match self {
            NamedScale::TwoSqrtTwoPlusSqrtPi => {
                2.0 * std::f64::consts::SQRT_2 + std::f64::consts::PI.sqrt()
            }
        }
    }
}

/// Exact form of a reported nonnegative real.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactReal {
    /// The value itself is rational.
    Rational(Rational),
    /// value = √radicand.
    SqrtRational { radicand: Rational },
    /// value = scale · √radicand.
    ScaledSqrt { scale: NamedScale, radicand: Rational },
}

impl ExactReal {
    pub fn to_f64(&self) -> f64 {
        match self {
            ExactReal::Rational(q) => q.to_f64(),
            ExactReal::SqrtRational { radicand } => radicand.to_f64().sqrt(),
            ExactReal::ScaledSqrt { scale, radicand } => {
                scale.value() * radicand.to_f64().sqrt()
            }
        }
    }
}

/// One labeled sub-quantity of a bound.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundTerm {
    pub label: String,
    pub value: f64,
    /// Present when the value is exact (rational or a rooted rational).
    pub exact: Option<ExactReal>,
}

impl BoundTerm {
    fn exact_term(label: &str, exact: ExactReal) -> Self {
        BoundTerm {
            label: label.to_string(),
            value: exact.to_f64(),
            exact: Some(exact),
        }
    }

    fn float_term(label: &str, value: f64) -> Self {
        BoundTerm {
            label: label.to_string(),
            value,
            exact: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleMeta {
    pub samples: u64,
    pub seed: u64,
    pub stream_id: u64,
    pub standard_error: f64,
}

/// A fully evaluated bound: `bound_value` is the sum of `terms`; `extras`
/// carry alternates and diagnostics that do not enter the sum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    pub family: String,
    pub dimension: usize,
    /// The μ the bound was evaluated at (mean eigenvalue by default).
    pub eigenvalue: f64,
    /// All eigenvalues appearing in the spec.
    pub eigenvalues: Vec<f64>,
    pub bound_value: f64,
    pub terms: Vec<BoundTerm>,
    pub extras: Vec<BoundTerm>,
    pub method: BoundMethod,
    pub sample: Option<SampleMeta>,
    /// Set when the bound exceeds 1 and is therefore weaker than the
    /// trivial d_TV ≤ 1.
    pub vacuous: bool,
}

impl BoundReport {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        family: &str,
        dimension: usize,
        eigenvalue: f64,
        eigenvalues: Vec<f64>,
        terms: Vec<BoundTerm>,
        extras: Vec<BoundTerm>,
        method: BoundMethod,
        sample: Option<SampleMeta>,
    ) -> Self {
        let bound_value = terms.iter().map(|t| t.value).sum();
        BoundReport {
            family: family.to_string(),
            dimension,
            eigenvalue,
            eigenvalues,
            bound_value,
            terms,
            extras,
            method,
            sample,
            vacuous: bound_value > 1.0,
        }
    }

    pub fn term(&self, label: &str) -> Option<&BoundTerm> {
        self.terms
            .iter()
            .chain(self.extras.iter())
            .find(|t| t.label == label)
    }

    pub fn csv_header() -> &'static str {
        "family,dimension,mu,bound_value,method,vacuous,standard_error,samples,seed,stream_id,terms"
    }

    pub fn to_csv_row(&self) -> String {
        let (se, samples, seed, stream) = match &self.sample {
            Some(s) => (
                format!("{:.6e}", s.standard_error),
                s.samples.to_string(),
                s.seed.to_string(),
                s.stream_id.to_string(),
            ),
            None => (String::new(), String::new(), String::new(), String::new()),
        };
        let method = match self.method {
            BoundMethod::Exact => "exact",
            BoundMethod::MonteCarlo => "monte-carlo",
        };
        let terms: Vec<String> = self
            .terms
            .iter()
            .chain(self.extras.iter())
            .map(|t| format!("{}={:.10e}", t.label, t.value))
            .collect();
        format!(
            "{},{},{:.6},{:.10e},{},{},{},{},{},{},{}",
            self.family,
            self.dimension,
            self.eigenvalue,
            self.bound_value,
            method,
            self.vacuous,
            se,
            samples,
            seed,
            stream,
            terms.join(";")
        )
    }
}

fn power_sums(d: &[Rational]) -> (Rational, Rational) {
    let p2: Rational = d.iter().map(|x| x * x).sum();
    let p4: Rational = d.iter().map(|x| x.pow(4)).sum();
    (p2, p4)
}

/// Closed-form bound for the traceless quadratic family.
///
/// The headline value is `√6 (‖d‖₄/‖d‖₂)²`. The report also carries the
/// sharper root form `√((2+4/n)(‖d‖₄/‖d‖₂)⁴ + 2/n)` and its factored
/// weakening `√(4+4/n) (‖d‖₄/‖d‖₂)²`, all exact under the root.
pub fn quadratic_bound(d: &[Rational]) -> Result<BoundReport, BoundError> {
    let spec = QuadraticHarmonic::new(d.to_vec())?;
    let n = spec.dimension() as i64;
    let (p2, p4) = power_sums(spec.spectrum());
    // (‖d‖₄/‖d‖₂)⁴ = P4/P2².
    let ratio4 = &p4 / &(&p2 * &p2);
    let sqrt6 = ExactReal::SqrtRational {
        radicand: Rational::from_int(6) * &ratio4,
    };
    let sharp_root = ExactReal::SqrtRational {
        radicand: (Rational::from_int(2) + Rational::new(4, n)) * &ratio4 + Rational::new(2, n),
    };
    let sharp_factored = ExactReal::SqrtRational {
        radicand: (Rational::from_int(4) + Rational::new(4, n)) * &ratio4,
    };
    Ok(BoundReport::assemble(
        "quadratic",
        spec.dimension(),
        spec.eigenvalue(),
        vec![spec.eigenvalue()],
        vec![BoundTerm::exact_term("sqrt6_bound", sqrt6)],
        vec![
            BoundTerm::exact_term("sharp_root_bound", sharp_root),
            BoundTerm::exact_term("sharp_factored_bound", sharp_factored),
        ],
        BoundMethod::Exact,
        None,
    ))
}

/// Exact `Var(‖∇_S f‖²)` for the quadratic family: the second moment of the
/// degree-4 gradient polynomial is integrated pairwise through the moment
/// engine. The `C⁴` normalization is already folded into the polynomial.
pub fn quadratic_variance_exact(d: &[Rational]) -> Result<Rational, BoundError> {
    let spec = QuadraticHarmonic::new(d.to_vec())?;
    let grad_sq = spec.gradient_sq_polynomial();
    let first = polynomial_expectation(&grad_sq)?;
    debug_assert_eq!(first, Rational::from_int(2 * spec.dimension() as i64));
    let second = expectation_of_square(&grad_sq)?;
    Ok(second - &first * &first)
}

/// The displayed closed-form upper bound for the same variance:
/// `8n² r + 8n(1 + 2r)` with `r = ‖d‖₄⁴/‖d‖₂⁴`.
pub fn quadratic_variance_paper_bound(d: &[Rational]) -> Result<Rational, BoundError> {
    let spec = QuadraticHarmonic::new(d.to_vec())?;
    let n = spec.dimension() as i64;
    let (p2, p4) = power_sums(spec.spectrum());
    let r = &p4 / &(&p2 * &p2);
    Ok(Rational::from_int(8 * n * n) * &r
        + Rational::from_int(8 * n) * (Rational::one() + Rational::from_int(2) * &r))
}

/// The two exact fourth-moment quantities the degree-l analysis rests on,
/// with their ratios against the leading asymptotic scales.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DegreeLKeyFacts {
    /// `A⁴(n-2)⁴ E[(C^{n/2}_{ℓ-1}(x_k))² (C^{n/2}_{ℓ-1}(x_j))²]`, k ≠ j.
    pub fact1_exact: Rational,
    /// `fact1_exact / (ℓ² n²)` — tends to 1 as n → ∞.
    pub fact1_ratio: f64,
    /// `A⁴(n-2)⁴ E[(C^{n/2}_{ℓ-1}(x_k))⁴]`.
    pub fact2_exact: Rational,
    /// `fact2_exact / n²` — bounded in n for fixed ℓ.
    pub fact2_ratio: f64,
}

/// Evaluates both key facts exactly via the moment engine.
pub fn degree_l_key_facts(ell: u32, n: usize) -> Result<DegreeLKeyFacts, BoundError> {
    if ell.is_multiple_of(2) {
        return Err(BoundError::Eigen(EigenError::EvenDegree(ell)));
    }
    let a_squared = harmonic_normalizer_squared(n, ell)?;
    let a4 = &a_squared * &a_squared;
    let n_minus_2 = Rational::from_int(n as i64 - 2);
    let scale = a4 * n_minus_2.pow(4);

    // D_i = C^{n/2}_{ℓ-1}(x_i) as an ambient polynomial.
    let deriv_poly = |var: usize| -> SpherePolynomial {
        let mut p = SpherePolynomial::zero(n);
        for (pow, c) in crate::eigenfunctions::gegenbauer_coeffs(n as u32, ell - 1) {
            p.add_term(MultiIndex::new(n, [(var, pow)]).expect("var < n"), c);
        }
        p
    };
    let d0_sq = deriv_poly(0).square();
    let d1_sq = deriv_poly(1).square();
    let fact1_exact = &scale * &polynomial_expectation(&d0_sq.mul(&d1_sq)?)?;
    let fact2_exact = &scale * &polynomial_expectation(&d0_sq.square())?;

    let ell_f = f64::from(ell);
    let n_f = n as f64;
    let fact1_ratio = fact1_exact.to_f64() / (ell_f * ell_f * n_f * n_f);
    let fact2_ratio = fact2_exact.to_f64() / (n_f * n_f);
    Ok(DegreeLKeyFacts {
        fact1_exact,
        fact1_ratio,
        fact2_exact,
        fact2_ratio,
    })
}

/// Bound for the degree-l combination `p = Σ a_i p_ℓ^{(i)}`:
/// `(1/μ)√(E‖∇p‖⁴ - μ²)` with the ambient fourth moment assembled from the
/// key facts, `E‖∇p‖⁴ = fact2 ‖a‖₄⁴ + fact1 (1 - ‖a‖₄⁴)`.
///
/// No universal constant is asserted — the report carries the evaluated
/// finite-n bound together with `‖a‖₄²`.
pub fn degree_l_bound(ell: u32, n: usize, a: &Coefficients) -> Result<BoundReport, BoundError> {
    let combo = GegenbauerCombo::new(n, ell, a.clone())?;
    let facts = degree_l_key_facts(ell, n)?;
    let mu = combo.eigenvalue();
    let mu_exact = Rational::from_int(i64::from(ell) * (n as i64 + i64::from(ell) - 2));

    let (variance_term, l4_term, fourth_moment_extra) = match a.exact() {
        Some(exact) => {
            let a4: Rational = exact.iter().map(|c| c.pow(4)).sum();
            let fourth =
                &facts.fact2_exact * &a4 + &facts.fact1_exact * &(Rational::one() - &a4);
            let radicand = (&fourth - &mu_exact.pow(2)) / mu_exact.pow(2);
            (
                BoundTerm::exact_term("variance_term", ExactReal::SqrtRational { radicand }),
                BoundTerm::exact_term(
                    "a_l4_squared",
                    ExactReal::SqrtRational { radicand: a4.clone() },
                ),
                BoundTerm::exact_term("gradient_fourth_moment", ExactReal::Rational(fourth)),
            )
        }
        None => {
            let a4 = a.sum_fourth_f64();
            let fourth =
                facts.fact2_exact.to_f64() * a4 + facts.fact1_exact.to_f64() * (1.0 - a4);
            let value = (fourth - mu * mu).max(0.0).sqrt() / mu;
            (
                BoundTerm::float_term("variance_term", value),
                BoundTerm::float_term("a_l4_squared", a4.sqrt()),
                BoundTerm::float_term("gradient_fourth_moment", fourth),
            )
        }
    };

    Ok(BoundReport::assemble(
        "gegenbauer",
        n,
        mu,
        vec![mu],
        vec![variance_term],
        vec![
            l4_term,
            fourth_moment_extra,
            BoundTerm::float_term("fact1_ratio", facts.fact1_ratio),
            BoundTerm::float_term("fact2_ratio", facts.fact2_ratio),
        ],
        BoundMethod::Exact,
        None,
    ))
}

/// The torus bound for a frequency set (coefficients are averaged out):
///
/// ```text
/// (1/μ)[ √(8(2π)⁴/(|V|(|V|+2)) Σ_{v,w}(v,w)_B²)
///        + (2√2+√π) √((1/|V|) Σ_v (μ_v-μ)²) ]
/// ```
///
/// Both terms are exact: every power of 2π cancels against `μ = (2π)²·q`,
/// leaving rationals under the roots. `mu_over_4pi2` overrides the default
/// `μ/(2π)² = mean of ‖v‖_B²`.
pub fn torus_bound(
    fs: &TorusFrequencySet,
    mu_over_4pi2: Option<&Rational>,
) -> Result<BoundReport, BoundError> {
    let m = fs.len() as i64;
    let q_mean = match mu_over_4pi2 {
        Some(q) => q.clone(),
        None => fs.mean_b_norm_squared(),
    };
    if q_mean.is_zero() || q_mean.is_negative() {
        return Err(BoundError::BadMu(
            q_mean.to_f64() * (2.0 * std::f64::consts::PI).powi(2),
        ));
    }
    let gram_sum = fs.sum_gram_squared();
    // (1/(|V|(|V|+2))) Σ (v,w)_B², the quantity controlled in the examples.
    let gram_mean_square = &gram_sum / &Rational::from_int(m * (m + 2));
    let q_mean_sq = &q_mean * &q_mean;
    let first = ExactReal::SqrtRational {
        radicand: Rational::from_int(8) * &gram_mean_square / &q_mean_sq,
    };
    let spread: Rational = fs
        .b_norm_squared()
        .iter()
        .map(|q| (q - &q_mean).pow(2))
        .sum::<Rational>()
        / Rational::from_int(m);
    let second = ExactReal::ScaledSqrt {
        scale: NamedScale::TwoSqrtTwoPlusSqrtPi,
        radicand: &spread / &q_mean_sq,
    };
    let four_pi_sq = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
    let mu = four_pi_sq * q_mean.to_f64();
    Ok(BoundReport::assemble(
        "torus",
        fs.dimension(),
        mu,
        fs.eigenvalues(),
        vec![
            BoundTerm::exact_term("gram_term", first),
            BoundTerm::exact_term("spread_term", second),
        ],
        vec![
            BoundTerm::exact_term(
                "gram_mean_square",
                ExactReal::Rational(gram_mean_square),
            ),
            BoundTerm::exact_term("eigenvalue_spread_sq", ExactReal::Rational(spread)),
        ],
        BoundMethod::Exact,
        None,
    ))
}

/// Monte Carlo evaluation of the generic bound
/// `(2/μ) E|‖∇f(X)‖² - E‖∇f(X)‖²|`, plus the exact spread term
/// `(2/μ)(1 + √π/(2√2)) √(Σ a_i²(μ_i-μ)²)` when the spec mixes
/// eigenvalues. The deviation is measured around the exact mean.
pub fn generic_bound_mc(
    spec: &EigenfunctionSpec,
    mu: Option<f64>,
    samples: u64,
    stream: SeededStream,
) -> Result<BoundReport, BoundError> {
    const MIN_SAMPLES: u64 = 1_000;
    if samples < MIN_SAMPLES {
        return Err(BoundError::TooFewSamples {
            got: samples,
            min: MIN_SAMPLES,
        });
    }
    let mu = mu.unwrap_or_else(|| spec.mean_eigenvalue());
    if mu <= 0.0 {
        return Err(BoundError::BadMu(mu));
    }
    let center = spec.expected_gradient_sq();
    let n = spec.ambient_dim();
    let space = spec.space();
    let block_accs = run_blocks(stream, samples, |rng, count, _| {
        let mut acc = MeanAccumulator::new();
        for _ in 0..count {
            let x = match space {
                SampleSpace::Sphere(_) => sample_sphere(n, rng),
                SampleSpace::Torus(_) => sample_torus(n, rng),
            };
            let g = spec
                .gradient_norm_squared(&x)
                .expect("sampled point is valid");
            acc.push((g - center).abs());
        }
        acc
    });
    let mut total = MeanAccumulator::new();
    for acc in &block_accs {
        total.merge(acc);
    }
    let deviation = 2.0 / mu * total.mean();
    let std_err = 2.0 / mu * total.std_err();

    // Exact spread term: zero unless the spec mixes eigenvalues around μ.
    let spread_constant = 1.0 + std::f64::consts::PI.sqrt() / (2.0 * std::f64::consts::SQRT_2);
    let spread_sq: f64 = match spec {
        EigenfunctionSpec::Torus(t) => {
            // The torus combination Σ a_v cos θ_v has ‖a‖² = 2 against
            // cosines with E f_v² = ½; renormalizing to unit-variance
            // eigenfunctions gives Σ ã_i²(μ_i-μ)² = ½ Σ a_v²(μ_v-μ)².
            let a = t.coefficients().to_f64_vec();
            let mu_v = t.frequency_set().eigenvalues();
            0.5 * a
                .iter()
                .zip(&mu_v)
                .map(|(&av, &mv)| av * av * (mv - mu) * (mv - mu))
                .sum::<f64>()
        }
        _ => {
            let own = spec.mean_eigenvalue();
            (own - mu) * (own - mu)
        }
    };
    let spread_term = 2.0 / mu * spread_constant * spread_sq.sqrt();

    Ok(BoundReport::assemble(
        spec.family_name(),
        n,
        mu,
        spec.eigenvalues(),
        vec![
            BoundTerm::float_term("gradient_deviation_mc", deviation),
            BoundTerm::float_term("eigenvalue_spread", spread_term),
        ],
        vec![BoundTerm::float_term("gradient_sq_mean", center)],
        BoundMethod::MonteCarlo,
        Some(SampleMeta {
            samples,
            seed: stream.seed,
            stream_id: stream.stream_id,
            standard_error: std_err,
        }),
    ))
}

/// Draws a random point of the spec's sample space; shared by callers that
/// need raw values of `f(X)`.
pub fn sample_point<R: Rng + ?Sized>(spec: &EigenfunctionSpec, rng: &mut R) -> Vec<f64> {
    match spec.space() {
        SampleSpace::Sphere(n) => sample_sphere(n, rng),
        SampleSpace::Torus(n) => sample_torus(n, rng),
    }
}
