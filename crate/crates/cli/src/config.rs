//! Experiment configuration: a JSON config file plus flag overrides,
//! resolved into one validated description before anything runs.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use steinlab_core::eigenfunctions::{
    Coefficients, EigenfunctionSpec, GegenbauerCombo, QuadraticHarmonic, TorusCombo,
    TorusFrequencySet,
};
use steinlab_core::exact_arith::Rational;
use steinlab_core::fingerprint::fnv1a_hex;
use steinlab_core::sampling::{sample_coefficient_sphere, SeededStream};

/// A configuration or validation problem; always exits with code 1.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub type ConfigResult<T> = Result<T, ConfigError>;

pub fn config_err<T>(msg: impl Into<String>) -> ConfigResult<T> {
    Err(ConfigError(msg.into()))
}

/// The JSON config file. Every field is optional; command-line flags win.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub spec: Option<serde_json::Value>,
    pub spec_path: Option<String>,
    pub spec_gen: Option<SpecGen>,
    pub samples: Option<u64>,
    pub bins: Option<usize>,
    pub seed: Option<u64>,
    pub stream: Option<u64>,
    pub shards: Option<usize>,
    pub eps: Option<Vec<f64>>,
    pub draws: Option<u64>,
    pub base_points: Option<usize>,
    pub max_ell: Option<u32>,
    pub max_p: Option<u32>,
    pub mu: Option<f64>,
    pub metric: Option<String>,
    pub n: Option<usize>,
    pub max_degree: Option<u32>,
    pub out_dir: Option<String>,
    pub sweep: Option<SweepSection>,
    pub inputs: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSection {
    pub parameter: String,
    pub values: Vec<f64>,
    /// Base experiment to rerun per value: tv (default), bounds or pairlab.
    #[serde(default)]
    pub kind: Option<String>,
}

/// Parametric spec generators, used by sweeps over `n` and as convenient
/// shorthands for the canonical experiment families.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SpecGen {
    /// Traceless quadratic with spectrum half +1, half -1 (n even).
    QuadraticHalf { n: usize },
    /// f ∝ x_1² - x_2², the non-normal control.
    QuadraticPair { n: usize },
    /// Degree-ℓ combination with a_i = 1/√n (exact when n is a square).
    GegenbauerUniform { n: usize, ell: u32 },
    /// Single zonal term a = e_1 (ℓ = 1 gives √n·x_1).
    GegenbauerFirst { n: usize, ell: u32 },
    /// Square torus B = I with the standard basis frequencies and a
    /// seeded random coefficient draw.
    TorusBasis { n: usize },
    /// Square torus with all pair frequencies e_i + e_j, i < j.
    TorusPairs { n: usize },
}

impl SpecGen {
    pub fn with_dimension(&self, n: usize) -> SpecGen {
        let mut out = self.clone();
        match &mut out {
            SpecGen::QuadraticHalf { n: m }
            | SpecGen::QuadraticPair { n: m }
            | SpecGen::GegenbauerUniform { n: m, .. }
            | SpecGen::GegenbauerFirst { n: m, .. }
            | SpecGen::TorusBasis { n: m }
            | SpecGen::TorusPairs { n: m } => *m = n,
        }
        out
    }

    pub fn with_degree(&self, ell: u32) -> ConfigResult<SpecGen> {
        let mut out = self.clone();
        match &mut out {
            SpecGen::GegenbauerUniform { ell: l, .. }
            | SpecGen::GegenbauerFirst { ell: l, .. } => *l = ell,
            _ => return config_err("only gegenbauer generators take a degree"),
        }
        Ok(out)
    }

    /// Materializes the generator. `coeff_stream` seeds any random
    /// coefficient draw so the result is reproducible.
    pub fn build(&self, coeff_stream: SeededStream) -> ConfigResult<EigenfunctionSpec> {
        let build = || -> Result<EigenfunctionSpec, String> {
            match self {
                SpecGen::QuadraticHalf { n } => {
                    if n % 2 != 0 {
                        return Err(format!("quadratic_half requires even n, got {n}"));
                    }
                    let mut d = vec![Rational::one(); n / 2];
                    d.extend(vec![Rational::from_int(-1); n / 2]);
                    Ok(EigenfunctionSpec::Quadratic(
                        QuadraticHarmonic::new(d).map_err(|e| e.to_string())?,
                    ))
                }
                SpecGen::QuadraticPair { n } => {
                    let mut d = vec![Rational::zero(); *n];
                    d[0] = Rational::one();
                    d[1] = Rational::from_int(-1);
                    Ok(EigenfunctionSpec::Quadratic(
                        QuadraticHarmonic::new(d).map_err(|e| e.to_string())?,
                    ))
                }
                SpecGen::GegenbauerUniform { n, ell } => {
                    let root = (*n as f64).sqrt().round() as usize;
                    let coeffs = if root * root == *n {
                        Coefficients::Exact(vec![Rational::new(1, root as i64); *n])
                    } else {
                        Coefficients::Float(vec![1.0 / (*n as f64).sqrt(); *n])
                    };
                    Ok(EigenfunctionSpec::Gegenbauer(
                        GegenbauerCombo::new(*n, *ell, coeffs).map_err(|e| e.to_string())?,
                    ))
                }
                SpecGen::GegenbauerFirst { n, ell } => {
                    let mut a = vec![Rational::zero(); *n];
                    a[0] = Rational::one();
                    Ok(EigenfunctionSpec::Gegenbauer(
                        GegenbauerCombo::new(*n, *ell, Coefficients::Exact(a))
                            .map_err(|e| e.to_string())?,
                    ))
                }
                SpecGen::TorusBasis { n } => {
                    let freqs = (0..*n)
                        .map(|k| {
                            (0..*n)
                                .map(|j| Rational::from_int(i64::from(j == k)))
                                .collect()
                        })
                        .collect();
                    let fs = TorusFrequencySet::square_lattice(*n, freqs)
                        .map_err(|e| e.to_string())?;
                    let mut rng = coeff_stream.rng();
                    let a = sample_coefficient_sphere(fs.len(), 2.0_f64.sqrt(), &mut rng);
                    Ok(EigenfunctionSpec::Torus(
                        TorusCombo::new(fs, Coefficients::Float(a))
                            .map_err(|e| e.to_string())?,
                    ))
                }
                SpecGen::TorusPairs { n } => {
                    let mut freqs = Vec::new();
                    for i in 0..*n {
                        for j in (i + 1)..*n {
                            let mut v = vec![Rational::zero(); *n];
                            v[i] = Rational::one();
                            v[j] = Rational::one();
                            freqs.push(v);
                        }
                    }
                    let fs = TorusFrequencySet::square_lattice(*n, freqs)
                        .map_err(|e| e.to_string())?;
                    let mut rng = coeff_stream.rng();
                    let a = sample_coefficient_sphere(fs.len(), 2.0_f64.sqrt(), &mut rng);
                    Ok(EigenfunctionSpec::Torus(
                        TorusCombo::new(fs, Coefficients::Float(a))
                            .map_err(|e| e.to_string())?,
                    ))
                }
            }
        };
        build().map_err(|e| ConfigError(format!("spec_gen: {e}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Moments,
    Bounds,
    Tv,
    Pairlab,
    Identities,
    Report,
    Sweep,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Moments => "moments",
            ExperimentKind::Bounds => "bounds",
            ExperimentKind::Tv => "tv",
            ExperimentKind::Pairlab => "pairlab",
            ExperimentKind::Identities => "identities",
            ExperimentKind::Report => "report",
            ExperimentKind::Sweep => "sweep",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Tv,
    Ks,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    N,
    Ell,
    Samples,
    Bins,
    Eps,
}

/// Fully resolved experiment description. Everything the run needs, after
/// config file + flags merged and every referenced file parsed.
#[derive(Clone, Debug, Serialize)]
pub struct Resolved {
    pub kind: ExperimentKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<EigenfunctionSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec_gen: Option<SpecGen>,
    pub samples: u64,
    pub bins: usize,
    pub seed: u64,
    pub stream: u64,
    /// Worker cap only; never part of the fingerprint or outputs, since
    /// results are identical for any shard count.
    #[serde(skip)]
    pub shards: Option<usize>,
    pub eps: Vec<f64>,
    pub draws: u64,
    pub base_points: usize,
    pub max_ell: u32,
    pub max_p: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    pub metric: Metric,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub max_degree: u32,
    #[serde(skip)]
    pub out_dir: PathBuf,
    #[serde(skip)]
    pub assert_mode: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<(SweepParam, Vec<f64>)>,
    pub sweep_base: ExperimentKind,
    #[serde(skip)]
    pub inputs: Vec<PathBuf>,
}

impl Resolved {
    /// Stable hash of the resolved experiment (excluding output paths and
    /// assertion mode, which do not affect results).
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("resolved config serializes");
        fnv1a_hex(json.as_bytes())
    }

    pub fn tv_stream(&self) -> SeededStream {
        SeededStream::new(self.seed, self.stream)
    }

    pub fn sweep_base_kind(&self) -> ExperimentKind {
        self.sweep_base
    }
}

/// Parses a JSON file with a line-anchored error message.
pub fn parse_json_file<T: serde::de::DeserializeOwned>(path: &Path) -> ConfigResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        ConfigError(format!(
            "{}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

/// Flag-level overrides collected from the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub spec_path: Option<PathBuf>,
    pub samples: Option<u64>,
    pub bins: Option<usize>,
    pub seed: Option<u64>,
    pub stream: Option<u64>,
    pub shards: Option<usize>,
    pub eps: Option<Vec<f64>>,
    pub draws: Option<u64>,
    pub base_points: Option<usize>,
    pub max_ell: Option<u32>,
    pub max_p: Option<u32>,
    pub mu: Option<f64>,
    pub metric: Option<String>,
    pub n: Option<usize>,
    pub max_degree: Option<u32>,
    pub out_dir: Option<PathBuf>,
    pub assert_mode: bool,
    pub sweep_parameter: Option<String>,
    pub sweep_values: Option<Vec<f64>>,
    pub sweep_base: Option<String>,
    pub inputs: Vec<PathBuf>,
}

fn parse_metric(s: &str) -> ConfigResult<Metric> {
    match s {
        "tv" => Ok(Metric::Tv),
        "ks" => Ok(Metric::Ks),
        "both" => Ok(Metric::Both),
        other => config_err(format!("metric must be tv|ks|both, got {other:?}")),
    }
}

fn parse_sweep_param(s: &str) -> ConfigResult<SweepParam> {
    match s {
        "n" => Ok(SweepParam::N),
        "ell" => Ok(SweepParam::Ell),
        "N" | "samples" => Ok(SweepParam::Samples),
        "K" | "bins" => Ok(SweepParam::Bins),
        "eps" => Ok(SweepParam::Eps),
        other => config_err(format!(
            "sweep parameter must be one of n, ell, N, K, eps; got {other:?}"
        )),
    }
}

/// Merges config file and flags into a validated [`Resolved`].
pub fn resolve(kind: ExperimentKind, flags: Overrides) -> ConfigResult<Resolved> {
    let file: ConfigFile = match &flags.config {
        Some(path) => parse_json_file(path)?,
        None => ConfigFile::default(),
    };

    // Spec: an explicit --spec path wins over the config's inline spec or
    // spec_path; the generator is kept separately for sweeps.
    let mut spec: Option<EigenfunctionSpec> = None;
    if let Some(path) = &flags.spec_path {
        spec = Some(parse_json_file(path)?);
    } else if let Some(value) = &file.spec {
        spec = Some(serde_json::from_value(value.clone()).map_err(|e| {
            ConfigError(format!("config spec: {e}"))
        })?);
    } else if let Some(path) = &file.spec_path {
        spec = Some(parse_json_file(Path::new(path))?);
    }
    let spec_gen = file.spec_gen.clone();

    let metric = match flags.metric.as_deref().or(file.metric.as_deref()) {
        Some(s) => parse_metric(s)?,
        None => Metric::Both,
    };
    let sweep = match (&flags.sweep_parameter, &file.sweep) {
        (Some(p), _) => {
            let values = flags
                .sweep_values
                .clone()
                .unwrap_or_else(|| file.sweep.as_ref().map(|s| s.values.clone()).unwrap_or_default());
            Some((parse_sweep_param(p)?, values))
        }
        (None, Some(section)) => Some((parse_sweep_param(&section.parameter)?, section.values.clone())),
        (None, None) => None,
    };
    let sweep_base = match flags
        .sweep_base
        .as_deref()
        .or(file.sweep.as_ref().and_then(|s| s.kind.as_deref()))
    {
        None => ExperimentKind::Tv,
        Some("tv") => ExperimentKind::Tv,
        Some("bounds") => ExperimentKind::Bounds,
        Some("pairlab") => ExperimentKind::Pairlab,
        Some(other) => {
            return config_err(format!(
                "sweep base must be tv, bounds or pairlab, got {other:?}"
            ))
        }
    };

    let mut inputs: Vec<PathBuf> = flags.inputs.clone();
    if inputs.is_empty() {
        if let Some(list) = &file.inputs {
            inputs = list.iter().map(PathBuf::from).collect();
        }
    }

    let resolved = Resolved {
        kind,
        spec,
        spec_gen,
        samples: flags.samples.or(file.samples).unwrap_or(2_000_000),
        bins: flags.bins.or(file.bins).unwrap_or(50),
        seed: flags.seed.or(file.seed).unwrap_or(0),
        stream: flags.stream.or(file.stream).unwrap_or(0),
        shards: flags.shards.or(file.shards),
        eps: flags
            .eps
            .or(file.eps)
            .unwrap_or_else(|| vec![0.1, 0.05, 0.025]),
        draws: flags.draws.or(file.draws).unwrap_or(100_000),
        base_points: flags.base_points.or(file.base_points).unwrap_or(3),
        max_ell: flags.max_ell.or(file.max_ell).unwrap_or(25),
        max_p: flags.max_p.or(file.max_p).unwrap_or(12),
        mu: flags.mu.or(file.mu),
        metric,
        n: flags.n.or(file.n),
        max_degree: flags.max_degree.or(file.max_degree).unwrap_or(8),
        out_dir: flags
            .out_dir
            .clone()
            .or_else(|| file.out_dir.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("steinlab-out")),
        assert_mode: flags.assert_mode,
        sweep,
        sweep_base,
        inputs,
    };
    validate(&resolved)?;
    Ok(resolved)
}

fn validate(r: &Resolved) -> ConfigResult<()> {
    match r.kind {
        ExperimentKind::Bounds | ExperimentKind::Tv | ExperimentKind::Pairlab => {
            if r.spec.is_none() && r.spec_gen.is_none() {
                return config_err(format!(
                    "{} requires a spec (--spec, config.spec, config.spec_path or config.spec_gen)",
                    r.kind.name()
                ));
            }
        }
        ExperimentKind::Report => {
            if r.inputs.is_empty() {
                return config_err("report requires at least one --input results.json");
            }
        }
        ExperimentKind::Sweep => {
            let Some((param, values)) = &r.sweep else {
                return config_err("sweep requires a parameter and values");
            };
            if values.is_empty() {
                return config_err("sweep value list is empty");
            }
            if matches!(param, SweepParam::N | SweepParam::Ell) && r.spec_gen.is_none() {
                return config_err("sweeping n or ell requires config.spec_gen");
            }
            if r.spec.is_none() && r.spec_gen.is_none() {
                return config_err("sweep requires a spec or spec_gen");
            }
        }
        ExperimentKind::Moments | ExperimentKind::Identities => {}
    }
    if r.bins < 2 {
        return config_err(format!("bins must be at least 2, got {}", r.bins));
    }
    if r.samples == 0 {
        return config_err("samples must be positive");
    }
    for w in r.eps.windows(2) {
        if w[1] >= w[0] {
            return config_err("eps grid must be strictly decreasing");
        }
    }
    if r.eps.iter().any(|&e| e <= 0.0) {
        return config_err("eps values must be positive");
    }
    Ok(())
}

/// Builds the spec to run: the fixed one if present, otherwise the
/// generator at its configured dimension.
pub fn materialize_spec(r: &Resolved) -> ConfigResult<EigenfunctionSpec> {
    if let Some(spec) = &r.spec {
        return Ok(spec.clone());
    }
    let gen = r
        .spec_gen
        .as_ref()
        .ok_or_else(|| ConfigError("no spec or spec_gen provided".into()))?;
    let gen = match r.n {
        Some(n) => gen.with_dimension(n),
        None => gen.clone(),
    };
    // Coefficient draws get their own stream far from the sampling blocks.
    gen.build(SeededStream::new(r.seed, r.stream ^ 0x005e_edc0_eff5_1de5_u64))
}
