//! The three eigenfunction families and a tagged union dispatching
//! evaluation, gradients and exact polynomial forms.
//!
//! All specs are immutable after construction and normalized so that
//! `E[f²] = 1` (quadratic and Gegenbauer families exactly; the torus family
//! through `‖a‖₂² = 2`, which gives `E_a E_X f² = 1`).

pub mod gegenbauer;
pub mod quadratic;
pub mod torus;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact_arith::Rational;
use crate::sphere_moments::{MomentError, SpherePolynomial};

pub use gegenbauer::{
    gegenbauer, gegenbauer_coeffs, gegenbauer_f64, harmonic_normalizer_squared, GegenbauerCombo,
    ZonalPoly,
};
pub use quadratic::QuadraticHarmonic;
pub use torus::{TorusCombo, TorusFrequencySet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("spectrum must sum to zero")]
    NonzeroTrace,
    #[error("spectrum must not be identically zero")]
    ZeroSpectrum,
    #[error("dimension {n} too small, need at least {min}")]
    DimensionTooSmall { n: usize, min: usize },
    #[error("degree must be odd, got {0}")]
    EvenDegree(u32),
    #[error("coefficient norm² must be {expected}, got {got}")]
    BadCoefficientNorm { expected: f64, got: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point is off the unit sphere: |‖x‖ - 1| = {0:e}")]
    PointOffSphere(f64),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("metric is not positive definite")]
    NotPositiveDefinite,
    #[error("Bv must have integer entries for every frequency v")]
    NonIntegerFrequency,
    #[error("frequency set contains v, w with v + w = 0 (or a zero vector)")]
    OppositeFrequencies,
    #[error("frequency set is empty")]
    EmptyFrequencies,
    #[error("this operation requires exact rational coefficients")]
    ExactCoefficientsRequired,
    #[error(transparent)]
    Moment(#[from] MomentError),
}

/// Coefficient vectors come in two flavors: exact rationals for closed-form
/// experiments, floats for random draws. Exact polynomial paths require the
/// former.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficients {
    Exact(Vec<Rational>),
    Float(Vec<f64>),
}

impl Coefficients {
    pub fn len(&self) -> usize {
        match self {
            Coefficients::Exact(v) => v.len(),
            Coefficients::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        match self {
            Coefficients::Exact(v) => v.iter().map(Rational::to_f64).collect(),
            Coefficients::Float(v) => v.clone(),
        }
    }

    pub fn exact(&self) -> Option<&[Rational]> {
        match self {
            Coefficients::Exact(v) => Some(v),
            Coefficients::Float(_) => None,
        }
    }

    /// `Σ a_i²` in floating point.
    pub fn sum_sq_f64(&self) -> f64 {
        self.to_f64_vec().iter().map(|a| a * a).sum()
    }

    /// `Σ a_i⁴` in floating point.
    pub fn sum_fourth_f64(&self) -> f64 {
        self.to_f64_vec().iter().map(|a| a.powi(4)).sum()
    }

    /// `Σ a_i⁴` exactly, when the coefficients are rational.
    pub fn sum_fourth_exact(&self) -> Option<Rational> {
        self.exact()
            .map(|v| v.iter().map(|a| a.pow(4)).sum())
    }
}

/// The sample space a spec's random point lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleSpace {
    /// Unit sphere `S^{n-1}` in ambient dimension `n`.
    Sphere(usize),
    /// Flat torus `[0,1)^n`.
    Torus(usize),
}

/// Points claimed to be on the unit sphere may deviate from norm 1 by at
/// most this much.
pub const SPHERE_POINT_TOL: f64 = 1e-12;

fn check_sphere_point(x: &[f64], n: usize) -> Result<(), EigenError> {
    if x.len() != n {
        return Err(EigenError::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > SPHERE_POINT_TOL {
        return Err(EigenError::PointOffSphere((norm - 1.0).abs()));
    }
    Ok(())
}

fn check_torus_point(x: &[f64], n: usize) -> Result<(), EigenError> {
    if x.len() != n {
        return Err(EigenError::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    Ok(())
}

/// Tagged union over the three families. This is the experiment input
/// format: it serializes to JSON with a `family` tag.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum EigenfunctionSpec {
    Quadratic(QuadraticHarmonic),
    Gegenbauer(GegenbauerCombo),
    Torus(TorusCombo),
}

impl EigenfunctionSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            EigenfunctionSpec::Quadratic(_) => "quadratic",
            EigenfunctionSpec::Gegenbauer(_) => "gegenbauer",
            EigenfunctionSpec::Torus(_) => "torus",
        }
    }

    /// Ambient coordinate dimension (`n` for both `S^{n-1} ⊂ R^n` and `T^n`).
    pub fn ambient_dim(&self) -> usize {
        match self {
            EigenfunctionSpec::Quadratic(q) => q.dimension(),
            EigenfunctionSpec::Gegenbauer(g) => g.dimension(),
            EigenfunctionSpec::Torus(t) => t.dimension(),
        }
    }

    /// Dimension of the manifold itself: `n-1` for the sphere families,
    /// `n` for the torus. This is the `dim(M)` in drift/diffusion limits.
    pub fn manifold_dim(&self) -> usize {
        match self.space() {
            SampleSpace::Sphere(n) => n - 1,
            SampleSpace::Torus(n) => n,
        }
    }

    pub fn space(&self) -> SampleSpace {
        match self {
            EigenfunctionSpec::Quadratic(q) => SampleSpace::Sphere(q.dimension()),
            EigenfunctionSpec::Gegenbauer(g) => SampleSpace::Sphere(g.dimension()),
            EigenfunctionSpec::Torus(t) => SampleSpace::Torus(t.dimension()),
        }
    }

    /// All eigenvalues `μ_i` appearing in the spec (length 1 for the
    /// single-eigenvalue sphere families).
    pub fn eigenvalues(&self) -> Vec<f64> {
        match self {
            EigenfunctionSpec::Quadratic(q) => vec![q.eigenvalue()],
            EigenfunctionSpec::Gegenbauer(g) => vec![g.eigenvalue()],
            EigenfunctionSpec::Torus(t) => t.frequency_set().eigenvalues(),
        }
    }

    /// Arithmetic mean of the eigenvalues (the default μ).
    pub fn mean_eigenvalue(&self) -> f64 {
        let mu = self.eigenvalues();
        mu.iter().sum::<f64>() / mu.len() as f64
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, EigenError> {
        match self {
            EigenfunctionSpec::Quadratic(q) => {
                check_sphere_point(x, q.dimension())?;
                Ok(q.eval(x))
            }
            EigenfunctionSpec::Gegenbauer(g) => {
                check_sphere_point(x, g.dimension())?;
                Ok(g.eval(x))
            }
            EigenfunctionSpec::Torus(t) => {
                check_torus_point(x, t.dimension())?;
                Ok(t.eval(x))
            }
        }
    }

    /// Squared gradient norm in the manifold's own metric: the spherical
    /// gradient for the sphere families, the `B`-norm of `∇_B f` for the
    /// torus.
    pub fn gradient_norm_squared(&self, x: &[f64]) -> Result<f64, EigenError> {
        match self {
            EigenfunctionSpec::Quadratic(q) => {
                check_sphere_point(x, q.dimension())?;
                Ok(q.gradient_norm_squared(x))
            }
            EigenfunctionSpec::Gegenbauer(g) => {
                check_sphere_point(x, g.dimension())?;
                Ok(g.gradient_norm_squared(x))
            }
            EigenfunctionSpec::Torus(t) => {
                check_torus_point(x, t.dimension())?;
                Ok(t.gradient_norm_squared(x))
            }
        }
    }

    /// `Δ f(x)`: `-μ f(x)` for the single-eigenvalue families, the
    /// per-frequency sum for the torus.
    pub fn laplacian(&self, x: &[f64]) -> Result<f64, EigenError> {
        match self {
            EigenfunctionSpec::Quadratic(q) => {
                check_sphere_point(x, q.dimension())?;
                Ok(-q.eigenvalue() * q.eval(x))
            }
            EigenfunctionSpec::Gegenbauer(g) => {
                check_sphere_point(x, g.dimension())?;
                Ok(-g.eigenvalue() * g.eval(x))
            }
            EigenfunctionSpec::Torus(t) => {
                check_torus_point(x, t.dimension())?;
                Ok(t.laplacian(x))
            }
        }
    }

    /// Exact `E ‖∇f‖²`: equals μ for the sphere families (Stokes), and
    /// `½ Σ a_v² μ_v` for a fixed torus coefficient draw.
    pub fn expected_gradient_sq(&self) -> f64 {
        match self {
            EigenfunctionSpec::Quadratic(q) => q.eigenvalue(),
            EigenfunctionSpec::Gegenbauer(g) => g.eigenvalue(),
            EigenfunctionSpec::Torus(t) => t.expected_gradient_sq(),
        }
    }

    /// `f²` as an exact sphere polynomial (sphere families with rational
    /// coefficients only).
    pub fn f_squared_polynomial(&self) -> Result<SpherePolynomial, EigenError> {
        match self {
            EigenfunctionSpec::Quadratic(q) => Ok(q.f_squared_polynomial()),
            EigenfunctionSpec::Gegenbauer(g) => g.f_squared_polynomial(),
            EigenfunctionSpec::Torus(_) => Err(EigenError::ExactCoefficientsRequired),
        }
    }

    /// `‖∇_S f‖²` as an exact sphere polynomial (sphere families with
    /// rational coefficients only).
    pub fn gradient_sq_polynomial(&self) -> Result<SpherePolynomial, EigenError> {
        match self {
            EigenfunctionSpec::Quadratic(q) => Ok(q.gradient_sq_polynomial()),
            EigenfunctionSpec::Gegenbauer(g) => g.gradient_sq_polynomial(),
            EigenfunctionSpec::Torus(_) => Err(EigenError::ExactCoefficientsRequired),
        }
    }

    /// Stable content hash of the canonical JSON form, for report
    /// provenance.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        crate::fingerprint::fnv1a_hex(json.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad_spec() -> EigenfunctionSpec {
        EigenfunctionSpec::Quadratic(
            QuadraticHarmonic::new(vec![
                Rational::from_int(1),
                Rational::from_int(-1),
                Rational::zero(),
                Rational::zero(),
            ])
            .unwrap(),
        )
    }

    #[test]
    fn json_roundtrip_with_family_tag() {
        let spec = quad_spec();
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains(r#""family":"quadratic""#));
        let back: EigenfunctionSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back.fingerprint(), spec.fingerprint());
        let x = [1.0, 0.0, 0.0, 0.0];
        assert_eq!(back.eval(&x).unwrap(), spec.eval(&x).unwrap());
    }

    #[test]
    fn json_rejects_invalid_spec() {
        // Trace 2 != 0 must fail at deserialization time.
        let bad = r#"{"family":"quadratic","d":[{"num":"1","den":"1"},{"num":"1","den":"1"}]}"#;
        let res: Result<EigenfunctionSpec, _> = serde_json::from_str(bad);
        assert!(res.is_err());
    }

    #[test]
    fn eval_rejects_off_sphere_points() {
        let spec = quad_spec();
        let err = spec.eval(&[1.0, 1.0, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, EigenError::PointOffSphere(_)));
        let err = spec.eval(&[1.0, 0.0]).unwrap_err();
        assert!(matches!(err, EigenError::DimensionMismatch { .. }));
    }

    #[test]
    fn manifold_dimensions() {
        assert_eq!(quad_spec().manifold_dim(), 3);
        assert_eq!(quad_spec().ambient_dim(), 4);
    }

    #[test]
    fn gegenbauer_spec_roundtrip() {
        let mut a = vec![Rational::zero(); 6];
        a[2] = Rational::one();
        let spec = EigenfunctionSpec::Gegenbauer(
            GegenbauerCombo::new(6, 3, Coefficients::Exact(a)).unwrap(),
        );
        let json = serde_json::to_value(&spec).unwrap();
        assert_eq!(json["family"], "gegenbauer");
        let back: EigenfunctionSpec = serde_json::from_value(json).unwrap();
        let mut x = vec![0.0; 6];
        x[2] = 1.0;
        assert!((back.eval(&x).unwrap() - spec.eval(&x).unwrap()).abs() < 1e-15);
    }
}
