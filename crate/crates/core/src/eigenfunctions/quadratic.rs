//! Traceless quadratic harmonics `f(x) = C ⟨x, Ax⟩` on `S^{n-1}`.
//!
//! Orthogonal invariance of the uniform measure reduces everything to the
//! spectrum of `A`, so the type stores only the eigenvalue vector `d` (as
//! exact rationals) and the squared normalization `C² = n(n+2)/(2‖d‖₂²)`
//! that makes `E[f²] = 1`. The eigenvalue of `-Δ` on the sphere is `2n`.

use serde::{Deserialize, Serialize};

use crate::exact_arith::Rational;
use crate::linalg::jacobi_eigen;
use crate::sphere_moments::{MultiIndex, SpherePolynomial};

use super::EigenError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "QuadraticJson", into = "QuadraticJson")]
pub struct QuadraticHarmonic {
    n: usize,
    d: Vec<Rational>,
    c_squared: Rational,
    #[serde(skip)]
    d_f64: Vec<f64>,
    #[serde(skip)]
    c_f64: f64,
}

#[derive(Serialize, Deserialize)]
struct QuadraticJson {
    d: Vec<Rational>,
}

impl TryFrom<QuadraticJson> for QuadraticHarmonic {
    type Error = EigenError;
    fn try_from(j: QuadraticJson) -> Result<Self, EigenError> {
        QuadraticHarmonic::new(j.d)
    }
}

impl From<QuadraticHarmonic> for QuadraticJson {
    fn from(q: QuadraticHarmonic) -> Self {
        QuadraticJson { d: q.d }
    }
}

/// Relative tolerance used by [`QuadraticHarmonic::from_symmetric_matrix`]
/// for the symmetry and trace checks on floating-point input.
pub const MATRIX_TOL: f64 = 1e-9;

impl QuadraticHarmonic {
    /// Builds the spec from a spectrum `d`. Requires `Σ d_i = 0` exactly,
    /// `d ≠ 0`, and `n ≥ 2`.
    pub fn new(d: Vec<Rational>) -> Result<Self, EigenError> {
        let n = d.len();
        if n < 2 {
            return Err(EigenError::DimensionTooSmall { n, min: 2 });
        }
        let trace: Rational = d.iter().cloned().sum();
        if !trace.is_zero() {
            return Err(EigenError::NonzeroTrace);
        }
        let norm_sq: Rational = d.iter().map(|x| x * x).sum();
        if norm_sq.is_zero() {
            return Err(EigenError::ZeroSpectrum);
        }
        let c_squared = Rational::from_int((n * (n + 2)) as i64)
            / (Rational::from_int(2) * &norm_sq);
        let d_f64: Vec<f64> = d.iter().map(Rational::to_f64).collect();
        let c_f64 = c_squared.to_f64().sqrt();
        Ok(QuadraticHarmonic {
            n,
            d,
            c_squared,
            d_f64,
            c_f64,
        })
    }

    /// Convenience constructor from a dense symmetric matrix (row-major).
    ///
    /// The spectrum is extracted numerically (cyclic Jacobi). Symmetry and
    /// approximate tracelessness are required to [`MATRIX_TOL`] relative to
    /// the matrix scale; the float eigenvalues are then converted to exact
    /// rationals and recentered so the trace is exactly zero.
    pub fn from_symmetric_matrix(a: &[f64], n: usize) -> Result<Self, EigenError> {
        if a.len() != n * n {
            return Err(EigenError::DimensionMismatch {
                expected: n * n,
                got: a.len(),
            });
        }
        let scale = a.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1e-300);
        for i in 0..n {
            for j in (i + 1)..n {
                if (a[i * n + j] - a[j * n + i]).abs() > MATRIX_TOL * scale {
                    return Err(EigenError::NotSymmetric);
                }
            }
        }
        let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
        if trace.abs() > MATRIX_TOL * scale * n as f64 {
            return Err(EigenError::NonzeroTrace);
        }
        let (eig, _) = jacobi_eigen(a, n);
        let mut d: Vec<Rational> = eig
            .iter()
            .map(|&l| Rational::from_f64_exact(l).expect("finite eigenvalue"))
            .collect();
        let mean: Rational =
            d.iter().cloned().sum::<Rational>() / Rational::from_int(n as i64);
        for di in &mut d {
            *di -= &mean;
        }
        QuadraticHarmonic::new(d)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn spectrum(&self) -> &[Rational] {
        &self.d
    }

    pub fn c_squared(&self) -> &Rational {
        &self.c_squared
    }

    pub fn eigenvalue(&self) -> f64 {
        2.0 * self.n as f64
    }

    /// `f(x) = C Σ d_i x_i²`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let g: f64 = self
            .d_f64
            .iter()
            .zip(x)
            .map(|(&d, &xi)| d * xi * xi)
            .sum();
        self.c_f64 * g
    }

    /// `‖∇_S f‖²(x) = C² (4 Σ d_i² x_i² - 4 (Σ d_i x_i²)²)`.
    pub fn gradient_norm_squared(&self, x: &[f64]) -> f64 {
        let mut sum_d2x2 = 0.0;
        let mut g = 0.0;
        for (&d, &xi) in self.d_f64.iter().zip(x) {
            let x2 = xi * xi;
            sum_d2x2 += d * d * x2;
            g += d * x2;
        }
        self.c_f64 * self.c_f64 * 4.0 * (sum_d2x2 - g * g)
    }

    fn diag_power_sum_poly(&self, squared_coeffs: bool) -> SpherePolynomial {
        let mut p = SpherePolynomial::zero(self.n);
        for (i, di) in self.d.iter().enumerate() {
            if di.is_zero() {
                continue;
            }
            let coeff = if squared_coeffs { di * di } else { di.clone() };
            p.add_term(
                MultiIndex::new(self.n, [(i, 2)]).expect("i < n"),
                coeff,
            );
        }
        p
    }

    /// `f² = C² (Σ d_i x_i²)²`, exactly.
    pub fn f_squared_polynomial(&self) -> SpherePolynomial {
        self.diag_power_sum_poly(false)
            .square()
            .scale(&self.c_squared)
    }

    /// `‖∇_S f‖²` as an exact degree-4 polynomial.
    pub fn gradient_sq_polynomial(&self) -> SpherePolynomial {
        let four = Rational::from_int(4);
        let ambient = self.diag_power_sum_poly(true).scale(&four);
        let radial_sq = self.diag_power_sum_poly(false).square().scale(&four);
        ambient
            .sub(&radial_sq)
            .expect("same dimension")
            .scale(&self.c_squared)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere_moments::polynomial_expectation;

    fn spectrum(vals: &[i64]) -> Vec<Rational> {
        vals.iter().map(|&v| Rational::from_int(v)).collect()
    }

    #[test]
    fn normalizer_for_two_point_spectrum() {
        // d = (1, -1), n = 2: C² = n(n+2)/(2‖d‖²) = 8/4 = 2.
        let q = QuadraticHarmonic::new(spectrum(&[1, -1])).unwrap();
        assert_eq!(q.c_squared(), &Rational::from_int(2));
    }

    #[test]
    fn normalizer_for_half_spectrum() {
        // Half +1, half -1: C² = (n+2)/2.
        for n in [4usize, 10, 50] {
            let mut d = vec![1i64; n / 2];
            d.extend(vec![-1i64; n / 2]);
            let q = QuadraticHarmonic::new(spectrum(&d)).unwrap();
            assert_eq!(q.c_squared(), &Rational::new(n as i64 + 2, 2));
        }
    }

    #[test]
    fn rejects_nonzero_trace() {
        assert!(matches!(
            QuadraticHarmonic::new(spectrum(&[1, 1])),
            Err(EigenError::NonzeroTrace)
        ));
    }

    #[test]
    fn rejects_zero_spectrum() {
        assert!(matches!(
            QuadraticHarmonic::new(spectrum(&[0, 0, 0])),
            Err(EigenError::ZeroSpectrum)
        ));
    }

    #[test]
    fn second_moment_is_one_exactly() {
        let q = QuadraticHarmonic::new(spectrum(&[3, -1, -2, 0, 0])).unwrap();
        let f_sq = q.f_squared_polynomial();
        assert_eq!(polynomial_expectation(&f_sq).unwrap(), Rational::one());
    }

    #[test]
    fn stokes_gives_eigenvalue() {
        // E‖∇_S f‖² = 2n exactly.
        let q = QuadraticHarmonic::new(spectrum(&[2, -1, -1, 0])).unwrap();
        let grad_sq = q.gradient_sq_polynomial();
        assert_eq!(
            polynomial_expectation(&grad_sq).unwrap(),
            Rational::from_int(8)
        );
    }

    #[test]
    fn eval_at_basis_vector() {
        // x = e_1 leaves only d_1: f(e_1) = C·d_1.
        let q = QuadraticHarmonic::new(spectrum(&[1, -1, 0, 0])).unwrap();
        let mut x = vec![0.0; 4];
        x[0] = 1.0;
        let c = q.c_squared().to_f64().sqrt();
        assert!((q.eval(&x) - c).abs() < 1e-14);
    }

    #[test]
    fn from_matrix_recovers_diagonal_spectrum() {
        // Rotated diag(1, -1) still yields C² = 2 and eigenvalue spectrum
        // {1, -1} up to float noise.
        let (c, s) = (0.6_f64, 0.8_f64);
        // R diag(1,-1) R^T for the rotation R = [[c,-s],[s,c]].
        let a = [
            c * c - s * s,
            2.0 * c * s,
            2.0 * c * s,
            s * s - c * c,
        ];
        let q = QuadraticHarmonic::from_symmetric_matrix(&a, 2).unwrap();
        assert!((q.c_squared().to_f64() - 2.0).abs() < 1e-9);
        let mut eig: Vec<f64> = q.spectrum().iter().map(Rational::to_f64).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((eig[0] + 1.0).abs() < 1e-10);
        assert!((eig[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn from_matrix_rejects_asymmetric_and_traced() {
        let a = [0.0, 1.0, 0.0, 0.0];
        assert!(matches!(
            QuadraticHarmonic::from_symmetric_matrix(&a, 2),
            Err(EigenError::NotSymmetric)
        ));
        let a = [1.0, 0.0, 0.0, 1.0];
        assert!(matches!(
            QuadraticHarmonic::from_symmetric_matrix(&a, 2),
            Err(EigenError::NonzeroTrace)
        ));
    }

    #[test]
    fn numeric_gradient_agrees_with_polynomial() {
        let q = QuadraticHarmonic::new(spectrum(&[5, -3, -2, 1, -1])).unwrap();
        let poly = q.gradient_sq_polynomial();
        for s in 0..50 {
            let mut x: Vec<f64> = (0..5)
                .map(|i| ((s * 5 + i) as f64 * 1.2345).cos())
                .collect();
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= norm);
            let numeric = q.gradient_norm_squared(&x);
            let symbolic = poly.eval_f64(&x);
            assert!((numeric - symbolic).abs() <= 1e-10 * symbolic.abs().max(1.0));
        }
    }
}
