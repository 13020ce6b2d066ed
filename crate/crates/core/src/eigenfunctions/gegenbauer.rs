//! Gegenbauer (ultraspherical) polynomials with exact rational coefficients,
//! and the odd-degree zonal eigenfunction family built from them.
//!
//! `C^k_m` is evaluated from its explicit alternating sum; the upper index
//! is passed doubled (`k_times_two`) so half-integer indices stay exact.
//! Degrees in this crate are small (`m <= ~25`), so the explicit sum is both
//! exact and fast — no recurrence, no cancellation questions.

use serde::{Deserialize, Serialize};

use crate::exact_arith::{factorial, shifted_factorial, Rational};
use crate::sphere_moments::{MultiIndex, SpherePolynomial};

use super::{Coefficients, EigenError};

/// Coefficient list of `C^{k}_m(t)`, `k = k_times_two/2`, as
/// `(power of t, rational coefficient)` pairs in descending power order.
///
/// The `j`-th term has power `m - 2j` and coefficient
/// `2^m (-1)^j (k)_{m-j} / (2^{2j} j! (m-2j)!)`.
pub fn gegenbauer_coeffs(k_times_two: u32, m: u32) -> Vec<(u32, Rational)> {
    assert!(k_times_two >= 1, "gegenbauer upper index must be positive");
    let k = Rational::new(i64::from(k_times_two), 2);
    let mut out = Vec::with_capacity(m as usize / 2 + 1);
    for j in 0..=(m / 2) {
        let sign = if j % 2 == 0 { 1 } else { -1 };
        let mut num = shifted_factorial(&k, m - j);
        num *= Rational::from_int(sign);
        num *= Rational::from_bigint(num_bigint::BigInt::from(1u8) << (m as usize));
        let mut den = Rational::from_bigint(factorial(u64::from(j)));
        den *= Rational::from_bigint(factorial(u64::from(m - 2 * j)));
        den *= Rational::from_bigint(num_bigint::BigInt::from(1u8) << (2 * j as usize));
        out.push((m - 2 * j, num / den));
    }
    out
}

/// `C^{k}_m(t)` exactly, for rational `t`.
pub fn gegenbauer(k_times_two: u32, m: u32, t: &Rational) -> Rational {
    gegenbauer_coeffs(k_times_two, m)
        .into_iter()
        .map(|(pow, c)| c * t.pow(pow as i32))
        .sum()
}

/// `C^{k}_m(t)` in floating point (coefficients come from the exact list).
pub fn gegenbauer_f64(k_times_two: u32, m: u32, t: f64) -> f64 {
    ZonalPoly::new(k_times_two, m, 1.0).eval(t)
}

/// A univariate even-or-odd polynomial `scale · C^k_m`, preconditioned for
/// fast repeated evaluation: Horner in `u = t²` plus a parity factor.
#[derive(Clone, Debug)]
pub struct ZonalPoly {
    /// Coefficients of the polynomial in `u = t²`, ascending.
    u_coeffs: Vec<f64>,
    odd: bool,
}

impl ZonalPoly {
    pub fn new(k_times_two: u32, m: u32, scale: f64) -> Self {
        let coeffs = gegenbauer_coeffs(k_times_two, m);
        let odd = m % 2 == 1;
        let mut u_coeffs = vec![0.0; m as usize / 2 + 1];
        for (pow, c) in coeffs {
            let u_pow = (pow / 2) as usize;
            u_coeffs[u_pow] = c.to_f64() * scale;
        }
        ZonalPoly { u_coeffs, odd }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let u = t * t;
        let mut acc = 0.0;
        for &c in self.u_coeffs.iter().rev() {
            acc = acc * u + c;
        }
        if self.odd {
            acc * t
        } else {
            acc
        }
    }
}

/// `A² = (n-3)! ℓ! (n+2ℓ-2) / ((n+ℓ-3)! (n-2))`, the squared normalization
/// making `E[(A C^{(n-2)/2}_ℓ(X_1))²] = 1` on `S^{n-1}`.
///
/// Computed as `ℓ!(n+2ℓ-2) / ((n-2) Π_{j=n-2}^{n+ℓ-3} j)` so large `n`
/// never materializes a large factorial.
pub fn harmonic_normalizer_squared(n: usize, ell: u32) -> Result<Rational, EigenError> {
    if n < 4 {
        return Err(EigenError::DimensionTooSmall { n, min: 4 });
    }
    if ell < 1 {
        return Err(EigenError::EvenDegree(ell));
    }
    let n = n as i64;
    let ell_i = i64::from(ell);
    let mut num = Rational::from_bigint(factorial(u64::from(ell)));
    num *= Rational::from_int(n + 2 * ell_i - 2);
    let mut den = Rational::from_int(n - 2);
    for j in (n - 2)..=(n + ell_i - 3) {
        den *= Rational::from_int(j);
    }
    Ok(num / den)
}

/// Linear combination `p(x) = Σ_k a_k · A C^{(n-2)/2}_ℓ(x_k)` of the zonal
/// eigenfunctions of odd degree `ℓ` on `S^{n-1}`, with `Σ a_k² = 1`.
///
/// Eigenvalue of `-Δ` is `ℓ(n+ℓ-2)`. Exact polynomial forms (`f²` and the
/// spherical gradient square) are available when the coefficients are
/// rational.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "GegenbauerComboJson", into = "GegenbauerComboJson")]
pub struct GegenbauerCombo {
    n: usize,
    ell: u32,
    coeffs: Coefficients,
    normalizer_squared: Rational,
    #[serde(skip)]
    coeffs_f64: Vec<f64>,
    #[serde(skip)]
    zonal: Option<ZonalPoly>,
    #[serde(skip)]
    zonal_deriv: Option<ZonalPoly>,
}

#[derive(Serialize, Deserialize)]
struct GegenbauerComboJson {
    n: usize,
    ell: u32,
    coefficients: Coefficients,
}

impl TryFrom<GegenbauerComboJson> for GegenbauerCombo {
    type Error = EigenError;
    fn try_from(j: GegenbauerComboJson) -> Result<Self, EigenError> {
        GegenbauerCombo::new(j.n, j.ell, j.coefficients)
    }
}

impl From<GegenbauerCombo> for GegenbauerComboJson {
    fn from(g: GegenbauerCombo) -> Self {
        GegenbauerComboJson {
            n: g.n,
            ell: g.ell,
            coefficients: g.coeffs,
        }
    }
}

/// Float coefficient vectors must satisfy constraints to this tolerance.
pub const COEFF_NORM_TOL: f64 = 1e-9;

impl GegenbauerCombo {
    pub fn new(n: usize, ell: u32, coeffs: Coefficients) -> Result<Self, EigenError> {
        if ell.is_multiple_of(2) {
            return Err(EigenError::EvenDegree(ell));
        }
        if coeffs.len() != n {
            return Err(EigenError::DimensionMismatch {
                expected: n,
                got: coeffs.len(),
            });
        }
        match &coeffs {
            Coefficients::Exact(a) => {
                let sum_sq: Rational = a.iter().map(|c| c * c).sum();
                if sum_sq != Rational::one() {
                    return Err(EigenError::BadCoefficientNorm {
                        expected: 1.0,
                        got: sum_sq.to_f64(),
                    });
                }
            }
            Coefficients::Float(a) => {
                let sum_sq: f64 = a.iter().map(|c| c * c).sum();
                if (sum_sq - 1.0).abs() > COEFF_NORM_TOL {
                    return Err(EigenError::BadCoefficientNorm {
                        expected: 1.0,
                        got: sum_sq,
                    });
                }
            }
        }
        let normalizer_squared = harmonic_normalizer_squared(n, ell)?;
        let a_f64 = normalizer_squared.to_f64().sqrt();
        let k2 = (n - 2) as u32;
        let zonal = ZonalPoly::new(k2, ell, a_f64);
        // d/dt C^{(n-2)/2}_ℓ = (n-2) C^{n/2}_{ℓ-1}
        let zonal_deriv = ZonalPoly::new(n as u32, ell - 1, a_f64 * (n as f64 - 2.0));
        let coeffs_f64 = coeffs.to_f64_vec();
        Ok(GegenbauerCombo {
            n,
            ell,
            coeffs,
            normalizer_squared,
            coeffs_f64,
            zonal: Some(zonal),
            zonal_deriv: Some(zonal_deriv),
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.ell
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn normalizer_squared(&self) -> &Rational {
        &self.normalizer_squared
    }

    pub fn eigenvalue(&self) -> f64 {
        let (n, l) = (self.n as f64, f64::from(self.ell));
        l * (n + l - 2.0)
    }

    fn zonal(&self) -> &ZonalPoly {
        self.zonal.as_ref().expect("constructed")
    }

    fn zonal_deriv(&self) -> &ZonalPoly {
        self.zonal_deriv.as_ref().expect("constructed")
    }

    /// `p(x) = A Σ_k a_k C_ℓ(x_k)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let zonal = self.zonal();
        self.coeffs_f64
            .iter()
            .zip(x)
            .filter(|(c, _)| **c != 0.0)
            .map(|(&c, &t)| c * zonal.eval(t))
            .sum()
    }

    /// Spherical gradient norm squared at `x`:
    /// `‖∇p‖² - ⟨x, ∇p⟩²` for the ambient gradient `∇p`.
    pub fn gradient_norm_squared(&self, x: &[f64]) -> f64 {
        let deriv = self.zonal_deriv();
        let mut ambient_sq = 0.0;
        let mut radial = 0.0;
        for (&c, &t) in self.coeffs_f64.iter().zip(x) {
            if c != 0.0 {
                let g = c * deriv.eval(t);
                ambient_sq += g * g;
                radial += t * g;
            }
        }
        ambient_sq - radial * radial
    }

    fn exact_coeffs(&self) -> Result<&[Rational], EigenError> {
        self.coeffs.exact().ok_or(EigenError::ExactCoefficientsRequired)
    }

    /// `C^{(n-2)/2}_ℓ(x_var)` (or its degree-(ℓ-1) derivative companion)
    /// as a sparse polynomial in the ambient variables.
    fn univariate_poly(&self, k_times_two: u32, m: u32, var: usize) -> SpherePolynomial {
        let mut p = SpherePolynomial::zero(self.n);
        for (pow, c) in gegenbauer_coeffs(k_times_two, m) {
            let mi = MultiIndex::new(self.n, [(var, pow)]).expect("var < n");
            p.add_term(mi, c);
        }
        p
    }

    /// `p² = A² (Σ a_k C_ℓ(x_k))²`, exactly. Requires rational coefficients.
    pub fn f_squared_polynomial(&self) -> Result<SpherePolynomial, EigenError> {
        let a = self.exact_coeffs()?.to_vec();
        let k2 = (self.n - 2) as u32;
        let mut combo = SpherePolynomial::zero(self.n);
        for (k, c) in a.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            combo = combo.add(&self.univariate_poly(k2, self.ell, k).scale(c))?;
        }
        Ok(combo.square().scale(&self.normalizer_squared))
    }

    /// `‖∇_S p‖² = A²(n-2)² [Σ a_k² D(x_k)² - (Σ a_k x_k D(x_k))²]` with
    /// `D = C^{n/2}_{ℓ-1}`, exactly. Requires rational coefficients.
    pub fn gradient_sq_polynomial(&self) -> Result<SpherePolynomial, EigenError> {
        let a = self.exact_coeffs()?.to_vec();
        let n = self.n;
        let mut ambient = SpherePolynomial::zero(n);
        let mut radial = SpherePolynomial::zero(n);
        for (k, c) in a.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let d_k = self.univariate_poly(n as u32, self.ell - 1, k);
            ambient = ambient.add(&d_k.square().scale(&(c * c)))?;
            let x_k = SpherePolynomial::from_terms(
                n,
                [(MultiIndex::new(n, [(k, 1)]).expect("var < n"), Rational::one())],
            )?;
            radial = radial.add(&d_k.mul(&x_k)?.scale(c))?;
        }
        let scale =
            &self.normalizer_squared * &Rational::from_int((n as i64 - 2) * (n as i64 - 2));
        Ok(ambient.sub(&radial.square())?.scale(&scale))
    }
}
