//! Eigenfunctions on the flat torus `(T^n, B)`: real parts of linear
//! combinations `Σ a_v e^{2πi⟨Bv, x⟩}` over a finite frequency set `V` with
//! `Bv` integer-valued and `‖a‖₂² = 2`.
//!
//! The eigenvalue attached to `v` is `μ_v = (2π ‖v‖_B)²`; `‖v‖_B² = ⟨Bv, v⟩`
//! is kept as an exact rational so eigenvalue-spread quantities stay exact.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::exact_arith::Rational;

use super::{Coefficients, EigenError};

/// A validated metric + frequency set, independent of any coefficient draw.
///
/// Checks on construction: `B` symmetric positive definite (exactly, via
/// rational elimination), every `Bv` integer-valued, and `v + w ≠ 0` for
/// all `v, w` in the set (so distinct frequencies never alias and no
/// frequency is zero).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "TorusFrequencySetJson", into = "TorusFrequencySetJson")]
pub struct TorusFrequencySet {
    n: usize,
    b: Vec<Vec<Rational>>,
    freqs: Vec<Vec<Rational>>,
    b_norm_sq: Vec<Rational>,
    /// Sparse integer rows of `Bv`, one per frequency.
    bv_int: Vec<Vec<(usize, BigInt)>>,
    #[serde(skip)]
    b_f64: Vec<f64>,
    #[serde(skip)]
    bv_f64: Vec<Vec<(usize, f64)>>,
    #[serde(skip)]
    freqs_f64: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct TorusFrequencySetJson {
    b: Vec<Vec<Rational>>,
    frequencies: Vec<Vec<Rational>>,
}

impl TryFrom<TorusFrequencySetJson> for TorusFrequencySet {
    type Error = EigenError;
    fn try_from(j: TorusFrequencySetJson) -> Result<Self, EigenError> {
        TorusFrequencySet::new(j.b, j.frequencies)
    }
}

impl From<TorusFrequencySet> for TorusFrequencySetJson {
    fn from(t: TorusFrequencySet) -> Self {
        TorusFrequencySetJson {
            b: t.b,
            frequencies: t.freqs,
        }
    }
}

/// All leading principal pivots of a symmetric rational matrix are positive.
#[allow(clippy::needless_range_loop)] // in-place elimination wants indices
fn is_spd_exact(b: &[Vec<Rational>]) -> bool {
    let n = b.len();
    let mut m: Vec<Vec<Rational>> = b.to_vec();
    for k in 0..n {
        let pivot = m[k][k].clone();
        if pivot.is_zero() || pivot.is_negative() {
            return false;
        }
        for i in (k + 1)..n {
            let factor = &m[i][k] / &pivot;
            if factor.is_zero() {
                continue;
            }
            for j in k..n {
                let delta = &factor * &m[k][j];
                m[i][j] -= delta;
            }
        }
    }
    true
}

impl TorusFrequencySet {
    #[allow(clippy::needless_range_loop)] // symmetry check reads b[i][j] vs b[j][i]
    pub fn new(b: Vec<Vec<Rational>>, freqs: Vec<Vec<Rational>>) -> Result<Self, EigenError> {
        let n = b.len();
        if n == 0 || b.iter().any(|row| row.len() != n) {
            return Err(EigenError::DimensionMismatch {
                expected: n,
                got: b.iter().map(Vec::len).max().unwrap_or(0),
            });
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if b[i][j] != b[j][i] {
                    return Err(EigenError::NotSymmetric);
                }
            }
        }
        if !is_spd_exact(&b) {
            return Err(EigenError::NotPositiveDefinite);
        }
        if freqs.is_empty() {
            return Err(EigenError::EmptyFrequencies);
        }
        for v in &freqs {
            if v.len() != n {
                return Err(EigenError::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
        }
        // v + w != 0 for every ordered pair, including v = w.
        for (i, v) in freqs.iter().enumerate() {
            for w in freqs.iter().skip(i) {
                let all_zero = v
                    .iter()
                    .zip(w)
                    .all(|(vi, wi)| (vi + wi).is_zero());
                if all_zero {
                    return Err(EigenError::OppositeFrequencies);
                }
            }
        }
        let mut b_norm_sq = Vec::with_capacity(freqs.len());
        let mut bv_int = Vec::with_capacity(freqs.len());
        for v in &freqs {
            let bv: Vec<Rational> = (0..n)
                .map(|i| {
                    v.iter()
                        .enumerate()
                        .map(|(j, vj)| &b[i][j] * vj)
                        .sum::<Rational>()
                })
                .collect();
            let mut sparse = Vec::new();
            for (i, entry) in bv.iter().enumerate() {
                if !entry.is_integer() {
                    return Err(EigenError::NonIntegerFrequency);
                }
                if !entry.is_zero() {
                    sparse.push((i, entry.numer().clone()));
                }
            }
            let norm_sq: Rational = bv.iter().zip(v).map(|(bvi, vi)| bvi * vi).sum();
            b_norm_sq.push(norm_sq);
            bv_int.push(sparse);
        }
        let b_f64: Vec<f64> = b
            .iter()
            .flat_map(|row| row.iter().map(Rational::to_f64))
            .collect();
        let bv_f64: Vec<Vec<(usize, f64)>> = bv_int
            .iter()
            .map(|row| {
                row.iter()
                    .map(|(i, z)| (*i, z.to_f64().expect("integer fits f64")))
                    .collect()
            })
            .collect();
        let freqs_f64: Vec<Vec<f64>> = freqs
            .iter()
            .map(|v| v.iter().map(Rational::to_f64).collect())
            .collect();
        Ok(TorusFrequencySet {
            n,
            b,
            freqs,
            b_norm_sq,
            bv_int,
            b_f64,
            bv_f64,
            freqs_f64,
        })
    }

    /// The square torus `B = I` with a caller-supplied frequency set.
    pub fn square_lattice(n: usize, freqs: Vec<Vec<Rational>>) -> Result<Self, EigenError> {
        let b: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            Rational::one()
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        TorusFrequencySet::new(b, freqs)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn metric(&self) -> &[Vec<Rational>] {
        &self.b
    }

    pub fn metric_f64(&self) -> &[f64] {
        &self.b_f64
    }

    pub fn frequencies(&self) -> &[Vec<Rational>] {
        &self.freqs
    }

    /// `‖v‖_B²` per frequency, exact.
    pub fn b_norm_squared(&self) -> &[Rational] {
        &self.b_norm_sq
    }

    /// `μ_v = (2π)² ‖v‖_B²` per frequency.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let four_pi_sq = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
        self.b_norm_sq
            .iter()
            .map(|q| four_pi_sq * q.to_f64())
            .collect()
    }

    /// Mean of `‖v‖_B²` over the set, exact (`μ/(2π)²` for the default μ).
    pub fn mean_b_norm_squared(&self) -> Rational {
        let total: Rational = self.b_norm_sq.iter().cloned().sum();
        total / Rational::from_int(self.len() as i64)
    }

    /// `(v, w)_B = ⟨Bv, w⟩`, exact.
    pub fn gram_entry(&self, i: usize, j: usize) -> Rational {
        self.bv_int[i]
            .iter()
            .map(|(idx, z)| Rational::from_bigint(z.clone()) * &self.freqs[j][*idx])
            .sum()
    }

    /// `Σ_{v,w} (v,w)_B²` over all ordered pairs, exact.
    pub fn sum_gram_squared(&self) -> Rational {
        let m = self.len();
        let mut acc = Rational::zero();
        for i in 0..m {
            // (v_i, v_i)_B² once...
            let diag = &self.b_norm_sq[i];
            acc += diag * diag;
            // ...and off-diagonal pairs twice by symmetry of the metric.
            for j in (i + 1)..m {
                let g = self.gram_entry(i, j);
                acc += Rational::from_int(2) * &g * &g;
            }
        }
        acc
    }

    /// `2π ⟨Bv_k, x⟩` for a point of the torus.
    #[inline]
    fn phase(&self, k: usize, x: &[f64]) -> f64 {
        let dot: f64 = self.bv_f64[k].iter().map(|&(i, c)| c * x[i]).sum();
        2.0 * std::f64::consts::PI * dot
    }

    pub fn frequency_f64(&self, k: usize) -> &[f64] {
        &self.freqs_f64[k]
    }
}

/// A concrete random eigenfunction on the torus: a frequency set plus one
/// coefficient vector with `‖a‖₂² = 2`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "TorusComboJson", into = "TorusComboJson")]
pub struct TorusCombo {
    freq_set: TorusFrequencySet,
    coeffs: Coefficients,
    #[serde(skip)]
    coeffs_f64: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TorusComboJson {
    b: Vec<Vec<Rational>>,
    frequencies: Vec<Vec<Rational>>,
    coefficients: Coefficients,
}

impl TryFrom<TorusComboJson> for TorusCombo {
    type Error = EigenError;
    fn try_from(j: TorusComboJson) -> Result<Self, EigenError> {
        let fs = TorusFrequencySet::new(j.b, j.frequencies)?;
        TorusCombo::new(fs, j.coefficients)
    }
}

impl From<TorusCombo> for TorusComboJson {
    fn from(t: TorusCombo) -> Self {
        TorusComboJson {
            b: t.freq_set.b.clone(),
            frequencies: t.freq_set.freqs.clone(),
            coefficients: t.coeffs,
        }
    }
}

impl TorusCombo {
    pub fn new(freq_set: TorusFrequencySet, coeffs: Coefficients) -> Result<Self, EigenError> {
        if coeffs.len() != freq_set.len() {
            return Err(EigenError::DimensionMismatch {
                expected: freq_set.len(),
                got: coeffs.len(),
            });
        }
        let two = Rational::from_int(2);
        match &coeffs {
            Coefficients::Exact(a) => {
                let sum_sq: Rational = a.iter().map(|c| c * c).sum();
                if sum_sq != two {
                    return Err(EigenError::BadCoefficientNorm {
                        expected: 2.0,
                        got: sum_sq.to_f64(),
                    });
                }
            }
            Coefficients::Float(a) => {
                let sum_sq: f64 = a.iter().map(|c| c * c).sum();
                if (sum_sq - 2.0).abs() > super::gegenbauer::COEFF_NORM_TOL {
                    return Err(EigenError::BadCoefficientNorm {
                        expected: 2.0,
                        got: sum_sq,
                    });
                }
            }
        }
        let coeffs_f64 = coeffs.to_f64_vec();
        Ok(TorusCombo {
            freq_set,
            coeffs,
            coeffs_f64,
        })
    }

    pub fn frequency_set(&self) -> &TorusFrequencySet {
        &self.freq_set
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn dimension(&self) -> usize {
        self.freq_set.dimension()
    }

    /// `f(x) = Re Σ a_v e^{2πi⟨Bv,x⟩} = Σ a_v cos(2π⟨Bv,x⟩)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coeffs_f64
            .iter()
            .enumerate()
            .map(|(k, &a)| a * self.freq_set.phase(k, x).cos())
            .sum()
    }

    /// `∇_B f(x) = -2π Σ a_v sin(2π⟨Bv,x⟩) v` in coordinates.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dimension();
        let mut g = vec![0.0; n];
        for (k, &a) in self.coeffs_f64.iter().enumerate() {
            let weight = -2.0 * std::f64::consts::PI * a * self.freq_set.phase(k, x).sin();
            if weight == 0.0 {
                continue;
            }
            for (i, &vi) in self.freq_set.frequency_f64(k).iter().enumerate() {
                g[i] += weight * vi;
            }
        }
        g
    }

    /// `‖∇_B f(x)‖_B² = ⟨B ∇_B f, ∇_B f⟩`.
    pub fn gradient_norm_squared(&self, x: &[f64]) -> f64 {
        let n = self.dimension();
        let g = self.gradient(x);
        let b = self.freq_set.metric_f64();
        let mut acc = 0.0;
        for i in 0..n {
            let row: f64 = (0..n).map(|j| b[i * n + j] * g[j]).sum();
            acc += row * g[i];
        }
        acc
    }

    /// `Δ_B f(x) = -Σ a_v μ_v cos(2π⟨Bv,x⟩)` (per-frequency eigenrelation).
    pub fn laplacian(&self, x: &[f64]) -> f64 {
        let mu = self.freq_set.eigenvalues();
        self.coeffs_f64
            .iter()
            .enumerate()
            .map(|(k, &a)| -a * mu[k] * self.freq_set.phase(k, x).cos())
            .sum()
    }

    /// `E_X ‖∇_B f(X)‖_B² = ½ Σ a_v² μ_v` for this fixed coefficient draw.
    pub fn expected_gradient_sq(&self) -> f64 {
        let mu = self.freq_set.eigenvalues();
        0.5 * self
            .coeffs_f64
            .iter()
            .zip(&mu)
            .map(|(&a, &m)| a * a * m)
            .sum::<f64>()
    }
}
