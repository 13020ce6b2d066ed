//! Exact expectations of monomials and sparse polynomials under the uniform
//! probability measure on the unit sphere `S^{n-1}`.
//!
//! The monomial moment is the classical Γ-ratio
//!
//! ```text
//! E[Π X_i^{α_i}] = Γ(β_1)···Γ(β_n) Γ(n/2) / (Γ(β_1+···+β_n) π^{n/2}),
//! β_i = (α_i + 1)/2,
//! ```
//!
//! evaluated entirely in rational arithmetic: with every `α_i` even, the
//! accumulated powers of √π cancel identically and the result is rational.
//! Odd exponents integrate to zero by sign symmetry and are short-circuited.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact_arith::{gamma_half, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MomentError {
    #[error("sphere dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("variable index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// Exponent vector of a monomial in `n` variables, stored sparsely.
///
/// Only strictly positive exponents are kept; indices are 0-based and must
/// be below the ambient dimension.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    n: usize,
    exponents: BTreeMap<usize, u32>,
}

impl MultiIndex {
    pub fn new(
        n: usize,
        exponents: impl IntoIterator<Item = (usize, u32)>,
    ) -> Result<Self, MomentError> {
        let mut map = BTreeMap::new();
        for (index, exp) in exponents {
            if index >= n {
                return Err(MomentError::IndexOutOfRange { index, n });
            }
            if exp > 0 {
                *map.entry(index).or_insert(0) += exp;
            }
        }
        Ok(MultiIndex { n, exponents: map })
    }

    /// The constant monomial `1`.
    pub fn empty(n: usize) -> Self {
        MultiIndex {
            n,
            exponents: BTreeMap::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn exponents(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.exponents.iter().map(|(&i, &e)| (i, e))
    }

    pub fn total_degree(&self) -> u64 {
        self.exponents.values().map(|&e| u64::from(e)).sum()
    }

    pub fn all_even(&self) -> bool {
        self.exponents.values().all(|e| e % 2 == 0)
    }

    /// Product of two monomials (exponents add).
    pub fn mul(&self, other: &MultiIndex) -> Result<MultiIndex, MomentError> {
        if self.n != other.n {
            return Err(MomentError::DimensionMismatch(self.n, other.n));
        }
        let mut exponents = self.exponents.clone();
        for (&i, &e) in &other.exponents {
            *exponents.entry(i).or_insert(0) += e;
        }
        Ok(MultiIndex {
            n: self.n,
            exponents,
        })
    }

    /// Sorted exponent multiset; the moment depends on the index only
    /// through this pattern.
    pub fn pattern(&self) -> Vec<u32> {
        let mut p: Vec<u32> = self.exponents.values().copied().collect();
        p.sort_unstable();
        p
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.exponents
            .iter()
            .map(|(&i, &e)| x[i].powi(e as i32))
            .product()
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponents.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .exponents
            .iter()
            .map(|(i, e)| {
                if *e == 1 {
                    format!("x{}", i)
                } else {
                    format!("x{}^{}", i, e)
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Sparse multivariate polynomial over [`Rational`] in `n` ambient
/// variables. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpherePolynomial {
    n: usize,
    terms: BTreeMap<MultiIndex, Rational>,
}

impl SpherePolynomial {
    pub fn zero(n: usize) -> Self {
        SpherePolynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        let mut p = SpherePolynomial::zero(n);
        p.add_term(MultiIndex::empty(n), c);
        p
    }

    pub fn from_terms(
        n: usize,
        terms: impl IntoIterator<Item = (MultiIndex, Rational)>,
    ) -> Result<Self, MomentError> {
        let mut p = SpherePolynomial::zero(n);
        for (mi, c) in terms {
            if mi.dimension() != n {
                return Err(MomentError::DimensionMismatch(mi.dimension(), n));
            }
            p.add_term(mi, c);
        }
        Ok(p)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c · m`, dropping the entry if the coefficient cancels.
    pub fn add_term(&mut self, m: MultiIndex, c: Rational) {
        debug_assert_eq!(m.dimension(), self.n);
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &SpherePolynomial) -> Result<SpherePolynomial, MomentError> {
        if self.n != other.n {
            return Err(MomentError::DimensionMismatch(self.n, other.n));
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SpherePolynomial) -> Result<SpherePolynomial, MomentError> {
        self.add(&other.scale(&Rational::from_int(-1)))
    }

    pub fn scale(&self, c: &Rational) -> SpherePolynomial {
        if c.is_zero() {
            return SpherePolynomial::zero(self.n);
        }
        SpherePolynomial {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v * c))
                .collect(),
        }
    }

    pub fn mul(&self, other: &SpherePolynomial) -> Result<SpherePolynomial, MomentError> {
        if self.n != other.n {
            return Err(MomentError::DimensionMismatch(self.n, other.n));
        }
        let mut out = SpherePolynomial::zero(self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb)?, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn square(&self) -> SpherePolynomial {
        self.mul(self).expect("same dimension")
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| c.to_f64() * m.eval_f64(x))
            .sum()
    }
}

impl fmt::Debug for SpherePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("({})·{:?}", c, m))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `E[Π X_i^{α_i}]` for `X` uniform on `S^{n-1}`, exactly.
///
/// Zero when any exponent is odd. All √π bookkeeping cancels identically,
/// which is asserted in debug builds.
pub fn monomial_moment(n: usize, alpha: &MultiIndex) -> Result<Rational, MomentError> {
    if n < 2 {
        return Err(MomentError::DimensionTooSmall(n));
    }
    if alpha.dimension() != n {
        return Err(MomentError::DimensionMismatch(alpha.dimension(), n));
    }
    Ok(moment_of_pattern(n, &alpha.pattern()))
}

/// Moment of a monomial given only its exponent multiset.
fn moment_of_pattern(n: usize, pattern: &[u32]) -> Rational {
    if pattern.iter().any(|e| e % 2 == 1) {
        return Rational::zero();
    }
    let total: u64 = pattern.iter().map(|&e| u64::from(e)).sum();
    if total == 0 {
        return Rational::one();
    }
    let k = pattern.len() as i64;
    let n_i = n as i64;

    let mut coeff = Rational::one();
    let mut sqrt_pi_exp: i64 = 0;

    // Γ(β_i) for the k variables that actually appear; β_i = (α_i+1)/2.
    for &e in pattern {
        let g = gamma_half(i64::from(e) + 1).expect("positive argument");
        coeff *= &g.coeff;
        sqrt_pi_exp += i64::from(g.sqrt_pi_power);
    }
    // The n-k absent variables each contribute Γ(1/2) = √π.
    sqrt_pi_exp += n_i - k;
    // Γ(n/2) in the numerator.
    let gn = gamma_half(n_i).expect("n >= 2");
    coeff *= &gn.coeff;
    sqrt_pi_exp += i64::from(gn.sqrt_pi_power);
    // Γ(Σβ_i) = Γ(n/2 + total/2) and π^{n/2} in the denominator.
    let gd = gamma_half(n_i + total as i64).expect("positive");
    coeff /= &gd.coeff;
    sqrt_pi_exp -= i64::from(gd.sqrt_pi_power);
    sqrt_pi_exp -= n_i;

    debug_assert_eq!(sqrt_pi_exp, 0, "√π powers must cancel for even moments");
    coeff
}

/// `E[p(X)]` by linearity, with the per-pattern moments memoized across the
/// polynomial's terms.
pub fn polynomial_expectation(p: &SpherePolynomial) -> Result<Rational, MomentError> {
    let n = p.dimension();
    if n < 2 {
        return Err(MomentError::DimensionTooSmall(n));
    }
    let mut cache: HashMap<Vec<u32>, Rational> = HashMap::new();
    let mut acc = Rational::zero();
    for (m, c) in p.terms() {
        let pattern = m.pattern();
        if pattern.iter().any(|e| e % 2 == 1) {
            continue;
        }
        let moment = cache
            .entry(pattern)
            .or_insert_with_key(|pat| moment_of_pattern(n, pat));
        acc += c * &*moment;
    }
    Ok(acc)
}

/// `E[p(X)²]` without materializing `p²`: coefficient products are grouped
/// by the exponent pattern of each term pair, then weighted by the pattern
/// moments. Equal to `polynomial_expectation(&p.square())` but avoids the
/// quartic-size intermediate term map.
pub fn expectation_of_square(p: &SpherePolynomial) -> Result<Rational, MomentError> {
    let n = p.dimension();
    if n < 2 {
        return Err(MomentError::DimensionTooSmall(n));
    }
    let terms: Vec<(Vec<(usize, u32)>, &Rational)> = p
        .terms()
        .map(|(m, c)| (m.exponents().collect(), c))
        .collect();
    // Sum of coefficient products per merged exponent pattern.
    let mut pattern_sums: HashMap<Vec<u32>, Rational> = HashMap::new();
    let mut merged: Vec<u32> = Vec::new();
    for i in 0..terms.len() {
        for j in i..terms.len() {
            merged.clear();
            let (a, b) = (&terms[i].0, &terms[j].0);
            let (mut ia, mut ib) = (0, 0);
            let mut any_odd = false;
            while ia < a.len() || ib < b.len() {
                let e = if ib >= b.len() || (ia < a.len() && a[ia].0 < b[ib].0) {
                    let e = a[ia].1;
                    ia += 1;
                    e
                } else if ia >= a.len() || b[ib].0 < a[ia].0 {
                    let e = b[ib].1;
                    ib += 1;
                    e
                } else {
                    let e = a[ia].1 + b[ib].1;
                    ia += 1;
                    ib += 1;
                    e
                };
                any_odd |= e % 2 == 1;
                merged.push(e);
            }
            if any_odd {
                continue;
            }
            merged.sort_unstable();
            let mut c = terms[i].1 * terms[j].1;
            if i != j {
                c += c.clone();
            }
            match pattern_sums.entry(merged.clone()) {
                std::collections::hash_map::Entry::Vacant(v) => {
                    v.insert(c);
                }
                std::collections::hash_map::Entry::Occupied(mut o) => {
                    *o.get_mut() += c;
                }
            }
        }
    }
    let mut acc = Rational::zero();
    for (pattern, coeff_sum) in pattern_sums {
        acc += moment_of_pattern(n, &pattern) * coeff_sum;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::double_factorial;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    /// Independent oracle: for all-even exponents with total degree 2A,
    /// E[Π X_i^{α_i}] = Π (α_i - 1)!! / Π_{j=0}^{A-1} (n + 2j).
    fn double_factorial_moment(n: usize, pattern: &[u32]) -> Rational {
        if pattern.iter().any(|e| e % 2 == 1) {
            return Rational::zero();
        }
        let mut num = BigInt::from(1);
        for &e in pattern {
            num *= double_factorial(i64::from(e) - 1);
        }
        let a: u64 = pattern.iter().map(|&e| u64::from(e)).sum::<u64>() / 2;
        let mut den = BigInt::from(1);
        for j in 0..a {
            den *= BigInt::from(n as u64 + 2 * j);
        }
        Rational::from_big(num, den)
    }

    fn mi(n: usize, pairs: &[(usize, u32)]) -> MultiIndex {
        MultiIndex::new(n, pairs.iter().copied()).unwrap()
    }

    #[test]
    fn empty_monomial_integrates_to_one() {
        for n in 2..8 {
            assert_eq!(
                monomial_moment(n, &MultiIndex::empty(n)).unwrap(),
                Rational::one()
            );
        }
    }

    #[test]
    fn squared_coordinate_is_one_over_n() {
        for n in 2..10 {
            assert_eq!(
                monomial_moment(n, &mi(n, &[(0, 2)])).unwrap(),
                Rational::new(1, n as i64)
            );
        }
    }

    #[test]
    fn degree_four_moments() {
        for n in 2..10usize {
            let nn = n as i64;
            assert_eq!(
                monomial_moment(n, &mi(n, &[(0, 4)])).unwrap(),
                Rational::new(3, nn * (nn + 2))
            );
            assert_eq!(
                monomial_moment(n, &mi(n, &[(0, 2), (1, 2)])).unwrap(),
                Rational::new(1, nn * (nn + 2))
            );
        }
    }

    #[test]
    fn odd_exponents_vanish() {
        assert_eq!(
            monomial_moment(5, &mi(5, &[(0, 1), (1, 2)])).unwrap(),
            Rational::zero()
        );
        assert_eq!(
            monomial_moment(5, &mi(5, &[(2, 3)])).unwrap(),
            Rational::zero()
        );
    }

    #[test]
    fn rejects_low_dimension() {
        assert!(matches!(
            monomial_moment(1, &MultiIndex::empty(1)),
            Err(MomentError::DimensionTooSmall(1))
        ));
    }

    #[test]
    fn multi_index_rejects_out_of_range() {
        assert!(matches!(
            MultiIndex::new(3, [(3, 2)]),
            Err(MomentError::IndexOutOfRange { index: 3, n: 3 })
        ));
    }

    #[test]
    fn gamma_ratio_agrees_with_double_factorial_form() {
        // Two independent exact evaluations for every even multi-index of
        // total degree <= 8 in up to 4 active variables.
        for n in 2..=12usize {
            let patterns: Vec<Vec<u32>> = vec![
                vec![2],
                vec![4],
                vec![6],
                vec![8],
                vec![2, 2],
                vec![4, 2],
                vec![6, 2],
                vec![4, 4],
                vec![2, 2, 2],
                vec![4, 2, 2],
                vec![2, 2, 2, 2],
            ];
            for pat in patterns {
                if pat.len() > n {
                    continue;
                }
                let pairs: Vec<(usize, u32)> =
                    pat.iter().enumerate().map(|(i, &e)| (i, e)).collect();
                let idx = mi(n, &pairs);
                assert_eq!(
                    monomial_moment(n, &idx).unwrap(),
                    double_factorial_moment(n, &pat),
                    "n={n}, pattern={pat:?}"
                );
            }
        }
    }

    #[test]
    fn unit_sphere_constraint() {
        // E[Σ x_i^2] = 1 on S^{n-1}.
        let n = 7;
        let mut p = SpherePolynomial::zero(n);
        for i in 0..n {
            p.add_term(mi(n, &[(i, 2)]), Rational::one());
        }
        assert_eq!(polynomial_expectation(&p).unwrap(), Rational::one());
    }

    #[test]
    fn antisymmetric_difference_vanishes() {
        let n = 5;
        let mut p = SpherePolynomial::zero(n);
        p.add_term(mi(n, &[(0, 2)]), Rational::one());
        p.add_term(mi(n, &[(1, 2)]), Rational::from_int(-1));
        assert_eq!(polynomial_expectation(&p).unwrap(), Rational::zero());
    }

    #[test]
    fn squared_difference_expectation() {
        // (x_1^2 - x_2^2)^2 at n = 4: 2·(3/24) - 2·(1/24) = 1/6.
        let n = 4;
        let mut p = SpherePolynomial::zero(n);
        p.add_term(mi(n, &[(0, 2)]), Rational::one());
        p.add_term(mi(n, &[(1, 2)]), Rational::from_int(-1));
        let sq = p.square();
        assert_eq!(polynomial_expectation(&sq).unwrap(), Rational::new(1, 6));
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let n = 3;
        let mut p = SpherePolynomial::zero(n);
        p.add_term(mi(n, &[(0, 2)]), Rational::one());
        p.add_term(mi(n, &[(0, 2)]), Rational::from_int(-1));
        assert!(p.is_zero());
    }

    #[test]
    fn expectation_of_square_matches_materialized_square() {
        // The pair-accumulation path and the explicit polynomial square
        // must agree exactly.
        let n = 6;
        let mut p = SpherePolynomial::zero(n);
        p.add_term(mi(n, &[(0, 2)]), Rational::new(3, 2));
        p.add_term(mi(n, &[(1, 2)]), Rational::new(-5, 3));
        p.add_term(mi(n, &[(2, 2), (3, 2)]), Rational::from_int(2));
        p.add_term(mi(n, &[(4, 1)]), Rational::new(7, 4));
        p.add_term(mi(n, &[(0, 1), (5, 1)]), Rational::from_int(-1));
        assert_eq!(
            expectation_of_square(&p).unwrap(),
            polynomial_expectation(&p.square()).unwrap()
        );
    }

    proptest! {
        // Scaling commutes with expectation.
        #[test]
        fn expectation_is_linear(c_num in -9i64..9, c_den in 1i64..5) {
            let n = 5;
            let mut p = SpherePolynomial::zero(n);
            p.add_term(mi(n, &[(0, 2)]), Rational::new(3, 2));
            p.add_term(mi(n, &[(1, 4)]), Rational::new(-1, 3));
            p.add_term(mi(n, &[(0, 2), (2, 2)]), Rational::from_int(2));
            let c = Rational::new(c_num, c_den);
            let lhs = polynomial_expectation(&p.scale(&c)).unwrap();
            let rhs = polynomial_expectation(&p).unwrap() * &c;
            prop_assert_eq!(lhs, rhs);
        }

        // The moment is invariant under permutations of the variables.
        #[test]
        fn moment_is_permutation_invariant(
            e0 in (0u32..4).prop_map(|e| e * 2),
            e1 in (0u32..4).prop_map(|e| e * 2),
            e2 in (0u32..3).prop_map(|e| e * 2),
            shift in 0usize..4,
        ) {
            let n = 7;
            let a = mi(n, &[(0, e0), (1, e1), (2, e2)]);
            let b = mi(n, &[(shift, e0), (shift + 1, e1), (shift + 2, e2)]);
            prop_assert_eq!(
                monomial_moment(n, &a).unwrap(),
                monomial_moment(n, &b).unwrap()
            );
        }
    }
}
