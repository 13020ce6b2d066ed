//! Exact verification of the combinatorial identities underlying the
//! degree-l analysis: the odd-degree double sum, its hypergeometric inner
//! sum, and the Chu-Vandermonde identity. Everything here is rational
//! arithmetic with exact equality — no tolerances.
//!
//! Γ at half-integers is eliminated symbolically up front
//! (`Γ(t)·π^{-1/2} → (2t-2)!!/2^{t-1/2}` for odd doubled arguments), so π
//! never appears.

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact_arith::{factorial, gamma_half, shifted_factorial, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdentityError {
    #[error("degree must be odd, got {0}")]
    EvenDegree(u32),
    #[error("k must satisfy 0 <= k <= p, got k = {k}, p = {p}")]
    KOutOfRange { p: u32, k: u32 },
    #[error("c = {0} hits a pole of the Pochhammer denominator")]
    ForbiddenC(Rational),
}

/// Outcome of one exact identity evaluation. `pass` holds exactly when
/// `computed == expected` as canonical rationals.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct IdentityResult {
    pub identity: String,
    pub params: String,
    pub computed: Rational,
    pub expected: Rational,
    pub pass: bool,
}

impl IdentityResult {
    fn new(identity: &str, params: String, computed: Rational, expected: Rational) -> Self {
        let pass = computed == expected;
        IdentityResult {
            identity: identity.to_string(),
            params,
            computed,
            expected,
            pass,
        }
    }
}

/// The double sum over `k, m = 0..(ℓ-1)/2` of
/// `(-1)^{k+m} Γ(ℓ-k-m-1/2) π^{-1/2} (ℓ-1)! / (4^{k+m} k! m! (ℓ-1-2k)! (ℓ-1-2m)!)`,
/// times `2^{ℓ-1}`; equal to 1 for every odd `ℓ`.
pub fn appendix_sum(ell: u32) -> Result<IdentityResult, IdentityError> {
    let inner = claim_sum(ell)?;
    let computed = inner * Rational::from_bigint(factorial(u64::from(ell) - 1));
    Ok(IdentityResult::new(
        "appendix_sum",
        format!("ell={ell}"),
        computed,
        Rational::one(),
    ))
}

/// The same double sum without the `(ℓ-1)!` factor; equal to `1/(ℓ-1)!`.
pub fn claim_check(ell: u32) -> Result<IdentityResult, IdentityError> {
    let computed = claim_sum(ell)?;
    let expected = Rational::one() / Rational::from_bigint(factorial(u64::from(ell) - 1));
    Ok(IdentityResult::new(
        "claim",
        format!("ell={ell}"),
        computed,
        expected,
    ))
}

fn claim_sum(ell: u32) -> Result<Rational, IdentityError> {
    if ell.is_multiple_of(2) {
        return Err(IdentityError::EvenDegree(ell));
    }
    let half = (ell - 1) / 2;
    let ell_i = i64::from(ell);
    let mut acc = Rational::zero();
    for k in 0..=half {
        for m in 0..=half {
            let sign = if (k + m) % 2 == 0 { 1 } else { -1 };
            // Γ(ℓ-k-m-1/2)·π^{-1/2} = (2ℓ-2k-2m-3)!!/2^{ℓ-k-m-1}, exactly.
            let g = gamma_half(2 * (ell_i - i64::from(k) - i64::from(m)) - 1)
                .expect("argument >= 1/2 for k+m <= ell-1");
            debug_assert_eq!(g.sqrt_pi_power, 1);
            let mut den = Rational::from_bigint(
                factorial(u64::from(k)) * factorial(u64::from(m)),
            );
            den *= Rational::from_bigint(
                factorial(u64::from(ell - 1 - 2 * k)) * factorial(u64::from(ell - 1 - 2 * m)),
            );
            den *= Rational::from_bigint(BigInt::one() << (2 * (k + m)) as usize);
            acc += Rational::from_int(sign) * g.coeff / den;
        }
    }
    acc *= Rational::from_bigint(BigInt::one() << (ell - 1) as usize);
    Ok(acc)
}

/// `Σ_{m=0}^p (-1)^m (4p-2k-2m)! / (m! (2p-2m)! (2p-k-m)!)`, which equals
/// `2^{2p}` for `k = 0` and vanishes for `k = 1..p`.
pub fn hypergeom_inner_sum(p: u32, k: u32) -> Result<IdentityResult, IdentityError> {
    if k > p {
        return Err(IdentityError::KOutOfRange { p, k });
    }
    let mut acc = Rational::zero();
    for m in 0..=p {
        let sign = if m % 2 == 0 { 1 } else { -1 };
        let num = factorial(u64::from(4 * p - 2 * k - 2 * m));
        let den = factorial(u64::from(m))
            * factorial(u64::from(2 * p - 2 * m))
            * factorial(u64::from(2 * p - k - m));
        acc += Rational::from_int(sign) * Rational::from_big(num, den);
    }
    let expected = if k == 0 {
        Rational::from_bigint(BigInt::one() << (2 * p) as usize)
    } else {
        Rational::zero()
    };
    Ok(IdentityResult::new(
        "hypergeom_inner_sum",
        format!("p={p}, k={k}"),
        acc,
        expected,
    ))
}

/// Closed form of the same inner sum obtained through Chu-Vandermonde:
/// `(4p-2k)!/((2p)!(2p-k)!) · (k-p)_p (-2)^p / ((4p-2k-1)!!/(2p-2k-1)!!)`.
///
/// Kept public so the two evaluation routes can be compared term by term.
pub fn hypergeom_closed_form(p: u32, k: u32) -> Result<Rational, IdentityError> {
    if k > p {
        return Err(IdentityError::KOutOfRange { p, k });
    }
    let prefactor = Rational::from_big(
        factorial(u64::from(4 * p - 2 * k)),
        factorial(u64::from(2 * p)) * factorial(u64::from(2 * p - k)),
    );
    let poch = shifted_factorial(&Rational::from_int(i64::from(k) - i64::from(p)), p);
    let minus_two_pow = Rational::from_int(-2).pow(p as i32);
    let den = Rational::from_big(
        crate::exact_arith::double_factorial(i64::from(4 * p) - 2 * i64::from(k) - 1),
        crate::exact_arith::double_factorial(2 * i64::from(p) - 2 * i64::from(k) - 1),
    );
    Ok(prefactor * poch * minus_two_pow / den)
}

/// Chu-Vandermonde: the terminating series `₂F₁(-n, -b; c; 1)` equals
/// `(c+b)_n / (c)_n`. `c` must avoid `{0, -1, ..., -(n-1)}`.
pub fn chu_vandermonde(n: u32, b: &Rational, c: &Rational) -> Result<IdentityResult, IdentityError> {
    for j in 0..n {
        if *c == Rational::from_int(-i64::from(j)) {
            return Err(IdentityError::ForbiddenC(c.clone()));
        }
    }
    let minus_n = Rational::from_int(-i64::from(n));
    let minus_b = -b;
    let mut lhs = Rational::zero();
    for j in 0..=n {
        let num = shifted_factorial(&minus_n, j) * shifted_factorial(&minus_b, j);
        let den = shifted_factorial(c, j) * Rational::from_bigint(factorial(u64::from(j)));
        lhs += num / den;
    }
    let rhs = shifted_factorial(&(c + b), n) / shifted_factorial(c, n);
    Ok(IdentityResult::new(
        "chu_vandermonde",
        format!("n={n}, b={b}, c={c}"),
        lhs,
        rhs,
    ))
}
