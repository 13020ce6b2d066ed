//! Arbitrary-precision rational arithmetic, factorial-family functions, and
//! exact values of Γ at half-integer arguments.
//!
//! Everything downstream that is advertised as "exact" bottoms out here:
//! normalization constants, sphere moments, variance formulas and the
//! combinatorial identities all reduce to [`Rational`] arithmetic plus
//! tracked powers of √π that are required to cancel.

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactArithError {
    /// Γ has poles at 0 and the negative half-integers.
    #[error("gamma_half requires a positive argument, got {0}/2")]
    GammaPole(i64),
    /// Half-integer APIs only accept denominators 1 and 2.
    #[error("expected an integer or half-integer, got {0}")]
    NotHalfInteger(String),
}

/// Signed rational number in lowest terms with positive denominator.
///
/// A thin wrapper over `num_rational::BigRational` that pins down the
/// invariants the rest of the crate relies on: construction always reduces,
/// equality is canonical-form equality, and JSON serialization uses decimal
/// strings (`{"num": "...", "den": "..."}`) so values never overflow a
/// 64-bit reader.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds `num/den`, reduced. Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "rational denominator must be nonzero");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Rational(BigRational::from_integer(n))
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "rational denominator must be nonzero");
        Rational(BigRational::new(num, den))
    }

    /// Exact conversion from a finite `f64` (every finite float is rational).
    pub fn from_f64_exact(x: f64) -> Option<Self> {
        BigRational::from_f64(x).map(Rational)
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// True when the denominator is 1 or 2.
    pub fn is_half_integer(&self) -> bool {
        let den = self.0.denom();
        den == &BigInt::one() || den == &BigInt::from(2)
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "cannot invert zero");
        Rational(self.0.recip())
    }

    pub fn pow(&self, exp: i32) -> Self {
        if exp == 0 {
            return Rational::one();
        }
        assert!(!(self.is_zero() && exp < 0), "cannot invert zero");
        Rational(self.0.pow(exp))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            // Fall back for values whose numerator/denominator individually
            // overflow f64 range.
            let digits = 30usize;
            let scale = BigInt::from(10u32).pow(digits as u32);
            let scaled = (self.0.numer() * &scale) / self.0.denom();
            scaled.to_f64().unwrap_or(f64::NAN) / 1e30
        })
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_bigint(n)
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $assign_trait:ident, $assign_method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((self.0).$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((self.0).$method(&rhs.0))
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $assign_trait for Rational {
            fn $assign_method(&mut self, rhs: Rational) {
                (self.0).$assign_method(rhs.0);
            }
        }
        impl<'a> $assign_trait<&'a Rational> for Rational {
            fn $assign_method(&mut self, rhs: &'a Rational) {
                (self.0).$assign_method(&rhs.0);
            }
        }
    };
}

impl_binop!(Add, add, AddAssign, add_assign);
impl_binop!(Sub, sub, SubAssign, sub_assign);
impl_binop!(Mul, mul, MulAssign, mul_assign);
impl_binop!(Div, div, DivAssign, div_assign);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::one(), |acc, x| acc * x)
    }
}

#[derive(Serialize, Deserialize)]
struct RationalJson {
    num: String,
    den: String,
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RationalJson {
            num: self.0.numer().to_string(),
            den: self.0.denom().to_string(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        // Accept both the canonical {"num", "den"} object and a bare JSON
        // integer for hand-written configs.
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Object { num: serde_json::Value, den: serde_json::Value },
            Int(i64),
        }
        fn parse_part<E: serde::de::Error>(v: &serde_json::Value) -> Result<BigInt, E> {
            match v {
                serde_json::Value::String(s) => {
                    BigInt::from_str(s).map_err(|e| E::custom(format!("bad integer {s:?}: {e}")))
                }
                serde_json::Value::Number(n) => n
                    .as_i64()
                    .map(BigInt::from)
                    .ok_or_else(|| E::custom(format!("integer out of range: {n}"))),
                other => Err(E::custom(format!("expected integer or string, got {other}"))),
            }
        }
        match Repr::deserialize(deserializer)? {
            Repr::Int(n) => Ok(Rational::from_int(n)),
            Repr::Object { num, den } => {
                let num = parse_part::<D::Error>(&num)?;
                let den = parse_part::<D::Error>(&den)?;
                if den.is_zero() {
                    return Err(D::Error::custom("rational denominator must be nonzero"));
                }
                Ok(Rational::from_big(num, den))
            }
        }
    }
}

/// n! as a big integer.
pub fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    acc
}

/// Double factorial `n!! = n(n-2)(n-4)...(1 or 2)`.
///
/// Follows the empty-product convention: `0!! = (-1)!! = 1`. Arguments
/// below -1 are programming errors and panic.
pub fn double_factorial(n: i64) -> BigInt {
    assert!(n >= -1, "double_factorial undefined for n = {n}");
    let mut acc = BigInt::one();
    let mut k = n;
    while k >= 2 {
        acc *= k;
        k -= 2;
    }
    acc
}

/// Exact value of Γ(t) for t a positive integer or half-integer, stored as
/// a rational coefficient times `(√π)^sqrt_pi_power`.
///
/// `sqrt_pi_power` is 1 exactly when `t` is a non-integer half-integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfGamma {
    pub coeff: Rational,
    pub sqrt_pi_power: u8,
}

impl HalfGamma {
    pub fn to_f64(&self) -> f64 {
        let pi_factor = if self.sqrt_pi_power == 1 {
            std::f64::consts::PI.sqrt()
        } else {
            1.0
        };
        self.coeff.to_f64() * pi_factor
    }
}

/// Γ(two_t / 2), exactly.
///
/// For even `two_t` this is the ordinary factorial `(two_t/2 - 1)!`. For
/// odd `two_t` the value is `(two_t - 2)!! / 2^{(two_t-1)/2} · √π`, e.g.
/// `Γ(1/2) = √π` and `Γ(5/2) = 3/4·√π`.
pub fn gamma_half(two_t: i64) -> Result<HalfGamma, ExactArithError> {
    if two_t <= 0 {
        return Err(ExactArithError::GammaPole(two_t));
    }
    if two_t % 2 == 0 {
        let t = (two_t / 2) as u64;
        Ok(HalfGamma {
            coeff: Rational::from_bigint(factorial(t - 1)),
            sqrt_pi_power: 0,
        })
    } else {
        let num = double_factorial(two_t - 2);
        let den = BigInt::one() << ((two_t - 1) / 2) as usize;
        Ok(HalfGamma {
            coeff: Rational::from_big(num, den),
            sqrt_pi_power: 1,
        })
    }
}

/// Shifted factorial (Pochhammer symbol) `(a)_k = a(a+1)...(a+k-1)`,
/// with `(a)_0 = 1`.
pub fn shifted_factorial(a: &Rational, k: u32) -> Rational {
    let mut acc = Rational::one();
    let mut term = a.clone();
    for _ in 0..k {
        acc *= &term;
        term += &Rational::one();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rational_reduces_on_construction() {
        let r = Rational::new(6, -4);
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(2));
        assert_eq!(r, Rational::new(-3, 2));
    }

    #[test]
    fn rational_equality_is_canonical() {
        assert_eq!(Rational::new(2, 4), Rational::new(1, 2));
        assert_ne!(Rational::new(1, 2), Rational::new(1, 3));
    }

    #[test]
    fn rational_json_roundtrip_uses_decimal_strings() {
        let r = Rational::new(-7, 3);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, r#"{"num":"-7","den":"3"}"#);
        let back: Rational = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        // Bare integers are accepted on input.
        let five: Rational = serde_json::from_str("5").unwrap();
        assert_eq!(five, Rational::from_int(5));
    }

    #[test]
    fn rational_json_rejects_zero_denominator() {
        let res: Result<Rational, _> = serde_json::from_str(r#"{"num":"1","den":"0"}"#);
        assert!(res.is_err());
    }

    #[test]
    fn double_factorial_small_cases() {
        assert_eq!(double_factorial(-1), BigInt::one());
        assert_eq!(double_factorial(0), BigInt::one());
        assert_eq!(double_factorial(5), BigInt::from(15));
        // 8!! = 8*6*4*2
        assert_eq!(double_factorial(8), BigInt::from(384));
    }

    #[test]
    fn gamma_half_small_cases() {
        // Γ(1/2) = √π
        let g = gamma_half(1).unwrap();
        assert_eq!(g.coeff, Rational::one());
        assert_eq!(g.sqrt_pi_power, 1);
        // Γ(3) = 2
        let g = gamma_half(6).unwrap();
        assert_eq!(g.coeff, Rational::from_int(2));
        assert_eq!(g.sqrt_pi_power, 0);
        // Γ(5/2) = (3/2)(1/2)Γ(1/2) = 3/4 √π
        let g = gamma_half(5).unwrap();
        assert_eq!(g.coeff, Rational::new(3, 4));
        assert_eq!(g.sqrt_pi_power, 1);
    }

    #[test]
    fn gamma_half_rejects_poles() {
        assert!(matches!(gamma_half(0), Err(ExactArithError::GammaPole(0))));
        assert!(matches!(gamma_half(-3), Err(ExactArithError::GammaPole(-3))));
    }

    #[test]
    fn shifted_factorial_small_cases() {
        // A zero factor kills the product.
        assert_eq!(
            shifted_factorial(&Rational::from_int(-2), 3),
            Rational::zero()
        );
        // (1)_4 = 4!
        assert_eq!(shifted_factorial(&Rational::one(), 4), Rational::from_int(24));
        // (1/2)_2 = (1/2)(3/2) = 3/4
        assert_eq!(
            shifted_factorial(&Rational::new(1, 2), 2),
            Rational::new(3, 4)
        );
        assert_eq!(shifted_factorial(&Rational::new(7, 3), 0), Rational::one());
    }

    proptest! {
        // Γ(x+1) = xΓ(x): ratio of consecutive coefficients is two_t/2,
        // with matching √π power.
        #[test]
        fn gamma_recurrence(two_t in 1i64..200) {
            let lo = gamma_half(two_t).unwrap();
            let hi = gamma_half(two_t + 2).unwrap();
            prop_assert_eq!(hi.sqrt_pi_power, lo.sqrt_pi_power);
            let ratio = &hi.coeff / &lo.coeff;
            prop_assert_eq!(ratio, Rational::new(two_t, 2));
        }

        // (2k)!! (2k-1)!! = (2k)!
        #[test]
        fn double_factorial_splits_factorial(k in 1i64..60) {
            let lhs = double_factorial(2 * k) * double_factorial(2 * k - 1);
            prop_assert_eq!(lhs, factorial((2 * k) as u64));
        }

        // (a)_{k+1} = (a)_k (a+k)
        #[test]
        fn shifted_factorial_recurrence(num in -20i64..20, den in 1i64..4, k in 0u32..12) {
            let a = Rational::new(num, 2 * den); // integers and half/quarter points
            let lhs = shifted_factorial(&a, k + 1);
            let rhs = shifted_factorial(&a, k) * (&a + &Rational::from_int(i64::from(k)));
            prop_assert_eq!(lhs, rhs);
        }

        // Arithmetic results are always in lowest terms with positive
        // denominator.
        #[test]
        fn arithmetic_stays_canonical(a in -50i64..50, b in 1i64..30, c in -50i64..50, d in 1i64..30) {
            let x = Rational::new(a, b);
            let y = Rational::new(c, d);
            for r in [&x + &y, &x - &y, &x * &y] {
                prop_assert!(r.denom() > &BigInt::zero());
                let g = num_integer::Integer::gcd(r.numer(), r.denom());
                prop_assert_eq!(g, BigInt::one());
            }
        }
    }
}
