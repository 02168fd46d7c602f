//! Mode-tagged real numbers.
//!
//! Every endpoint, slope and hole boundary is a [`Scalar`]: either an exact
//! arbitrary-precision rational or a binary float carrying the tolerance used
//! for all boundary comparisons. The two never mix; the checked operations
//! return [`Error::ModeMismatch`] and the operator impls panic, which callers
//! avoid by validating inputs at construction (maps and holes do).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const DEFAULT_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    Exact,
    Float { eps: f64 },
}

impl Mode {
    pub fn float() -> Mode {
        Mode::Float { eps: DEFAULT_EPS }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Mode::Exact)
    }

    /// Combine two modes, failing when exact and float meet.
    pub fn join(self, other: Mode) -> Result<Mode> {
        match (self, other) {
            (Mode::Exact, Mode::Exact) => Ok(Mode::Exact),
            (Mode::Float { eps: a }, Mode::Float { eps: b }) => Ok(Mode::Float { eps: a.max(b) }),
            _ => Err(Error::ModeMismatch(format!("{self:?} vs {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(BigRational),
    Float { value: f64, eps: f64 },
}

impl Scalar {
    pub fn ratio(num: i64, den: i64) -> Scalar {
        assert!(den != 0, "zero denominator");
        Scalar::Exact(BigRational::new(num.into(), den.into()))
    }

    pub fn int(n: i64) -> Scalar {
        Scalar::ratio(n, 1)
    }

    pub fn float(value: f64, eps: f64) -> Scalar {
        Scalar::Float { value, eps }
    }

    pub fn from_rational(q: BigRational) -> Scalar {
        Scalar::Exact(q)
    }

    /// An integer in the given mode.
    pub fn int_in(mode: Mode, n: i64) -> Scalar {
        match mode {
            Mode::Exact => Scalar::int(n),
            Mode::Float { eps } => Scalar::float(n as f64, eps),
        }
    }

    pub fn ratio_in(mode: Mode, num: i64, den: i64) -> Scalar {
        match mode {
            Mode::Exact => Scalar::ratio(num, den),
            Mode::Float { eps } => Scalar::float(num as f64 / den as f64, eps),
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Float { eps, .. } => Mode::Float { eps: *eps },
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(q) => Some(q),
            Scalar::Float { .. } => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => rational_to_f64(q),
            Scalar::Float { value, .. } => *value,
        }
    }

    /// Re-tag an exact value as a float with tolerance `eps`.
    pub fn to_float(&self, eps: f64) -> Scalar {
        Scalar::float(self.to_f64(), eps)
    }

    fn zip<F, G>(&self, other: &Scalar, exact: F, float: G) -> Result<Scalar>
    where
        F: FnOnce(&BigRational, &BigRational) -> BigRational,
        G: FnOnce(f64, f64) -> f64,
    {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(exact(a, b))),
            (Scalar::Float { value: a, eps: e1 }, Scalar::Float { value: b, eps: e2 }) => {
                Ok(Scalar::Float { value: float(*a, *b), eps: e1.max(*e2) })
            }
            _ => Err(Error::ModeMismatch(format!("{self} and {other}"))),
        }
    }

    pub fn try_add(&self, other: &Scalar) -> Result<Scalar> {
        self.zip(other, small::add, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Scalar) -> Result<Scalar> {
        self.zip(other, small::sub, |a, b| a - b)
    }

    pub fn try_mul(&self, other: &Scalar) -> Result<Scalar> {
        self.zip(other, small::mul, |a, b| a * b)
    }

    pub fn try_div(&self, other: &Scalar) -> Result<Scalar> {
        if other.is_exact_zero() {
            return Err(Error::InvalidParameter("division by zero".into()));
        }
        self.zip(other, small::div, |a, b| a / b)
    }

    /// Mode-aware comparison: floats within the larger tolerance compare equal.
    pub fn compare(&self, other: &Scalar) -> Result<Ordering> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(small::cmp(a, b)),
            (Scalar::Float { value: a, eps: e1 }, Scalar::Float { value: b, eps: e2 }) => {
                let eps = e1.max(*e2);
                if (a - b).abs() <= eps {
                    Ok(Ordering::Equal)
                } else if a < b {
                    Ok(Ordering::Less)
                } else {
                    Ok(Ordering::Greater)
                }
            }
            _ => Err(Error::ModeMismatch(format!("{self} and {other}"))),
        }
    }

    /// [`Scalar::compare`] for operands already known to share a mode.
    pub fn cmp_same(&self, other: &Scalar) -> Ordering {
        self.compare(other).expect("scalar mode mismatch")
    }

    pub fn lt(&self, other: &Scalar) -> bool {
        self.cmp_same(other) == Ordering::Less
    }

    pub fn le(&self, other: &Scalar) -> bool {
        self.cmp_same(other) != Ordering::Greater
    }

    pub fn gt(&self, other: &Scalar) -> bool {
        self.cmp_same(other) == Ordering::Greater
    }

    pub fn ge(&self, other: &Scalar) -> bool {
        self.cmp_same(other) != Ordering::Less
    }

    pub fn approx_eq(&self, other: &Scalar) -> bool {
        self.cmp_same(other) == Ordering::Equal
    }

    /// Zero within tolerance (exactly zero in exact mode).
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_zero(),
            Scalar::Float { value, eps } => value.abs() <= *eps,
        }
    }

    pub(crate) fn is_exact_zero(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_zero(),
            Scalar::Float { value, .. } => *value == 0.0,
        }
    }

    /// Sign with the float tolerance band mapped to zero.
    pub fn signum(&self) -> i32 {
        match self {
            Scalar::Exact(q) => {
                if q.is_zero() {
                    0
                } else if q.is_positive() {
                    1
                } else {
                    -1
                }
            }
            Scalar::Float { value, eps } => {
                if value.abs() <= *eps {
                    0
                } else if *value > 0.0 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(q.abs()),
            Scalar::Float { value, eps } => Scalar::Float { value: value.abs(), eps: *eps },
        }
    }

    pub fn min_of(&self, other: &Scalar) -> Scalar {
        if other.lt(self) {
            other.clone()
        } else {
            self.clone()
        }
    }

    pub fn max_of(&self, other: &Scalar) -> Scalar {
        if other.gt(self) {
            other.clone()
        } else {
            self.clone()
        }
    }

    /// Natural log; `-inf` at zero. Exact values never round to zero first.
    pub fn ln(&self) -> f64 {
        match self {
            Scalar::Exact(q) if q.is_zero() => f64::NEG_INFINITY,
            Scalar::Exact(q) => ln_rational(q),
            Scalar::Float { value, .. } => value.ln(),
        }
    }

    /// Parse `num/den`, an integer, or a decimal string. Rationals and
    /// integers are exact; decimals become floats with tolerance `eps`.
    pub fn parse(s: &str, eps: f64) -> Result<Scalar> {
        let s = s.trim();
        if let Some(q) = parse_rational(s) {
            return Ok(Scalar::Exact(q));
        }
        let value = f64::from_str(s).map_err(|_| Error::Parse(format!("not a number: {s:?}")))?;
        if !value.is_finite() {
            return Err(Error::Parse(format!("not a finite number: {s:?}")));
        }
        Ok(Scalar::float(value, eps))
    }

    /// Whether `s` would parse as an exact value.
    pub fn is_exact_literal(s: &str) -> bool {
        parse_rational(s.trim()).is_some()
    }
}

/// Rational arithmetic on word-sized numerators and denominators, falling
/// back to big integers when an operand or result does not fit.
mod small {
    use std::cmp::Ordering;

    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_rational::BigRational;
    use num_traits::ToPrimitive;

    fn parts(q: &BigRational) -> Option<(i128, i128)> {
        Some((q.numer().to_i64()? as i128, q.denom().to_i64()? as i128))
    }

    fn reduced(num: i128, den: i128) -> BigRational {
        let g = (num.unsigned_abs().gcd(&den.unsigned_abs()) as i128).max(1);
        let (num, den) = if den < 0 { (-num / g, -den / g) } else { (num / g, den / g) };
        BigRational::new_raw(BigInt::from(num), BigInt::from(den))
    }

    pub(super) fn add(a: &BigRational, b: &BigRational) -> BigRational {
        match (parts(a), parts(b)) {
            (Some((an, ad)), Some((bn, bd))) => reduced(an * bd + bn * ad, ad * bd),
            _ => a + b,
        }
    }

    pub(super) fn sub(a: &BigRational, b: &BigRational) -> BigRational {
        match (parts(a), parts(b)) {
            (Some((an, ad)), Some((bn, bd))) => reduced(an * bd - bn * ad, ad * bd),
            _ => a - b,
        }
    }

    pub(super) fn mul(a: &BigRational, b: &BigRational) -> BigRational {
        match (parts(a), parts(b)) {
            (Some((an, ad)), Some((bn, bd))) => reduced(an * bn, ad * bd),
            _ => a * b,
        }
    }

    pub(super) fn div(a: &BigRational, b: &BigRational) -> BigRational {
        match (parts(a), parts(b)) {
            (Some((an, ad)), Some((bn, bd))) => reduced(an * bd, ad * bn),
            _ => a / b,
        }
    }

    pub(super) fn cmp(a: &BigRational, b: &BigRational) -> Ordering {
        match (parts(a), parts(b)) {
            (Some((an, ad)), Some((bn, bd))) => (an * bd).cmp(&(bn * ad)),
            _ => a.cmp(b),
        }
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).ok()?;
    let den = BigInt::from_str(den).ok()?;
    if den.is_zero() {
        return None;
    }
    Some(BigRational::new(num, den))
}

/// Parse a decimal string (`0.70`, `-1.25e-3` not supported) into an exact
/// rational. Also accepts `num/den`.
pub fn parse_exact_decimal(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some(q) = parse_rational(s) {
        return Ok(q);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').ok_or_else(|| Error::Parse(format!("not a decimal: {s:?}")))?;
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(Error::Parse(format!("not a decimal: {s:?}")));
    }
    let digits = format!("{int}{frac}");
    let num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits })
        .map_err(|_| Error::Parse(format!("not a decimal: {s:?}")))?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let q = BigRational::new(num, den);
    Ok(if neg { -q } else { q })
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let sign = if q.is_negative() { -1.0 } else { 1.0 };
    sign * ln_rational(&q.abs()).exp()
}

/// Natural log of a positive big integer, safe for values beyond f64 range.
pub fn ln_bigint(x: &BigInt) -> f64 {
    assert!(x.is_positive(), "ln of non-positive integer");
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().expect("finite").ln()
    } else {
        let shift = bits - 64;
        let top: BigInt = x >> shift;
        top.to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Natural log of a positive rational.
pub fn ln_rational(q: &BigRational) -> f64 {
    assert!(q.is_positive(), "ln of non-positive rational");
    if let Some(v) = q.to_f64() {
        if v.is_normal() {
            return v.ln();
        }
    }
    ln_bigint(q.numer()) - ln_bigint(q.denom())
}

/// Round `q` to the nearest multiple of `2^-bits` (ties toward +inf).
pub fn round_dyadic(q: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::one() << bits;
    let scaled = q * BigRational::from_integer(scale.clone());
    let two = BigRational::from_integer(2.into());
    let half = BigRational::one() / two;
    let n = (scaled + half).floor().to_integer();
    BigRational::new(n, scale)
}

/// `num/den` for non-integers, plain integer otherwise.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => f.write_str(&format_rational(q)),
            Scalar::Float { value, .. } => write!(f, "{value:?}"),
        }
    }
}

/// Strict equality: exact rationals by value, floats bitwise with equal
/// tolerance. Use [`Scalar::approx_eq`] for tolerance-aware comparison.
impl PartialEq for Scalar {
    fn eq(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            (Scalar::Float { value: a, eps: e1 }, Scalar::Float { value: b, eps: e2 }) => a == b && e1 == e2,
            _ => false,
        }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Scalar) -> Option<Ordering> {
        self.compare(other).ok()
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.$checked(rhs).expect("scalar arithmetic")
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$checked(&rhs).expect("scalar arithmetic")
            }
        }
    };
}

scalar_binop!(Add, add, try_add);
scalar_binop!(Sub, sub, try_sub);
scalar_binop!(Mul, mul, try_mul);
scalar_binop!(Div, div, try_div);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(-q),
            Scalar::Float { value, eps } => Scalar::Float { value: -value, eps: *eps },
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Serialize a rational as its `p/q` string.
pub(crate) fn serialize_rational<S: Serializer>(
    q: &BigRational,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    serializer.serialize_str(&format_rational(q))
}

pub(crate) fn serialize_rationals<S: Serializer>(
    qs: &[BigRational],
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    serializer.collect_seq(qs.iter().map(format_rational))
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Scalar, D::Error> {
        let s = String::deserialize(deserializer)?;
        Scalar::parse(&s, DEFAULT_EPS).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn edge() -> impl Strategy<Value = i64> {
        prop_oneof![-1000i64..1000, Just(i64::MAX), Just(i64::MIN), Just(i64::MIN + 1), any::<i64>()]
    }

    fn rational() -> impl Strategy<Value = BigRational> {
        (edge(), edge().prop_filter("nonzero", |d| *d != 0)).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
    }

    proptest! {
        #[test]
        fn word_sized_arithmetic_matches_big(a in rational(), b in rational()) {
            prop_assert_eq!(small::add(&a, &b), &a + &b);
            prop_assert_eq!(small::sub(&a, &b), &a - &b);
            prop_assert_eq!(small::mul(&a, &b), &a * &b);
            prop_assert_eq!(small::cmp(&a, &b), a.cmp(&b));
            if !b.is_zero() {
                prop_assert_eq!(small::div(&a, &b), &a / &b);
            }
        }
    }

    #[test]
    fn parse_forms() {
        assert_eq!(Scalar::parse("3/4", DEFAULT_EPS).unwrap(), Scalar::ratio(3, 4));
        assert_eq!(Scalar::parse("6/8", DEFAULT_EPS).unwrap(), Scalar::ratio(3, 4));
        assert_eq!(Scalar::parse(" 2 ", DEFAULT_EPS).unwrap(), Scalar::int(2));
        assert!(matches!(Scalar::parse("0.75", DEFAULT_EPS).unwrap(), Scalar::Float { .. }));
        assert!(Scalar::parse("1/0", DEFAULT_EPS).is_err());
        assert!(Scalar::parse("abc", DEFAULT_EPS).is_err());
    }

    #[test]
    fn exact_decimal() {
        assert_eq!(parse_exact_decimal("0.70").unwrap(), BigRational::new(7.into(), 10.into()));
        assert_eq!(parse_exact_decimal("-1.5").unwrap(), BigRational::new((-3).into(), 2.into()));
        assert_eq!(parse_exact_decimal("5/6").unwrap(), BigRational::new(5.into(), 6.into()));
        assert!(parse_exact_decimal("1.2.3").is_err());
    }

    #[test]
    fn mixing_modes_is_an_error() {
        let a = Scalar::ratio(1, 2);
        let b = Scalar::float(0.5, 1e-12);
        assert!(matches!(a.try_add(&b), Err(Error::ModeMismatch(_))));
        assert!(a.compare(&b).is_err());
        assert_eq!(a.partial_cmp(&b), None);
    }

    #[test]
    fn float_tolerance() {
        let a = Scalar::float(0.5, 1e-12);
        let b = Scalar::float(0.5 + 1e-13, 1e-12);
        assert!(a.approx_eq(&b));
        assert!(a != b);
    }

    #[test]
    fn ln_of_huge_values() {
        let big = BigInt::one() << 5000u32;
        let expect = 5000.0 * std::f64::consts::LN_2;
        assert!((ln_bigint(&big) - expect).abs() < 1e-9);
        let q = BigRational::new(BigInt::one(), big);
        assert!((ln_rational(&q) + expect).abs() < 1e-9);
    }

    #[test]
    fn dyadic_rounding() {
        let q = BigRational::new(7.into(), 10.into());
        let r = round_dyadic(&q, 4);
        assert_eq!(r, BigRational::new(11.into(), 16.into()));
    }
}
