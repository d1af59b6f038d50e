//! Exact rational scalars, certified square-root enclosures and the
//! `NormValue` representation shared by every norm evaluator.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::FrameError;

/// Exact scalar. Every coefficient and bound in the crate is one of these.
pub type Scalar = BigRational;

pub fn int(v: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Scalar {
    Scalar::new(BigInt::from(num), BigInt::from(den))
}

/// `2^e` for any integer exponent.
pub fn pow2(e: i64) -> Scalar {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Scalar::from_integer(p)
    } else {
        Scalar::new(BigInt::one(), p)
    }
}

pub fn to_f64(v: &Scalar) -> f64 {
    v.to_f64().unwrap_or_else(|| {
        if v.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact rational value of a finite float.
pub fn from_f64(v: f64) -> Scalar {
    Scalar::from_f64(v).expect("finite float")
}

pub fn format_scalar(v: &Scalar) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// Parses `p`, `p/q`, or a plain decimal such as `0.125` or `-3e-2`.
pub fn parse_scalar(s: &str) -> Result<Scalar, FrameError> {
    let s = s.trim();
    let bad = || FrameError::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Scalar::new(n, d));
    }
    if let Ok(n) = BigInt::from_str(s) {
        return Ok(Scalar::from_integer(n));
    }
    parse_decimal(s).ok_or_else(bad)
}

fn parse_decimal(s: &str) -> Option<Scalar> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], s[p + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{whole}{frac}0").parse::<BigInt>().ok()? / 10;
    let shift = exp - frac.len() as i64;
    let ten = BigInt::from(10u32);
    let mut v = if shift >= 0 {
        Scalar::from_integer(digits * num_traits::pow(ten, shift as usize))
    } else {
        Scalar::new(digits, num_traits::pow(ten, (-shift) as usize))
    };
    if neg {
        v = -v;
    }
    Some(v)
}

/// Exact square root when both numerator and denominator are perfect squares.
pub fn exact_sqrt(v: &Scalar) -> Option<Scalar> {
    if v.is_negative() {
        return None;
    }
    let n = v.numer().sqrt();
    let d = v.denom().sqrt();
    if &(&n * &n) == v.numer() && &(&d * &d) == v.denom() {
        Some(Scalar::new(n, d))
    } else {
        None
    }
}

/// Closed interval `[lower, upper]` of exact rationals known to contain a real.
#[derive(Clone, Debug, PartialEq)]
pub struct Certified {
    pub lower: Scalar,
    pub upper: Scalar,
}

impl Certified {
    pub fn exact(v: Scalar) -> Self {
        Certified {
            lower: v.clone(),
            upper: v,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    pub fn width(&self) -> Scalar {
        &self.upper - &self.lower
    }

    pub fn midpoint(&self) -> f64 {
        to_f64(&((&self.lower + &self.upper) / int(2)))
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let c = c.abs();
        Certified {
            lower: &self.lower * &c,
            upper: &self.upper * &c,
        }
    }
}

/// Certified enclosure of `sqrt(v)` for `v >= 0`.
///
/// Exact when `v` is a rational square; otherwise the endpoints are adjacent
/// (or near-adjacent) doubles, verified by squaring in exact arithmetic.
pub fn sqrt_enclosure(v: &Scalar) -> Certified {
    assert!(!v.is_negative(), "square root of a negative rational");
    if let Some(r) = exact_sqrt(v) {
        return Certified::exact(r);
    }
    let guess = to_f64(v).sqrt();
    let mut lo = guess;
    while lo > 0.0 && &(from_f64(lo) * from_f64(lo)) > v {
        lo = lo.next_down();
    }
    let lo = lo.max(0.0);
    let mut hi = guess;
    while &(from_f64(hi) * from_f64(hi)) < v {
        hi = hi.next_up();
    }
    Certified {
        lower: from_f64(lo),
        upper: from_f64(hi),
    }
}

/// A nonnegative norm value.
///
/// ℓ1 and ℓ∞ norms of rational vectors are rational and stored directly;
/// ℓ2 norms are stored as their exact square so that all comparisons remain
/// exact. The square root only appears when a float or an enclosure is
/// requested.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormValue {
    squared: bool,
    value: Scalar,
}

impl NormValue {
    pub fn plain(value: Scalar) -> Self {
        debug_assert!(!value.is_negative());
        NormValue {
            squared: false,
            value,
        }
    }

    pub fn from_squared(value: Scalar) -> Self {
        debug_assert!(!value.is_negative());
        NormValue {
            squared: true,
            value,
        }
    }

    pub fn zero(squared: bool) -> Self {
        NormValue {
            squared,
            value: Scalar::zero(),
        }
    }

    pub fn is_squared(&self) -> bool {
        self.squared
    }

    /// The stored exact quantity: the norm itself or its square.
    pub fn stored(&self) -> &Scalar {
        &self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    /// Exact square of the norm.
    pub fn squared_value(&self) -> Scalar {
        if self.squared {
            self.value.clone()
        } else {
            &self.value * &self.value
        }
    }

    /// The norm as an exact rational, when it is one.
    pub fn exact(&self) -> Option<Scalar> {
        if self.squared {
            exact_sqrt(&self.value)
        } else {
            Some(self.value.clone())
        }
    }

    /// Norm of `c * v` given this is the norm of `v`.
    pub fn scale(&self, c: &Scalar) -> Self {
        let c = c.abs();
        if self.squared {
            NormValue::from_squared(&self.value * &c * &c)
        } else {
            NormValue::plain(&self.value * &c)
        }
    }

    pub fn enclosure(&self) -> Certified {
        if self.squared {
            sqrt_enclosure(&self.value)
        } else {
            Certified::exact(self.value.clone())
        }
    }

    /// A rational upper bound for the norm (exact when the norm is rational).
    pub fn upper_rational(&self) -> Scalar {
        self.enclosure().upper
    }

    pub fn to_f64(&self) -> f64 {
        if self.squared {
            to_f64(&self.value).sqrt()
        } else {
            to_f64(&self.value)
        }
    }

    /// Exact comparison of `self` against the rational `r >= 0`.
    pub fn cmp_scalar(&self, r: &Scalar) -> Ordering {
        if r.is_negative() {
            return Ordering::Greater;
        }
        if self.squared {
            self.value.cmp(&(r * r))
        } else {
            self.value.cmp(r)
        }
    }

    /// Exact comparison between two norm values of either representation.
    pub fn cmp_norm(&self, other: &NormValue) -> Ordering {
        if self.squared == other.squared {
            self.value.cmp(&other.value)
        } else {
            self.squared_value().cmp(&other.squared_value())
        }
    }

    pub fn max_of(self, other: NormValue) -> NormValue {
        if other.cmp_norm(&self) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    /// `self / other` as a norm value, `None` when `other` is zero.
    pub fn ratio(&self, other: &NormValue) -> Option<NormValue> {
        if other.is_zero() {
            return None;
        }
        if self.squared == other.squared {
            let q = &self.value / &other.value;
            Some(NormValue {
                squared: self.squared,
                value: q,
            })
        } else {
            Some(NormValue::from_squared(
                self.squared_value() / other.squared_value(),
            ))
        }
    }

    /// `self * other`.
    pub fn product(&self, other: &NormValue) -> NormValue {
        if self.squared == other.squared {
            NormValue {
                squared: self.squared,
                value: &self.value * &other.value,
            }
        } else {
            NormValue::from_squared(self.squared_value() * other.squared_value())
        }
    }
}

impl PartialOrd for NormValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_norm(other))
    }
}

impl fmt::Display for NormValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact() {
            Some(v) => write!(f, "{}", format_scalar(&v)),
            None => write!(f, "sqrt({})", format_scalar(&self.value)),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct NormValueRepr {
    exact: String,
    squared: bool,
    approx: f64,
}

impl Serialize for NormValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        NormValueRepr {
            exact: format_scalar(&self.value),
            squared: self.squared,
            approx: self.to_f64(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for NormValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = NormValueRepr::deserialize(d)?;
        let value = parse_scalar(&r.exact).map_err(serde::de::Error::custom)?;
        Ok(NormValue {
            squared: r.squared,
            value,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct CertifiedRepr {
    lower: String,
    upper: String,
    approx: f64,
}

impl Serialize for Certified {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CertifiedRepr {
            lower: format_scalar(&self.lower),
            upper: format_scalar(&self.upper),
            approx: self.midpoint(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Certified {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = CertifiedRepr::deserialize(d)?;
        Ok(Certified {
            lower: parse_scalar(&r.lower).map_err(serde::de::Error::custom)?,
            upper: parse_scalar(&r.upper).map_err(serde::de::Error::custom)?,
        })
    }
}

/// `#[serde(with = "scalar_serde")]` for exact scalar fields, written as `"p/q"`.
pub mod scalar_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Scalar, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_scalar(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Scalar, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        scalar_from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// Optional variant of [`scalar_serde`].
pub mod opt_scalar_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<Scalar>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.serialize_some(&format_scalar(v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Scalar>, D::Error> {
        let v = Option::<serde_json::Value>::deserialize(d)?;
        v.map(|v| scalar_from_json(&v))
            .transpose()
            .map_err(serde::de::Error::custom)
    }
}

/// Accepts JSON integers, decimal numbers (taken at their written value) and
/// strings of the form `p/q`.
pub fn scalar_from_json(v: &serde_json::Value) -> Result<Scalar, FrameError> {
    match v {
        serde_json::Value::String(s) => parse_scalar(s),
        serde_json::Value::Number(n) => parse_scalar(&n.to_string()),
        other => Err(FrameError::Parse(format!("expected a number, got {other}"))),
    }
}

/// JSON form of an integer: a number when it fits in i64, otherwise a string.
pub fn bigint_to_json(v: &BigInt) -> serde_json::Value {
    match v.to_i64() {
        Some(i) => serde_json::Value::from(i),
        None => serde_json::Value::String(v.to_string()),
    }
}

pub fn bigint_from_json(v: &serde_json::Value) -> Result<BigInt, FrameError> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| FrameError::Parse(format!("expected an integer, got {n}"))),
        serde_json::Value::String(s) => BigInt::from_str(s.trim())
            .map_err(|_| FrameError::Parse(format!("expected an integer, got {s:?}"))),
        other => Err(FrameError::Parse(format!("expected an integer, got {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_scalar("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse_scalar("-7").unwrap(), int(-7));
        assert_eq!(parse_scalar("0.125").unwrap(), ratio(1, 8));
        assert_eq!(parse_scalar("-2.5e-1").unwrap(), ratio(-1, 4));
        assert_eq!(parse_scalar("1e3").unwrap(), int(1000));
        assert!(parse_scalar("1/0").is_err());
        assert!(parse_scalar("abc").is_err());
        assert!(parse_scalar(".").is_err());
    }

    #[test]
    fn powers_of_two() {
        assert_eq!(pow2(3), int(8));
        assert_eq!(pow2(-2), ratio(1, 4));
        assert_eq!(pow2(0), int(1));
    }

    #[test]
    fn sqrt_is_exact_on_squares() {
        assert_eq!(sqrt_enclosure(&ratio(9, 4)), Certified::exact(ratio(3, 2)));
        assert!(exact_sqrt(&int(2)).is_none());
    }

    #[test]
    fn sqrt_enclosure_is_tight_and_sound() {
        for v in [int(2), ratio(1, 3), int(1_000_003), ratio(7, 1_000_000)] {
            let e = sqrt_enclosure(&v);
            assert!(&e.lower * &e.lower <= v);
            assert!(&e.upper * &e.upper >= v);
            let rel = to_f64(&e.width()) / to_f64(&e.upper);
            assert!(rel < 1e-15, "relative width {rel}");
        }
        let e = sqrt_enclosure(&int(2));
        assert!(to_f64(&e.width()) <= 1e-12);
    }

    #[test]
    fn mixed_comparisons_use_squares() {
        let a = NormValue::from_squared(int(2));
        let b = NormValue::plain(int(1));
        assert_eq!(a.cmp_norm(&b), Ordering::Greater);
        assert_eq!(a.cmp_scalar(&ratio(3, 2)), Ordering::Less);
        assert_eq!(a.scale(&int(-2)).squared_value(), int(8));
        assert_eq!(a.ratio(&b).unwrap().squared_value(), int(2));
        assert_eq!(NormValue::from_squared(int(25)).exact(), Some(int(5)));
    }

    #[test]
    fn norm_value_json_round_trip() {
        let v = NormValue::from_squared(ratio(5, 3));
        let s = serde_json::to_string(&v).unwrap();
        let back: NormValue = serde_json::from_str(&s).unwrap();
        assert_eq!(v, back);
    }
}
