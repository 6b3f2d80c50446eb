//! Scalars at the file boundary: rationals travel as `"p/q"` strings, floats as
//! shortest round-trip JSON numbers.

use std::fmt;
use std::str::FromStr;

use conformal_core::{Rational, Scalar};
use num_bigint::BigInt;
use num_traits::{Pow, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

/// A coefficient as written in a spec file: `"3/8"`, `"-0.125"`, `"1e-3"`,
/// or a bare JSON number. The text is kept verbatim so a parsed spec
/// serializes back to an identical object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coefficient(String);

impl Coefficient {
    pub fn new(text: impl Into<String>) -> Result<Self, String> {
        let text = text.into();
        parse_rational(&text)?;
        Ok(Coefficient(text))
    }

    pub fn rational(&self) -> Rational {
        parse_rational(&self.0).expect("validated on construction")
    }

    pub fn to_scalar<S: BackendScalar>(&self) -> S {
        S::from_rational(&self.rational())
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Coefficient {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Coefficient {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = match Value::deserialize(d)? {
            Value::String(s) => s,
            Value::Number(n) => n.to_string(),
            other => return Err(serde::de::Error::custom(format!("expected a number or \"p/q\" string, got {other}"))),
        };
        Coefficient::new(text).map_err(serde::de::Error::custom)
    }
}

/// Parses `p/q`, integers and decimals with an optional exponent, exactly.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let t = text.trim();
    let bad = || format!("cannot read {text:?} as a rational number");
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(format!("zero denominator in {text:?}"));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(k) => (&t[..k], t[k + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (sign, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = BigInt::from_str(&format!("{int}{frac}")).map_err(|_| bad())? * sign;
    if exponent.abs() > 1000 {
        return Err(format!("exponent out of range in {text:?}"));
    }
    let shift = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let value = if shift >= 0 {
        Rational::from_integer(digits * Pow::pow(&ten, shift as u32))
    } else {
        Rational::new(digits, Pow::pow(&ten, (-shift) as u32))
    };
    Ok(value)
}

/// The two backends as seen by the CLI: built from exact input, printed as
/// `"p/q"` (always with a denominator) or as a plain number.
pub trait BackendScalar: Scalar {
    fn from_rational(r: &Rational) -> Self;
    fn to_json(&self) -> Value;
}

impl BackendScalar for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_json(&self) -> Value {
        Value::String(format!("{}/{}", self.numer(), self.denom()))
    }
}

impl BackendScalar for f64 {
    fn from_rational(r: &Rational) -> Self {
        Scalar::to_f64(r)
    }
    fn to_json(&self) -> Value {
        float(*self)
    }
}

pub fn float(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or_else(|| Value::String(v.to_string()), Value::Number)
}
