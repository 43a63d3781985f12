//! Exact rational helpers.
//!
//! Every quantity in this crate is a [`Rational`] (arbitrary precision). On the
//! wire rationals are strings of the form `"p/q"` or `"p"`, never floats.

use std::str::FromStr;

use num::{BigInt, BigRational, Integer, One, Signed, Zero};
use thiserror::Error;

pub type Rational = BigRational;

/// Builds `n/d` from machine integers. Panics on `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn integer(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error(
    "cannot parse {input:?} as an exact rational (expected \"p/q\", \"p\" or a finite decimal)"
)]
pub struct ParseRationalError {
    pub input: String,
}

pub fn parse_rational(input: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError {
        input: input.to_string(),
    };
    let s = input.trim();
    if let Some((whole, frac)) = s.split_once('.') {
        let digits_ok = |t: &str| t.chars().all(|c| c.is_ascii_digit());
        let sign_free = whole.strip_prefix('-').unwrap_or(whole);
        if frac.is_empty() || !digits_ok(frac) || !digits_ok(sign_free) {
            return Err(err());
        }
        let digits = BigInt::from_str(&format!("{sign_free}{frac}")).map_err(|_| err())?;
        let value = Rational::new(digits, BigInt::from(10).pow(frac.len() as u32));
        return Ok(if whole.starts_with('-') {
            -value
        } else {
            value
        });
    }
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| err())?;
    let den = BigInt::from_str(den).map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(num, den))
}

/// Canonical text form: `"p/q"` in lowest terms, or `"p"` for integers.
pub fn format_rational(x: &Rational) -> String {
    x.to_string()
}

/// `floor(x * scale)`.
pub fn floor_scaled(x: &Rational, scale: &BigInt) -> BigInt {
    let (n, d) = (x.numer() * scale, x.denom());
    n.div_floor(d)
}

/// `ceil(x * scale)`.
pub fn ceil_scaled(x: &Rational, scale: &BigInt) -> BigInt {
    let (n, d) = (x.numer() * scale, x.denom());
    n.div_ceil(d)
}

/// `max(a/b, b/a)` for positive `a`, `b`.
pub fn symmetric_ratio(a: &Rational, b: &Rational) -> Rational {
    if a >= b {
        a / b
    } else {
        b / a
    }
}

/// Rounds `x` down onto the grid `2^-bits` when its denominator has grown past
/// `2 * bits` bits. Keeps long products of brackets from blowing up.
pub fn round_down(x: Rational, bits: u64) -> Rational {
    if x.denom().bits() <= 2 * bits {
        return x;
    }
    let scale = BigInt::one() << bits;
    Rational::new(floor_scaled(&x, &scale), scale)
}

pub fn round_up(x: Rational, bits: u64) -> Rational {
    if x.denom().bits() <= 2 * bits {
        return x;
    }
    let scale = BigInt::one() << bits;
    Rational::new(ceil_scaled(&x, &scale), scale)
}

/// Converts a rational to a decimal string with `digits` significant digits
/// (truncated toward zero). Exact integer arithmetic; no floats involved.
/// Returns the string and whether it represents `x` exactly.
pub fn to_decimal(x: &Rational, digits: usize) -> (String, bool) {
    if x.is_zero() {
        return ("0".to_string(), true);
    }
    let negative = x.is_negative();
    let x = x.abs();
    let ten = BigInt::from(10);
    // Find exponent e with 10^e <= x < 10^(e+1).
    let mut exp: i64 = 0;
    let mut probe = x.clone();
    while probe >= Rational::from_integer(ten.clone()) {
        probe /= Rational::from_integer(ten.clone());
        exp += 1;
    }
    while probe < Rational::one() {
        probe *= Rational::from_integer(ten.clone());
        exp -= 1;
    }
    let shift = digits as i64 - 1 - exp;
    let scaled = if shift >= 0 {
        &x * Rational::from_integer(num::pow(ten.clone(), shift as usize))
    } else {
        &x / Rational::from_integer(num::pow(ten.clone(), (-shift) as usize))
    };
    let mantissa = scaled.trunc().to_integer();
    let exact = scaled.is_integer();
    let mut text = mantissa.to_string();
    if shift > 0 {
        let shift = shift as usize;
        if text.len() <= shift {
            text = format!("{}{}", "0".repeat(shift - text.len() + 1), text);
        }
        let point = text.len() - shift;
        text.insert(point, '.');
        let trimmed = text.trim_end_matches('0').trim_end_matches('.');
        text = trimmed.to_string();
    } else {
        text.push_str(&"0".repeat((-shift) as usize));
    }
    if negative {
        text.insert(0, '-');
    }
    (text, exact)
}

/// Serde adapter: a single rational as a `"p/q"` string.
pub mod serde_str {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(D::Error::custom)
    }
}

/// Serde adapter: a list of rationals as `["p/q", ...]`.
pub mod serde_str_vec {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&format_rational(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .map(|t| parse_rational(t).map_err(D::Error::custom))
            .collect()
    }
}

/// Serde adapter for `Option<Rational>`.
pub mod serde_str_opt {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_some(&format_rational(x)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let text = Option::<String>::deserialize(d)?;
        text.map(|t| parse_rational(&t).map_err(D::Error::custom))
            .transpose()
    }
}

/// Serde adapter: an unsigned big integer as a decimal string.
pub mod serde_uint {
    use num::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(D::Error::custom)
    }
}
