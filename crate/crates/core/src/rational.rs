//! Exact rational arithmetic helpers.
//!
//! Every price, stake, weight, and capital in this crate is a
//! [`Rat`] (`BigRational`). Floating point never enters a computation;
//! decimal output is a rendering convenience applied at the boundary.

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::Error;

/// Arbitrary-precision rational number used throughout the crate.
pub type Rat = BigRational;

/// Shorthand for `n/d` as a [`Rat`]. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Shorthand for the integer `n` as a [`Rat`].
pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses a rational from `"p/q"`, an integer string, or a plain decimal
/// such as `"0.25"`. Decimals convert exactly (never through a float).
pub fn parse_rat(s: &str) -> Result<Rat, Error> {
    let t = s.trim();
    let err = || Error::ParseRational(s.to_string());
    if t.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = t.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| err())?;
        let d: BigInt = den.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let negative = whole.starts_with('-');
        let whole_mag = whole.trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit()) || frac.is_empty() {
            return Err(err());
        }
        let w: BigInt = if whole_mag.is_empty() {
            BigInt::zero()
        } else {
            whole_mag.parse().map_err(|_| err())?
        };
        let f: BigInt = frac.parse().map_err(|_| err())?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let mag = w * &scale + f;
        let signed = if negative { -mag } else { mag };
        return Ok(Rat::new(signed, scale));
    }
    let n: BigInt = t.parse().map_err(|_| err())?;
    Ok(Rat::from_integer(n))
}

/// Canonical string form: `"p"` when the denominator is one, else `"p/q"`.
pub fn render_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering with `digits` places after the point, rounded
/// half away from zero. Output only; the exact value is untouched.
pub fn decimal_string(r: &Rat, digits: u32) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    // round(|r|*10^d + 1/2)
    let scaled = (r.abs() * Rat::from_integer(scale.clone()) + rat(1, 2)).floor();
    let scaled = scaled.to_integer();
    let (ipart, fpart) = (&scaled / &scale, &scaled % &scale);
    let sign = if r.is_negative() && !scaled.is_zero() {
        "-"
    } else {
        ""
    };
    if digits == 0 {
        return format!("{sign}{ipart}");
    }
    let frac = fpart.to_string();
    format!(
        "{sign}{ipart}.{}{frac}",
        "0".repeat(digits as usize - frac.len())
    )
}

/// Serde adapter storing a [`Rat`] as its canonical string.
pub mod serde_rat {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::{parse_rat, render_rat, Rat};

    pub fn serialize<S: Serializer>(r: &Rat, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&render_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(de)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for vectors of rationals as string arrays.
pub mod serde_rat_vec {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::{parse_rat, render_rat, Rat};

    pub fn serialize<S: Serializer>(v: &[Rat], ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_seq(v.iter().map(render_rat))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Rat>, D::Error> {
        let strings = Vec::<String>::deserialize(de)?;
        strings
            .iter()
            .map(|s| parse_rat(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
