//! Exact numbers for problem files: decimals (`0.25`, `-1.5e-2`), ratios
//! (`1/3`) and integers, held as `i128` rationals.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = Ratio<i128>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid number '{text}': {reason}")]
pub struct NumberError {
    pub text: String,
    pub reason: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Number(pub Rational);

const MAX_EXPONENT: u32 = 30;

fn err(text: &str, reason: &'static str) -> NumberError {
    NumberError {
        text: text.to_string(),
        reason,
    }
}

fn parse_integer(text: &str, digits: &str) -> Result<i128, NumberError> {
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err(text, "expected digits"));
    }
    digits.parse::<i128>().map_err(|_| err(text, "too many digits"))
}

fn pow10(text: &str, e: u32) -> Result<i128, NumberError> {
    10i128.checked_pow(e).ok_or_else(|| err(text, "exponent out of range"))
}

/// Parses `[+-]digits[.digits][e[+-]digits]` or `[+-]digits/digits`.
pub fn parse_number(text: &str) -> Result<Rational, NumberError> {
    let t = text.trim();
    let (negative, body) = match t.as_bytes().first() {
        Some(b'-') => (true, &t[1..]),
        Some(b'+') => (false, &t[1..]),
        Some(_) => (false, t),
        None => return Err(err(text, "empty")),
    };
    let value = if let Some((num, den)) = body.split_once('/') {
        let n = parse_integer(text, num)?;
        let d = parse_integer(text, den)?;
        if d == 0 {
            return Err(err(text, "zero denominator"));
        }
        Rational::new(n, d)
    } else {
        let (mantissa, exponent) = match body.find(['e', 'E']) {
            Some(k) => (&body[..k], Some(&body[k + 1..])),
            None => (body, None),
        };
        let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(err(text, "expected digits"));
        }
        let digits = format!("{int}{frac}");
        let mut num = parse_integer(text, &digits)?;
        let frac_len = u32::try_from(frac.len()).map_err(|_| err(text, "too many digits"))?;
        let mut scale: i64 = -(frac_len as i64);
        if let Some(e) = exponent {
            let (sign, mag) = match e.as_bytes().first() {
                Some(b'-') => (-1, &e[1..]),
                Some(b'+') => (1, &e[1..]),
                _ => (1, e),
            };
            let mag = parse_integer(text, mag)?;
            if mag > MAX_EXPONENT as i128 {
                return Err(err(text, "exponent out of range"));
            }
            scale += sign * mag as i64;
        }
        let mut den = 1i128;
        if scale >= 0 {
            num = num
                .checked_mul(pow10(text, scale as u32)?)
                .ok_or_else(|| err(text, "too many digits"))?;
        } else {
            den = pow10(text, (-scale) as u32)?;
        }
        Rational::new(num, den)
    };
    Ok(if negative { -value } else { value })
}

impl Number {
    pub fn to_f64(self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact rational of a finite float, read from its shortest decimal form.
    pub fn from_f64(v: f64) -> Result<Number, NumberError> {
        if !v.is_finite() {
            return Err(err(&v.to_string(), "not finite"));
        }
        parse_number(&format!("{v:e}")).map(Number)
    }
}

impl FromStr for Number {
    type Err = NumberError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_number(s).map(Number)
    }
}

/// Decimal when the denominator divides a power of ten, `p/q` otherwise.
impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = (*self.0.numer(), *self.0.denom());
        if d == 1 {
            return write!(f, "{n}");
        }
        let (mut twos, mut fives, mut rest) = (0u32, 0u32, d);
        while rest % 2 == 0 {
            rest /= 2;
            twos += 1;
        }
        while rest % 5 == 0 {
            rest /= 5;
            fives += 1;
        }
        let places = twos.max(fives);
        let scaled = (rest == 1)
            .then(|| 10i128.checked_pow(places))
            .flatten()
            .and_then(|p| n.checked_mul(p / d));
        match scaled {
            Some(m) => {
                let sign = if m < 0 { "-" } else { "" };
                let m = m.unsigned_abs();
                let p = 10u128.pow(places);
                write!(f, "{sign}{}.{:0width$}", m / p, m % p, width = places as usize)
            }
            None => write!(f, "{n}/{d}"),
        }
    }
}

impl Serialize for Number {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Number {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Number;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or a decimal/ratio string")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Number, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Number, E> {
                Ok(Number(Rational::from_integer(v as i128)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Number, E> {
                Ok(Number(Rational::from_integer(v as i128)))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Number, E> {
                Number::from_f64(v).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}
