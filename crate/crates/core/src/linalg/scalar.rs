//! Scalar field abstraction over exact rationals and binary64 floats.
//!
//! Every analysis routine is generic over [`Scalar`], so the arithmetic
//! mode of a computation is fixed by its type: a `Subspace<Rational>` can
//! never be summed with a `Subspace<f64>`. Mode mixing can only happen at
//! the serialization boundary, where [`Number::resolve`] rejects it.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::LinalgError;

/// Arbitrary-precision rational, always stored reduced with a positive denominator.
pub type Rational = BigRational;

/// Arithmetic backend of a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rational,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Rational => f.write_str("rational"),
            Mode::Float => f.write_str("float"),
        }
    }
}

impl FromStr for Mode {
    type Err = LinalgError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" | "exact" => Ok(Mode::Rational),
            "float" => Ok(Mode::Float),
            other => Err(LinalgError::ParseNumber(format!("unknown arithmetic mode `{other}`"))),
        }
    }
}

pub trait Scalar:
    Clone + fmt::Debug + fmt::Display + PartialEq + PartialOrd + Signed + Send + Sync + 'static
{
    const MODE: Mode;

    fn from_rational(r: &Rational) -> Self;

    /// Exact rational value. Floats are converted bit-for-bit.
    fn to_rational(&self) -> Rational;

    fn to_f64(&self) -> f64;

    fn to_number(&self) -> Number;

    fn int(v: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(v)))
    }

    fn ratio(p: i64, q: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(p), BigInt::from(q)))
    }

    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }
}

impl Scalar for Rational {
    const MODE: Mode = Mode::Rational;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_number(&self) -> Number {
        Number::Exact(self.clone())
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> Rational {
        Rational::from_float(*self).expect("non-finite float cannot be rationalized")
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_number(&self) -> Number {
        Number::Float(*self)
    }
}

/// Renders a rational as `"p/q"`, including integers (`"3/1"`).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"p/q"`, `"p"`, or a plain decimal literal such as `"-1.25"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational, LinalgError> {
    let s = s.trim();
    let bad = || LinalgError::ParseNumber(format!("`{s}` is not a rational literal"));
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(LinalgError::ParseNumber(format!("`{s}` has a zero denominator")));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.trim_start().starts_with('-');
        let whole = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(int).map_err(|_| bad())?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let digits = BigInt::from_str(frac).map_err(|_| bad())?;
        let frac_part = Rational::new(digits, scale);
        let whole = Rational::from_integer(whole);
        return Ok(if negative { whole - frac_part } else { whole + frac_part });
    }
    BigInt::from_str(s).map(Rational::from_integer).map_err(|_| bad())
}

/// A serialized scalar: exact values travel as `"p/q"` strings, floats as JSON numbers.
#[derive(Debug, Clone, PartialEq)]
pub enum Number {
    Exact(Rational),
    Float(f64),
}

impl Number {
    pub fn mode(&self) -> Mode {
        match self {
            Number::Exact(_) => Mode::Rational,
            Number::Float(_) => Mode::Float,
        }
    }

    /// Converts into the scalar type of the requested mode.
    ///
    /// Exact values are accepted by both modes. A float literal inside a
    /// rational-mode computation is a mode mix and is rejected.
    pub fn resolve<T: Scalar>(&self) -> Result<T, LinalgError> {
        match (self, T::MODE) {
            (Number::Exact(r), _) => Ok(T::from_rational(r)),
            (Number::Float(x), Mode::Float) => {
                if x.is_finite() {
                    Ok(T::from_rational(&x.to_rational()))
                } else {
                    Err(LinalgError::ParseNumber(format!("non-finite value {x}")))
                }
            }
            (Number::Float(_), Mode::Rational) => Err(LinalgError::ModeMismatch),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(r) => Scalar::to_f64(r),
            Number::Float(x) => *x,
        }
    }
}

impl From<i64> for Number {
    fn from(v: i64) -> Self {
        Number::Exact(Rational::from_integer(v.into()))
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Number::Exact(r) => write!(f, "{}", format_rational(r)),
            Number::Float(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for Number {
    type Err = LinalgError;

    /// Command-line literal: rationals and decimals are exact, exponent forms are floats.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match parse_rational(s) {
            Ok(r) => Ok(Number::Exact(r)),
            Err(e) => s.trim().parse::<f64>().map(Number::Float).map_err(|_| e),
        }
    }
}

impl Serialize for Number {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Number::Exact(r) => serializer.serialize_str(&format_rational(r)),
            Number::Float(x) => serializer.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Number {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct NumberVisitor;

        impl Visitor<'_> for NumberVisitor {
            type Value = Number;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a JSON number or a rational string \"p/q\"")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Number, E> {
                Ok(Number::from(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Number, E> {
                Ok(Number::Exact(Rational::from_integer(v.into())))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Number, E> {
                Ok(Number::Float(v))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Number, E> {
                parse_rational(v).map(Number::Exact).map_err(E::custom)
            }
        }

        deserializer.deserialize_any(NumberVisitor)
    }
}

/// Serializes a vector of scalars through [`Number`].
pub fn to_numbers<T: Scalar>(v: &[T]) -> Vec<Number> {
    v.iter().map(Scalar::to_number).collect()
}
