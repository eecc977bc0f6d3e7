//! Scalar abstraction for distance values.
//!
//! Every algorithm in this crate is written against [`Scalar`], so the same
//! code runs over fixed-width rationals ([`crate::Rational`]) and
//! arbitrary-precision rationals ([`crate::BigRational`]). Both are exact;
//! there is no floating-point instantiation.

use std::fmt::{Debug, Display};

use num_traits::{FromPrimitive, Num};
use thiserror::Error;

/// Exact ordered field element used for distances.
///
/// `PartialOrd` must be total on every value this crate produces; comparisons
/// are used for certification and ties are meaningful.
pub trait Scalar:
    Num + FromPrimitive + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// Builds `numerator / denominator`. The denominator is nonzero.
    fn from_fraction(numerator: i128, denominator: i128) -> Self {
        let n = Self::from_i128(numerator).expect("numerator representable");
        let d = Self::from_i128(denominator).expect("denominator representable");
        n / d
    }

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }
}

impl Scalar for num_rational::Ratio<i128> {}
impl Scalar for num_rational::BigRational {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseScalarError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal {0:?}: expected [sign]digits[/digits | .digits]")]
    Grammar(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("rational literal {0:?} does not fit the numeric range")]
    Overflow(String),
}

fn digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

/// Parses `[+-]digits`, `[+-]digits/digits` or `[+-]digits.digits` exactly.
pub fn parse_scalar<S: Scalar>(text: &str) -> Result<S, ParseScalarError> {
    if text.is_empty() {
        return Err(ParseScalarError::Empty);
    }
    let grammar = || ParseScalarError::Grammar(text.to_owned());
    let overflow = || ParseScalarError::Overflow(text.to_owned());

    let (negative, body) = match text.as_bytes()[0] {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };

    let (numerator, denominator) = if let Some((num, den)) = body.split_once('/') {
        if !digits(num) || !digits(den) {
            return Err(grammar());
        }
        let n: i128 = num.parse().map_err(|_| overflow())?;
        let d: i128 = den.parse().map_err(|_| overflow())?;
        if d == 0 {
            return Err(ParseScalarError::ZeroDenominator(text.to_owned()));
        }
        (n, d)
    } else if let Some((int, frac)) = body.split_once('.') {
        if !digits(int) || !digits(frac) {
            return Err(grammar());
        }
        let scale = 10i128.checked_pow(frac.len() as u32).ok_or_else(overflow)?;
        let int: i128 = int.parse().map_err(|_| overflow())?;
        let frac: i128 = frac.parse().map_err(|_| overflow())?;
        let n = int
            .checked_mul(scale)
            .and_then(|v| v.checked_add(frac))
            .ok_or_else(overflow)?;
        (n, scale)
    } else {
        if !digits(body) {
            return Err(grammar());
        }
        (body.parse().map_err(|_| overflow())?, 1)
    };

    let value = S::from_fraction(numerator, denominator);
    Ok(if negative { S::zero() - value } else { value })
}

/// Serde adapters that write scalars as their exact `p/q` string form.
pub mod ser {
    use std::fmt::Display;

    use serde::ser::SerializeSeq;
    use serde::Serializer;

    pub fn display<T: Display, S: Serializer>(value: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(value)
    }

    pub fn display_opt<T: Display, S: Serializer>(
        value: &Option<T>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => s.collect_str(v),
            None => s.serialize_none(),
        }
    }

    pub fn display_vec<T: Display, S: Serializer>(values: &[T], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(values.len()))?;
        for v in values {
            seq.serialize_element(&v.to_string())?;
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn parses_fraction_and_prints_reduced() {
        let x: Rational = parse_scalar("3/2").unwrap();
        assert_eq!(x.to_string(), "3/2");
        let y: Rational = parse_scalar("6/4").unwrap();
        assert_eq!(y, r(3, 2));
        assert_eq!(parse_scalar::<Rational>("-7/14").unwrap(), r(-1, 2));
    }

    #[test]
    fn parses_decimals_and_integers() {
        assert_eq!(parse_scalar::<Rational>("1.25").unwrap(), r(5, 4));
        assert_eq!(parse_scalar::<Rational>("+0.1").unwrap(), r(1, 10));
        assert_eq!(parse_scalar::<Rational>("42").unwrap(), r(42, 1));
        assert_eq!(parse_scalar::<Rational>("-3").unwrap(), r(-3, 1));
    }

    #[test]
    fn rejects_bad_literals() {
        assert_eq!(
            parse_scalar::<Rational>("1/0"),
            Err(ParseScalarError::ZeroDenominator("1/0".into()))
        );
        for bad in ["", "a", "1/", "/2", "1.", ".5", "1/2/3", "1e3", "--1", " 1", "1.5/2"] {
            assert!(parse_scalar::<Rational>(bad).is_err(), "{bad:?} accepted");
        }
        assert!(matches!(
            parse_scalar::<Rational>("1000000000000000000000000000000000000000000"),
            Err(ParseScalarError::Overflow(_))
        ));
    }

    #[test]
    fn big_rational_agrees() {
        let a: crate::BigRational = parse_scalar("22/7").unwrap();
        assert_eq!(a.to_string(), "22/7");
    }
}
