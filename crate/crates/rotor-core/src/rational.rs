//! Exact rational arithmetic helpers.
//!
//! Rationals are the carriers for breakpoints, lift values, cylinder
//! endpoints and strip slopes. They are backed by [`num_rational::BigRational`],
//! which keeps every value in lowest terms with a positive denominator.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always in lowest terms, denominator > 0.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RationalParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal {0:?}")]
    Malformed(String),
    #[error("zero or negative denominator in {0:?}")]
    NonPositiveDenominator(String),
    #[error("rational {0:?} is not in lowest terms")]
    NotReduced(String),
}

/// Shorthand constructor from machine integers.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses `"p"` or `"p/q"`.
///
/// The literal must already be in lowest terms and the denominator must be
/// a positive integer without a sign; anything else is rejected so that a
/// map file has exactly one spelling per value.
pub fn parse_rational(text: &str) -> Result<Rational, RationalParseError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(RationalParseError::Empty);
    }
    let (num_str, den_str) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let numer: BigInt = num_str
        .parse()
        .map_err(|_| RationalParseError::Malformed(text.to_owned()))?;
    let denom: BigInt = match den_str {
        Some(d) => {
            if d.starts_with(['+', '-']) {
                return Err(RationalParseError::NonPositiveDenominator(text.to_owned()));
            }
            d.parse()
                .map_err(|_| RationalParseError::Malformed(text.to_owned()))?
        }
        None => BigInt::from(1),
    };
    if denom.is_zero() || denom.is_negative() {
        return Err(RationalParseError::NonPositiveDenominator(text.to_owned()));
    }
    let value = Rational::new(numer.clone(), denom.clone());
    if value.numer() != &numer || value.denom() != &denom {
        return Err(RationalParseError::NotReduced(text.to_owned()));
    }
    Ok(value)
}

/// Formats as `"p"` or `"p/q"`, the inverse of [`parse_rational`].
pub fn format_rational(value: &Rational) -> String {
    if value.denom() == &BigInt::from(1) {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Nearest `f64` to an exact rational.
pub fn to_f64(value: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(value).unwrap_or(f64::NAN)
}

/// Largest integer `<= value`.
pub fn floor_int(value: &Rational) -> BigInt {
    value.floor().to_integer()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!(parse_rational("4/3").unwrap(), rat(4, 3));
        assert_eq!(parse_rational("-2").unwrap(), rat(-2, 1));
        assert_eq!(parse_rational(" 0 ").unwrap(), rat(0, 1));
    }

    #[test]
    fn rejects_non_reduced() {
        assert_eq!(
            parse_rational("2/4"),
            Err(RationalParseError::NotReduced("2/4".into()))
        );
    }

    #[test]
    fn rejects_bad_denominators() {
        assert!(matches!(
            parse_rational("1/0"),
            Err(RationalParseError::NonPositiveDenominator(_))
        ));
        assert!(matches!(
            parse_rational("1/-2"),
            Err(RationalParseError::NonPositiveDenominator(_))
        ));
    }

    #[test]
    fn round_trips() {
        for s in ["0", "1", "-5/7", "4/3", "1000000000000000000000/7"] {
            assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
        }
    }
}
