//! Scalar abstraction for the linear-algebra layer.
//!
//! Everything in this crate is written against [`Scalar`], an ordered field
//! with exact arithmetic. The intended instantiation is [`Rational`]
//! (arbitrary-precision rationals, always in lowest terms with positive
//! denominator); the concrete alias lives at the crate root. Floating-point
//! types satisfy the bounds syntactically but violate the exactness contract,
//! so nothing in this crate instantiates them.

use std::fmt::{Debug, Display};

use num_traits::{FromPrimitive, Num, Signed};

/// An exactly-represented ordered field element.
///
/// Division by a nonzero element must be exact: `a / b * b == a`. Comparisons
/// must be total on the values actually produced (no NaN-like elements).
pub trait Scalar:
    Clone + PartialEq + PartialOrd + Debug + Display + Num + Signed + FromPrimitive
{
    /// Embeds a machine integer.
    fn from_int(value: i64) -> Self {
        Self::from_i64(value).expect("integer embeds into the scalar field")
    }
}

impl<T> Scalar for T where
    T: Clone + PartialEq + PartialOrd + Debug + Display + Num + Signed + FromPrimitive
{
}

/// Parses a rational literal: either `p/q` or a bare integer `p`.
///
/// This is the entry syntax used by the HLP file format. Whitespace is not
/// allowed; the denominator must be nonzero.
pub fn parse_rational(text: &str) -> Result<crate::Rational, String> {
    let make_int = |s: &str| {
        s.parse::<num_bigint::BigInt>()
            .map_err(|e| format!("invalid integer {s:?}: {e}"))
    };
    match text.split_once('/') {
        Some((num, den)) => {
            let num = make_int(num)?;
            let den = make_int(den)?;
            if den == num_bigint::BigInt::from(0) {
                return Err(format!("zero denominator in {text:?}"));
            }
            Ok(crate::Rational::new(num, den))
        }
        None => Ok(crate::Rational::from(make_int(text)?)),
    }
}

/// Formats a rational as the literal syntax accepted by [`parse_rational`]:
/// bare integer when the denominator is 1, `p/q` otherwise.
pub fn format_rational(value: &crate::Rational) -> String {
    if num_traits::One::is_one(value.denom()) {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn parse_and_format_round_trip() {
        for text in ["0", "7", "-3", "2/4", "-10/15"] {
            let value = parse_rational(text).unwrap();
            let canon = format_rational(&value);
            assert_eq!(parse_rational(&canon).unwrap(), value);
        }
        assert_eq!(format_rational(&parse_rational("2/4").unwrap()), "1/2");
        assert_eq!(format_rational(&parse_rational("-10/15").unwrap()), "-2/3");
        assert_eq!(format_rational(&parse_rational("4/-2").unwrap()), "-2");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/2").is_err());
        assert!(parse_rational("1.5").is_err());
        assert!(parse_rational("1 / 2").is_err());
    }

    #[test]
    fn lowest_terms_invariant() {
        let r = Rational::new(6.into(), (-4).into());
        assert_eq!(r.numer().to_string(), "-3");
        assert_eq!(r.denom().to_string(), "2");
    }
}
