//! Exact rational numbers used for every mass, coefficient and threshold.

use alloc::string::{String, ToString};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RationalError {
    #[error("empty numeral")]
    Empty,
    #[error("malformed numeral `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

fn digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

/// Parses `p/q`, an integer, or a decimal literal (`0.9`, `-1.25`) exactly.
pub fn parse_rational(text: &str) -> Result<Rational, RationalError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(RationalError::Empty);
    }
    let malformed = || RationalError::Malformed(s.to_string());
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let value = if let Some((num, den)) = body.split_once('/') {
        if !digits(num) || !digits(den) {
            return Err(malformed());
        }
        let den: BigInt = den.parse().map_err(|_| malformed())?;
        if den.is_zero() {
            return Err(RationalError::ZeroDenominator(s.to_string()));
        }
        Rational::new(num.parse().map_err(|_| malformed())?, den)
    } else if let Some((whole, frac)) = body.split_once('.') {
        if (whole.is_empty() && frac.is_empty())
            || !(whole.is_empty() || digits(whole))
            || !(frac.is_empty() || digits(frac))
        {
            return Err(malformed());
        }
        let mut joined = String::from(whole);
        joined.push_str(frac);
        let numerator: BigInt = joined.parse().map_err(|_| malformed())?;
        let scale = num_traits::pow(BigInt::from(10u32), frac.len());
        Rational::new(numerator, scale)
    } else {
        if !digits(body) {
            return Err(malformed());
        }
        Rational::from_integer(body.parse().map_err(|_| malformed())?)
    };
    Ok(if negative { -value } else { value })
}

/// Decimal rendering rounded half away from zero to at most `places`
/// fractional digits, trailing zeros trimmed.
pub fn to_decimal(value: &Rational, places: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10u32), places);
    let scaled = value.abs() * Rational::from_integer(scale.clone());
    let mut units = scaled.floor().to_integer();
    if scaled.fract() * Rational::from_integer(BigInt::from(2)) >= Rational::one() {
        units += 1;
    }
    let (whole, frac) = units.div_rem(&scale);
    let mut out = String::new();
    if value.is_negative() && !units.is_zero() {
        out.push('-');
    }
    out.push_str(&whole.to_string());
    if places > 0 && !frac.is_zero() {
        let mut frac_digits = frac.to_string();
        while frac_digits.len() < places {
            frac_digits.insert(0, '0');
        }
        let trimmed = frac_digits.trim_end_matches('0');
        out.push('.');
        out.push_str(trimmed);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_exactly() {
        assert_eq!(parse_rational("7/20").unwrap(), ratio(7, 20));
        assert_eq!(parse_rational("0.9").unwrap(), ratio(9, 10));
        assert_eq!(parse_rational(".0001").unwrap(), ratio(1, 10000));
        assert_eq!(parse_rational("-1.25").unwrap(), ratio(-5, 4));
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational("4/8").unwrap(), ratio(1, 2));
    }

    #[test]
    fn rejects_junk() {
        assert_eq!(parse_rational(""), Err(RationalError::Empty));
        assert!(matches!(parse_rational("1/0"), Err(RationalError::ZeroDenominator(_))));
        for bad in ["a", "1/", "/2", "1.2.3", ".", "1/2/3", "0x10", "1e3"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&ratio(3, 5), 6), "0.6");
        assert_eq!(to_decimal(&ratio(11, 25), 6), "0.44");
        assert_eq!(to_decimal(&ratio(1, 3), 4), "0.3333");
        assert_eq!(to_decimal(&ratio(2, 3), 4), "0.6667");
        assert_eq!(to_decimal(&ratio(-1, 8), 2), "-0.13");
        assert_eq!(to_decimal(&int(1), 6), "1");
        assert_eq!(to_decimal(&ratio(1, 1000), 2), "0");
    }
}
