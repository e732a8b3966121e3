//! Small helpers around exact integers and rationals: parsing, formatting,
//! and integer rounding. Everything works on arbitrary-precision values.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::str::FromStr;

/// `BigInt` from a machine integer; shorthand used all over the tests.
pub fn bi(v: i64) -> BigInt {
    BigInt::from(v)
}

/// Exact rational `n/d`.
///
/// Panics if `d == 0`.
pub fn br(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Rational from an integer.
pub fn int_rat(v: &BigInt) -> BigRational {
    BigRational::from_integer(v.clone())
}

/// Largest integer `<= r`.
pub fn floor_int(r: &BigRational) -> BigInt {
    r.floor().to_integer()
}

/// Smallest integer `>= r`.
pub fn ceil_int(r: &BigRational) -> BigInt {
    r.ceil().to_integer()
}

/// Canonical text form: plain integer when the denominator is 1, otherwise
/// `num/den` in lowest terms.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse an exact rational from text.
///
/// Accepted forms: `"7"`, `"-3"`, `"2/9"`, `"-10/4"` (reduced automatically),
/// and finite decimals like `"0.03"` (read exactly as 3/100). Anything else,
/// including a zero denominator, is rejected.
pub fn parse_rational(text: &str) -> Result<BigRational, String> {
    let s = text.trim();
    if s.is_empty() {
        return Err("empty rational literal".into());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim())
            .map_err(|_| format!("bad numerator in rational `{s}`"))?;
        let d = BigInt::from_str(den.trim())
            .map_err(|_| format!("bad denominator in rational `{s}`"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in rational `{s}`"));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let neg = whole.trim_start().starts_with('-');
        let w = if whole == "-" || whole.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(whole).map_err(|_| format!("bad decimal `{s}`"))?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("bad decimal `{s}`"));
        }
        let digits = BigInt::from_str(frac).map_err(|_| format!("bad decimal `{s}`"))?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part = BigRational::new(digits, scale);
        let whole_part = BigRational::from_integer(w.abs());
        let total = whole_part + frac_part;
        return Ok(if neg { -total } else { total });
    }
    BigInt::from_str(s)
        .map(BigRational::from_integer)
        .map_err(|_| format!("bad rational `{s}`"))
}

/// Lexicographic order on integer vectors (first differing entry decides).
pub fn lex_cmp(a: &[BigInt], b: &[BigInt]) -> std::cmp::Ordering {
    debug_assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_integers() {
        assert_eq!(parse_rational("7").unwrap(), br(7, 1));
        assert_eq!(parse_rational("-3").unwrap(), br(-3, 1));
    }

    #[test]
    fn parses_fractions_and_reduces() {
        assert_eq!(parse_rational("2/9").unwrap(), br(2, 9));
        assert_eq!(parse_rational("-10/4").unwrap(), br(-5, 2));
        assert_eq!(parse_rational(" 3 / 100 ").unwrap(), br(3, 100));
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rational("0.03").unwrap(), br(3, 100));
        assert_eq!(parse_rational("-1.25").unwrap(), br(-5, 4));
        assert_eq!(parse_rational("12.0").unwrap(), br(12, 1));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("4.5e3").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(format_rational(&br(4, 2)), "2");
        assert_eq!(format_rational(&br(-3, 9)), "-1/3");
        assert_eq!(format_rational(&br(0, 5)), "0");
    }

    #[test]
    fn integer_rounding() {
        assert_eq!(floor_int(&br(7, 2)), bi(3));
        assert_eq!(ceil_int(&br(7, 2)), bi(4));
        assert_eq!(floor_int(&br(-7, 2)), bi(-4));
        assert_eq!(ceil_int(&br(-7, 2)), bi(-3));
        assert_eq!(floor_int(&br(6, 2)), bi(3));
        assert_eq!(ceil_int(&br(6, 2)), bi(3));
    }

    #[test]
    fn lex_order_first_difference_wins() {
        let a = vec![bi(1), bi(-2), bi(5)];
        let b = vec![bi(1), bi(-1), bi(0)];
        assert_eq!(lex_cmp(&a, &b), std::cmp::Ordering::Less);
        assert_eq!(lex_cmp(&b, &a), std::cmp::Ordering::Greater);
        assert_eq!(lex_cmp(&a, &a), std::cmp::Ordering::Equal);
    }
}
