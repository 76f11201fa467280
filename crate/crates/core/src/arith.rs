//! Exact big-rational helpers shared by the series, measure and oracle code.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// A value that is exact when the inputs allow it and floating otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Number {
    Exact(Rational),
    Float(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(r) => ratio_to_f64(r),
            Number::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Number::Exact(r) => Some(r),
            Number::Float(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Number::Exact(_))
    }

    pub fn mul(&self, other: &Number) -> Number {
        match (self, other) {
            (Number::Exact(a), Number::Exact(b)) => Number::Exact(a * b),
            _ => Number::Float(self.to_f64() * other.to_f64()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Number::Exact(r) => r.is_zero(),
            Number::Float(x) => *x == 0.0,
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Exact(r) => write!(f, "{}", format_rational(r)),
            Number::Float(x) => write!(f, "{x}"),
        }
    }
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// C(n, k) for a nonnegative big integer n.
pub fn binomial(n: &BigInt, k: u64) -> BigInt {
    if n.is_negative() {
        return BigInt::zero();
    }
    if let Some(small) = n.to_u64() {
        if k > small {
            return BigInt::zero();
        }
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - BigInt::from(i);
        acc /= BigInt::from(i + 1);
    }
    acc
}

/// C(m + k - 1, k) for a possibly fractional m (negative-binomial weights).
pub fn multichoose(m: &Rational, k: u64) -> Rational {
    let mut acc = Rational::one();
    for i in 0..k {
        acc *= m + int(i as i64);
        acc /= int(i as i64 + 1);
    }
    acc
}

pub fn pow(r: &Rational, e: u64) -> Rational {
    num_traits::pow::pow(r.clone(), e as usize)
}

pub fn powi(r: &Rational, e: i64) -> Rational {
    if e >= 0 {
        pow(r, e as u64)
    } else {
        pow(&r.recip(), e.unsigned_abs())
    }
}

/// `floor(r + 1/2)`.
pub fn round_half_up(r: &Rational) -> BigInt {
    (r + frac(1, 2)).floor().to_integer()
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// Splits `|r|` into a 64-bit-ish integer mantissa and a binary exponent.
fn mantissa_exponent(r: &Rational) -> (f64, i64) {
    let n: BigUint = r.numer().magnitude().clone();
    let d: BigUint = r.denom().magnitude().clone();
    let shift = 64 - (n.bits() as i64 - d.bits() as i64);
    let q = if shift >= 0 {
        (n << shift as u64) / d
    } else {
        n / (d << (-shift) as u64)
    };
    (q.to_f64().unwrap_or(f64::INFINITY), -shift)
}

pub fn ratio_to_f64(r: &Rational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let (m, e) = mantissa_exponent(r);
    let v = ldexp(m, e);
    if r.is_negative() {
        -v
    } else {
        v
    }
}

/// Natural log of a positive rational without overflowing through f64.
pub fn ln_ratio(r: &Rational) -> f64 {
    if !r.is_positive() {
        return f64::NEG_INFINITY;
    }
    let (m, e) = mantissa_exponent(r);
    m.ln() + e as f64 * std::f64::consts::LN_2
}

pub fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// ln C(m + k - 1, k) for real m > 0.
pub fn ln_multichoose(m: f64, k: u64) -> f64 {
    (0..k).map(|i| ((m + i as f64) / (i as f64 + 1.0)).ln()).sum()
}

/// ln C(m, k) for real m; `-inf` when the coefficient vanishes.
pub fn ln_binomial(m: f64, k: u64) -> f64 {
    let mut acc = 0.0;
    for i in 0..k {
        let num = m - i as f64;
        if num <= 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += (num / (i as f64 + 1.0)).ln();
    }
    acc
}

/// `ln(e^a + e^b)` with `-inf` as the additive identity.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"n"`, `"n/d"` or, when `allow_decimal`, a plain decimal like `"0.25"`.
pub fn parse_rational(text: &str, allow_decimal: bool) -> Result<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Domain("empty number".into()));
    }
    let bad = || Error::Domain(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Domain(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Ok(n) = BigInt::from_str(s) {
        return Ok(Rational::from_integer(n));
    }
    if s.contains('.') || s.contains('e') || s.contains('E') {
        if !allow_decimal {
            return Err(Error::Domain(format!(
                "decimal {s:?} is only accepted in float mode; write it as num/den"
            )));
        }
        return parse_decimal(s).ok_or_else(bad);
    }
    Err(bad())
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (sign, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, fracpart) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && fracpart.is_empty() {
        return None;
    }
    let digits = format!("{whole}{fracpart}");
    let n = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
    let scale = exp - fracpart.len() as i64;
    let ten = int(10);
    Some(Rational::from_integer(n * sign) * powi(&ten, scale))
}

pub fn is_nonnegative_integer(r: &Rational) -> bool {
    r.is_integer() && !r.is_negative()
}

pub fn to_bigint(r: &Rational) -> Option<BigInt> {
    r.is_integer().then(|| r.numer().clone())
}

/// Size in bits of a rational, numerator plus denominator.
pub fn bit_size(r: &Rational) -> u64 {
    r.numer().bits() + r.denom().bits()
}

pub fn gcd_all(values: impl IntoIterator<Item = usize>) -> usize {
    values.into_iter().fold(0usize, |g, v| g.gcd(&v))
}

pub fn sign_of(r: &Rational) -> Sign {
    r.numer().sign()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_and_rejects_decimals_in_exact_mode() {
        assert_eq!(parse_rational("3/6", false).unwrap(), frac(1, 2));
        assert_eq!(parse_rational("-7", false).unwrap(), int(-7));
        assert!(parse_rational("0.5", false).is_err());
        assert_eq!(parse_rational("0.5", true).unwrap(), frac(1, 2));
        assert_eq!(parse_rational("1.25e2", true).unwrap(), int(125));
        assert!(parse_rational("1/0", false).is_err());
        assert!(parse_rational("abc", true).is_err());
    }

    #[test]
    fn float_conversion_handles_huge_and_tiny() {
        let big = pow(&int(2), 5000) / int(3);
        assert!(ratio_to_f64(&big).is_infinite());
        let ln = ln_ratio(&big);
        assert!((ln - (5000.0 * std::f64::consts::LN_2 - 3f64.ln())).abs() < 1e-9);
        assert!((ratio_to_f64(&frac(1, 3)) - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(ratio_to_f64(&frac(-5, 4)), -1.25);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(&BigInt::from(5), 2), BigInt::from(10));
        assert_eq!(binomial(&BigInt::from(3), 4), BigInt::zero());
        assert_eq!(multichoose(&int(2), 3), int(4));
        assert_eq!(round_half_up(&frac(5, 2)), BigInt::from(3));
        assert_eq!(round_half_up(&frac(7, 3)), BigInt::from(2));
    }

    #[test]
    fn log_add_matches_direct() {
        let v = log_add(2f64.ln(), 3f64.ln());
        assert!((v - 5f64.ln()).abs() < 1e-15);
        assert_eq!(log_add(f64::NEG_INFINITY, 1.0), 1.0);
    }
}
