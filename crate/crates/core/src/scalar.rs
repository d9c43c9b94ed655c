//! Scalar fields used by the polynomial layer: double-precision complex
//! numbers and exact Gaussian rationals.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};

/// Exact complex rational number `a + b i` with `a, b` in Q.
pub type Exact = Complex<BigRational>;

/// Field operations needed by the polynomial recurrences and identities.
pub trait Scalar: Clone + Debug + PartialEq + Num + Neg<Output = Self> + Send + Sync {
    fn from_i64(n: i64) -> Self;
    fn to_c64(&self) -> Complex64;
    /// Magnitude used for residual reporting.
    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }
}

impl Scalar for Complex64 {
    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
}

impl Scalar for Exact {
    fn from_i64(n: i64) -> Self {
        Complex::new(BigRational::from_integer(n.into()), BigRational::zero())
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(ratio_to_f64(&self.re), ratio_to_f64(&self.im))
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `(-1)^n` as a scalar.
pub fn sign_pow<S: Scalar>(n: i64) -> S {
    if n.rem_euclid(2) == 0 {
        S::one()
    } else {
        -S::one()
    }
}

/// Parses a rational number written as an integer, a fraction `a/b`, or a
/// decimal with optional exponent (`-0.25`, `1.5e-3`).
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d.is_zero() {
            return None;
        }
        return Some(n / d);
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut num: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().ok()? };
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Parses an exact complex number: `a`, `a+bi`, `a-bi`, `bi`, `i`, where
/// `a` and `b` follow [`parse_rational`].
pub fn parse_exact(s: &str) -> Option<Exact> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    if !s.ends_with(['i', 'j']) {
        return Some(Complex::new(parse_rational(&s)?, BigRational::zero()));
    }
    let body = &s[..s.len() - 1];
    // split at the last sign that is not part of an exponent or the leading sign
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        let c = bytes[k];
        if (c == b'+' || c == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => BigRational::one(),
        "-" => -BigRational::one(),
        other => parse_rational(other)?,
    };
    Some(Complex::new(parse_rational(re)?, im))
}

/// Parses a complex number in the same syntax as [`parse_exact`].
pub fn parse_complex(s: &str) -> Option<Complex64> {
    parse_exact(s).map(|e| e.to_c64())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("0.5"), Some(q(1, 2)));
        assert_eq!(parse_rational("-0.25"), Some(q(-1, 4)));
        assert_eq!(parse_rational("3/6"), Some(q(1, 2)));
        assert_eq!(parse_rational("1.5e-3"), Some(q(3, 2000)));
        assert_eq!(parse_rational("2E2"), Some(q(200, 1)));
        assert_eq!(parse_rational(".5"), Some(q(1, 2)));
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_exact("1+0.5i"), Some(Complex::new(q(1, 1), q(1, 2))));
        assert_eq!(parse_exact("-2i"), Some(Complex::new(q(0, 1), q(-2, 1))));
        assert_eq!(parse_exact("i"), Some(Complex::new(q(0, 1), q(1, 1))));
        assert_eq!(parse_exact("1e-1-i"), Some(Complex::new(q(1, 10), q(-1, 1))));
        assert_eq!(parse_exact("-1.5"), Some(Complex::new(q(-3, 2), q(0, 1))));
    }
}
