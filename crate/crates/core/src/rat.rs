//! Exact rationals.
//!
//! [`Rat`] is an arbitrary-precision fraction kept in lowest terms with a
//! positive denominator. Every algorithm in this crate works on `Rat`; there
//! is no floating-point path.

use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `num / den`, reduced. Panics on a zero denominator.
pub fn frac(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

/// `2^e` for any integer exponent.
pub fn pow2(e: i32) -> Rat {
    let base = int(2);
    if e >= 0 {
        num_traits::pow(base, e as usize)
    } else {
        num_traits::pow(base, e.unsigned_abs() as usize).recip()
    }
}

/// Parses `int`, `int/int` or an exact decimal `[-]d.ddd`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(alloc::format!("not a rational number: `{s}`"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_int(num).ok_or_else(bad)?;
        let den = parse_int(den).ok_or_else(bad)?;
        if !den.is_positive() {
            return Err(bad());
        }
        return Ok(Rat::new(num, den));
    }
    if let Some((whole, fracpart)) = s.split_once('.') {
        if fracpart.is_empty() || !fracpart.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let digits = whole.trim_start_matches(['-', '+']);
        if !(digits.is_empty() || digits.bytes().all(|c| c.is_ascii_digit())) {
            return Err(bad());
        }
        let mut all = String::from(digits);
        all.push_str(fracpart);
        let mut num = BigInt::from_str(&all).map_err(|_| bad())?;
        if negative {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), fracpart.len());
        return Ok(Rat::new(num, den));
    }
    parse_int(s).map(Rat::from_integer).ok_or_else(bad)
}

fn parse_int(s: &str) -> Option<BigInt> {
    let s = s.trim();
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
        return None;
    }
    BigInt::from_str(s).ok()
}

/// Comma-separated list of rationals.
pub fn parse_rat_list(s: &str) -> Result<Vec<Rat>> {
    s.split(',').map(parse_rat).collect()
}

/// Always `num/den`, even for integers.
pub fn to_fraction_string(r: &Rat) -> String {
    alloc::format!("{}/{}", r.numer(), r.denom())
}

pub fn max_abs_diff(u: &[Rat], v: &[Rat]) -> Rat {
    u.iter()
        .zip(v)
        .map(|(x, y)| (x - y).abs())
        .max()
        .unwrap_or_else(Rat::zero)
}

pub fn median01(v: &Rat) -> Rat {
    if v.is_negative() {
        Rat::zero()
    } else if *v > Rat::one() {
        Rat::one()
    } else {
        v.clone()
    }
}
