//! Scalar abstraction shared by the exact (rational) and floating-point paths.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, NumAssignRef, NumRef, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational number, always stored in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

/// Absolute threshold below which an `f64` is treated as zero when pivoting.
pub const F64_PIVOT_EPS: f64 = 1e-12;

pub trait Scalar:
    Clone + Debug + PartialOrd + NumRef + NumAssignRef + Signed + Send + Sync + 'static
{
    /// Whether arithmetic is exact.
    const EXACT: bool;

    /// Exact conversion for rationals; panics on non-finite input.
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn from_i64(v: i64) -> Self;

    /// Zero for pivoting and sign decisions.
    fn is_negligible(&self) -> bool;

    fn is_pos(&self) -> bool {
        !self.is_negligible() && *self > Self::zero()
    }

    fn is_neg(&self) -> bool {
        !self.is_negligible() && *self < Self::zero()
    }

    fn from_ratio(p: i64, q: i64) -> Self {
        Self::from_i64(p) / Self::from_i64(q)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= F64_PIVOT_EPS
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("non-finite float cannot be made rational")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // Huge numerator/denominator pairs overflow the direct conversion.
            let shift = self.numer().bits().max(self.denom().bits()) as i64 - 900;
            if shift <= 0 {
                return f64::NAN;
            }
            let n = self.numer() >> shift as usize;
            let d = self.denom() >> shift as usize;
            n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
        })
    }

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
}

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Parses `"p/q"`, an integer, or a finite decimal literal such as `"0.125"`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::InvalidInput(format!("not a rational literal: {text:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Ok(p) = BigInt::from_str(s) {
        return Ok(Rational::from_integer(p));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').ok_or_else(bad)?;
    let digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if digits == "-" || digits.is_empty() { "0" } else { &digits })
        .map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    Ok(if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    })
}

/// Nearest multiple of `2^-bits`.
pub fn round_dyadic(x: &Rational, bits: u32) -> Rational {
    let scale = BigInt::one() << bits as usize;
    let scaled = x * Rational::from_integer(scale.clone());
    let two = BigInt::from(2);
    // round half away from zero
    let (q, r) = scaled.numer().div_rem(scaled.denom());
    let twice = r.abs() * &two;
    let q = if twice >= *scaled.denom() {
        if scaled.is_negative() {
            q - 1
        } else {
            q + 1
        }
    } else {
        q
    };
    Rational::new(q, scale)
}

/// Rational approximation of a float on the dyadic grid `2^-bits`.
pub fn dyadic_from_f64(v: f64, bits: u32) -> Rational {
    let scaled = (v * f64::from(2u32).powi(bits as i32)).round();
    Rational::new(
        BigInt::from_f64(scaled).expect("finite float"),
        BigInt::one() << bits as usize,
    )
}

pub fn format_rational(x: &Rational) -> String {
    x.to_string()
}
