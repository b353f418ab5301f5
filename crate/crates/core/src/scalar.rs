//! Field abstraction shared by the exact (rational) and floating-point
//! module constructions.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::{BigRational, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Arithmetic needed by the Gram/quotient construction.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    /// Whether pivots are decided exactly.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    /// Relative threshold below which a pivot counts as zero.
    fn is_negligible(&self, scale: &Self) -> bool;
    fn is_zero(&self) -> bool;
    fn abs(&self) -> Self;
    /// Total order used for pivot selection.
    fn gt(&self, other: &Self) -> bool;
    /// Optional fast row-major product `a (r×k) * b (k×c)`.
    fn gemm(_r: usize, _k: usize, _c: usize, _a: &[Self], _b: &[Self]) -> Option<Vec<Self>> {
        None
    }
}

/// Relative pivot tolerance for floating-point rank decisions.
pub const FLOAT_RANK_TOL: f64 = 1e-10;

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_negligible(&self, scale: &Self) -> bool {
        f64::abs(*self) <= FLOAT_RANK_TOL * scale.max(1e-300)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn gt(&self, other: &Self) -> bool {
        self > other
    }
    fn gemm(r: usize, k: usize, c: usize, a: &[Self], b: &[Self]) -> Option<Vec<Self>> {
        let am = nalgebra::DMatrix::from_row_slice(r, k, a);
        let bm = nalgebra::DMatrix::from_row_slice(k, c, b);
        let p = am * bm;
        // back to row-major
        Some(p.transpose().as_slice().to_vec())
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        <Rational as Zero>::zero()
    }
    fn one() -> Self {
        <Rational as num::One>::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_negligible(&self, _scale: &Self) -> bool {
        Zero::is_zero(self)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn gt(&self, other: &Self) -> bool {
        self > other
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Parses "p/q", integers, or finite decimals into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(rat(n, d));
    }
    if let Ok(n) = s.parse::<i64>() {
        return Some(rat_int(n));
    }
    let x: f64 = s.parse().ok()?;
    decimal_to_rational(x)
}

/// Converts a float with a short decimal expansion (e.g. 0.5, -1.25) exactly.
pub fn decimal_to_rational(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    for digits in 0..=9u32 {
        let scale = 10f64.powi(digits as i32);
        let scaled = x * scale;
        if (scaled - scaled.round()).abs() < 1e-9 {
            return Some(rat(scaled.round() as i64, 10i64.pow(digits)));
        }
    }
    None
}
