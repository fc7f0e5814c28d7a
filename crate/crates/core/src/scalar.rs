//! Numeric backends and the extended nonnegative reals.
//!
//! Two backends implement [`Scalar`]: `f64` (the default) and the exact
//! [`Rational`] type built on arbitrary-precision integers. Polynomial
//! quantities (total variation, integer-order Tsallis, Gini-Simpson) are exact
//! in the rational backend; anything involving logarithms is float-only.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Exact rational numbers.
pub type Rational = BigRational;

/// Tolerance for stochasticity validation in the float backend.
pub const STOCH_EPS: f64 = 1e-9;

/// Scale used to quantize generator weights into integers for the exact backend.
const WEIGHT_SCALE: f64 = 65536.0;

/// A numeric backend for probabilities.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + ToPrimitive + FromPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// True for backends without rounding.
    const EXACT: bool;
    /// Human readable backend name.
    const BACKEND: &'static str;

    /// Allowed deviation of a probability vector's total from one.
    fn stoch_eps() -> Self;

    /// Finite and not NaN.
    fn is_valid(&self) -> bool;

    /// Turns nonnegative generator weights (not all zero) into a probability vector.
    fn from_weights(weights: &[f64]) -> Vec<Self>;

    /// Absolute slack granted to an inequality `lhs <= rhs`.
    fn slack_allowance(rhs: &Self, tol: f64) -> Self;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const BACKEND: &'static str = "float";

    fn stoch_eps() -> Self {
        STOCH_EPS
    }

    fn is_valid(&self) -> bool {
        self.is_finite()
    }

    fn from_weights(weights: &[f64]) -> Vec<Self> {
        let total: f64 = weights.iter().sum();
        weights.iter().map(|w| w / total).collect()
    }

    fn slack_allowance(rhs: &Self, tol: f64) -> Self {
        tol * rhs.abs().max(1.0)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;
    const BACKEND: &'static str = "rational";

    fn stoch_eps() -> Self {
        Rational::new(BigInt::from(1), BigInt::from(1_000_000_000u64))
    }

    fn is_valid(&self) -> bool {
        true
    }

    fn from_weights(weights: &[f64]) -> Vec<Self> {
        let ints: Vec<u64> = weights
            .iter()
            .map(|&w| {
                if w > 0.0 {
                    ((w * WEIGHT_SCALE).round() as u64).max(1)
                } else {
                    0
                }
            })
            .collect();
        let total = BigInt::from(ints.iter().sum::<u64>());
        ints.into_iter()
            .map(|k| Rational::new(BigInt::from(k), total.clone()))
            .collect()
    }

    fn slack_allowance(_rhs: &Self, _tol: f64) -> Self {
        Rational::zero()
    }
}

/// Parses `"num/den"`, an integer, or a plain decimal like `"0.125"` exactly.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let negative = int_part.starts_with('-');
    let int_digits = int_part.trim_start_matches(['-', '+']);
    if int_digits.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_digits}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut num: BigInt = digits.parse().ok()?;
    if negative {
        num = -num;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        Rational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

/// A value in `[0, +∞]` (or a signed value where noted), never NaN.
#[derive(Clone, Debug, PartialEq)]
pub enum Ext<S> {
    Finite(S),
    Infinite,
}

/// Extended reals over the float backend.
pub type ExtReal = Ext<f64>;

impl<S: Scalar> Ext<S> {
    pub fn zero() -> Self {
        Ext::Finite(S::zero())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Ext::Infinite)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_infinite()
    }

    pub fn finite(&self) -> Option<&S> {
        match self {
            Ext::Finite(v) => Some(v),
            Ext::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Ext::Finite(v) => v.to_f64_lossy(),
            Ext::Infinite => f64::INFINITY,
        }
    }

    /// `lhs <= rhs` up to the backend's slack; `∞ <= ∞` holds, `∞ <= finite` fails.
    pub fn le_within(&self, rhs: &Self, tol: f64) -> bool {
        match (self, rhs) {
            (_, Ext::Infinite) => true,
            (Ext::Infinite, Ext::Finite(_)) => false,
            (Ext::Finite(l), Ext::Finite(r)) => l.clone() <= r.clone() + S::slack_allowance(r, tol),
        }
    }

    /// `rhs - self` when both are finite.
    pub fn gap_to(&self, rhs: &Self) -> Option<S> {
        match (self, rhs) {
            (Ext::Finite(l), Ext::Finite(r)) => Some(r.clone() - l.clone()),
            _ => None,
        }
    }

    /// The larger of the two; on ties the receiver wins.
    pub fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl ExtReal {
    /// Maps `+∞` to [`Ext::Infinite`]. Panics on NaN in debug builds.
    pub fn from_f64(x: f64) -> Self {
        debug_assert!(!x.is_nan(), "NaN is not an extended real");
        if x == f64::INFINITY {
            Ext::Infinite
        } else {
            Ext::Finite(x)
        }
    }
}

impl<S: Scalar> Add for Ext<S> {
    type Output = Ext<S>;

    fn add(self, rhs: Self) -> Self::Output {
        match (self, rhs) {
            (Ext::Finite(a), Ext::Finite(b)) => Ext::Finite(a + b),
            _ => Ext::Infinite,
        }
    }
}

impl<S: Scalar> PartialOrd for Ext<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Ext::Infinite, Ext::Infinite) => Some(Ordering::Equal),
            (Ext::Infinite, Ext::Finite(_)) => Some(Ordering::Greater),
            (Ext::Finite(_), Ext::Infinite) => Some(Ordering::Less),
            (Ext::Finite(a), Ext::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl<S: fmt::Display> fmt::Display for Ext<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::Finite(v) => v.fmt(f),
            Ext::Infinite => f.write_str("inf"),
        }
    }
}
