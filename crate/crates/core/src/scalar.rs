//! Scalar abstraction for the MILP engine.
//!
//! The simplex and branch-and-bound code is written once against [`Scalar`] and
//! instantiated for `f64`, `f32` and the exact [`BigRational`]. Exact types
//! report zero tolerances, so every comparison in the solver becomes exact.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + Display + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// True for types with exact arithmetic.
    const EXACT: bool;

    fn floor(&self) -> Self;
    fn ceil(&self) -> Self;
    /// Nearest integer, halves away from zero.
    fn round(&self) -> Self;
    fn is_finite(&self) -> bool;

    /// Threshold below which pivot elements and reduced costs count as zero.
    fn pivot_epsilon() -> Self;

    /// Converts a user tolerance into this scalar. Exact types ignore it.
    fn tolerance(tol: f64) -> Self {
        if Self::EXACT {
            Self::zero()
        } else {
            Self::from_f64(tol).unwrap_or_else(Self::zero)
        }
    }

    fn from_i64_exact(v: i64) -> Self {
        Self::from_i64(v).expect("every scalar represents small integers")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn floor(&self) -> Self {
        f64::floor(*self)
    }
    fn ceil(&self) -> Self {
        f64::ceil(*self)
    }
    fn round(&self) -> Self {
        f64::round(*self)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn pivot_epsilon() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;
    fn floor(&self) -> Self {
        f32::floor(*self)
    }
    fn ceil(&self) -> Self {
        f32::ceil(*self)
    }
    fn round(&self) -> Self {
        f32::round(*self)
    }
    fn is_finite(&self) -> bool {
        f32::is_finite(*self)
    }
    fn pivot_epsilon() -> Self {
        1e-5
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    fn floor(&self) -> Self {
        BigRational::floor(self)
    }
    fn ceil(&self) -> Self {
        BigRational::ceil(self)
    }
    fn round(&self) -> Self {
        BigRational::round(self)
    }
    fn is_finite(&self) -> bool {
        true
    }
    fn pivot_epsilon() -> Self {
        BigRational::zero()
    }
}

/// Shorthand for building an exact rational from an integer ratio.
pub fn ratio(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}
