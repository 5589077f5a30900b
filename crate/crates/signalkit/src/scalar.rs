//! Scalar abstraction for the LP engine.
//!
//! The simplex solver is generic over the entry type so the same code runs
//! in `f64` (the default everywhere) and in exact rationals (used by test
//! oracles and by the gadget parameter identities, where float gaps like
//! `1/(2n^8)` are too small to trust).

use num_rational::BigRational;
use num_traits::{Num, Signed};
use std::fmt::Debug;

/// Entry type accepted by the dense simplex solver.
pub trait LpScalar: Num + Signed + Clone + PartialOrd + Debug + 'static {
    fn from_f64_approx(v: f64) -> Self;
    fn to_f64_approx(&self) -> f64;

    /// Magnitudes at or below this threshold are treated as zero when
    /// selecting pivots. Zero for exact types.
    fn pivot_tol() -> Self;
}

impl LpScalar for f64 {
    fn from_f64_approx(v: f64) -> Self {
        v
    }

    fn to_f64_approx(&self) -> f64 {
        *self
    }

    fn pivot_tol() -> Self {
        1e-9
    }
}

impl LpScalar for BigRational {
    fn from_f64_approx(v: f64) -> Self {
        BigRational::from_float(v).expect("finite float")
    }

    fn to_f64_approx(&self) -> f64 {
        let n = self.numer();
        let d = self.denom();
        // Falls back to a digit-count split for values outside f64 range.
        use num_traits::ToPrimitive;
        match (n.to_f64(), d.to_f64()) {
            (Some(nf), Some(df)) if df != 0.0 && nf.is_finite() && df.is_finite() => nf / df,
            _ => {
                let s = self.to_string();
                s.parse().unwrap_or(f64::NAN)
            }
        }
    }

    fn pivot_tol() -> Self {
        BigRational::from_integer(0.into())
    }
}
