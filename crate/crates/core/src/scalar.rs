//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + 'static
{
    /// Lossless widening used by serialization and reporting.
    fn to_f64_lossless(self) -> f64;

    /// Relative threshold below which an eigenvalue counts as numerically zero.
    ///
    /// `1e-10` for `f64`; widened to a few hundred ulps for narrower types.
    fn rank_tol() -> Self {
        let floor = lit::<Self>(1e-10);
        let ulps = Self::epsilon() * lit::<Self>(256.0);
        if ulps > floor {
            ulps
        } else {
            floor
        }
    }
}

impl Real for f32 {
    fn to_f64_lossless(self) -> f64 {
        f64::from(self)
    }
}

impl Real for f64 {
    fn to_f64_lossless(self) -> f64 {
        self
    }
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: FromPrimitive>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in target scalar")
}

/// Converts a count into `T`.
#[inline]
pub fn count<T: FromPrimitive>(n: usize) -> T {
    T::from_usize(n).expect("count representable in target scalar")
}
