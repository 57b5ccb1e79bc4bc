use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

/// Scalar type the model computes in. Implemented for `f32` and `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Total order as defined by IEEE 754 `totalOrder`. Scores fed through
    /// this are finite by construction; the total order only settles ties.
    fn total_cmp(&self, other: &Self) -> Ordering;
}

impl Real for f32 {
    fn total_cmp(&self, other: &Self) -> Ordering {
        f32::total_cmp(self, other)
    }
}

impl Real for f64 {
    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }
}

/// Converts an `f64` constant into the working scalar type.
pub fn real<S: Real>(x: f64) -> S {
    S::from_f64(x).expect("f64 constant must be representable")
}

/// Converts the working scalar into `f64` for reporting.
pub fn to_f64<S: Real>(x: S) -> f64 {
    x.to_f64().expect("scalar must convert to f64")
}
