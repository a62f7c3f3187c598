use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::AddAssign;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the numeric code is generic over.
///
/// Implemented for `f32` and `f64`. Index computation, regression fitting and
/// trajectory smoothing all accept any `Scalar`; the crate root exports
/// concrete `f64`/`f32` aliases for the main data types.
pub trait Scalar:
    Float + FromPrimitive + AddAssign + Sum<Self> + Debug + Display + Send + Sync + 'static
{
    /// Cast an `f64` constant into the scalar type (lossy for `f32`).
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant not representable")
    }

    /// Cast a count into the scalar type.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
