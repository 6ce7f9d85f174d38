use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, Num, Signed};

/// Floating-point scalar used by the dynamics: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Lossless enough conversion for literals and configuration values.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Ordered field used by the linear algebra helpers.
///
/// Implemented for the floats and for exact rationals, so the same elimination
/// code computes exact ranks and determinants.
pub trait Field: Num + Signed + Clone + PartialOrd + FromPrimitive + Debug {}

impl<T> Field for T where T: Num + Signed + Clone + PartialOrd + FromPrimitive + Debug {}

/// Build a field element from a signed integer.
pub fn int<T: Field>(v: i64) -> T {
    T::from_i64(v).expect("integer representable in field")
}
