//! Scalar abstraction: the numeric kernels are generic over `Real`,
//! implemented for `f32` and `f64`.

use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar usable throughout the library.
///
/// Extends nalgebra's `RealField` with the complementary error function,
/// which the Gaussian tail computations need.
pub trait Real: nalgebra::RealField + FromPrimitive + ToPrimitive + Copy + Send + Sync {
    fn erfc(self) -> Self;
}

impl Real for f64 {
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

impl Real for f32 {
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}

/// Shorthand for lifting an `f64` literal into the generic scalar type.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}
