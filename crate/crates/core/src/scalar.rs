//! Scalar abstraction shared by the numerical kernels.
//!
//! The series transforms and the least-squares kernel are written once over
//! [`Scalar`] and instantiated for `f32` and `f64`. Estimators, tests and the
//! Monte Carlo harness work in `f64` throughout.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real floating-point type usable by the generic kernels.
///
/// Both `nalgebra::RealField` and `num_traits::Float` define methods such as
/// `sqrt` and `abs`; generic code calls them through `Float::` explicitly.
pub trait Scalar:
    RealField + Float + FromPrimitive + ToPrimitive + Copy + Default + Debug + Display + Send + Sync
{
    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 is representable")
    }

    fn of_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize is representable")
    }

    fn as_f64(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).expect("scalar converts to f64")
    }

    /// Relative tolerance below which a singular value counts as zero.
    fn rank_tolerance() -> Self;
}

impl Scalar for f64 {
    fn rank_tolerance() -> Self {
        1e-10
    }
}

impl Scalar for f32 {
    fn rank_tolerance() -> Self {
        1e-5
    }
}
