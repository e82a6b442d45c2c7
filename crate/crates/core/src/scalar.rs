//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating-point scalar the optimizer is generic over.
///
/// Implemented for `f32` and `f64`. Interior-point tolerances are pinned per
/// type through [`Real::solver_tol`]; everything else is expressed through
/// [`Real::lit`] conversions from `f64` literals.
pub trait Real:
    RealField
    + Copy
    + FromPrimitive
    + ToPrimitive
    + Default
    + fmt::Debug
    + fmt::Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Feasibility / optimality tolerance used by the conic solver.
    fn solver_tol() -> Self;

    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }
}

impl Real for f64 {
    fn solver_tol() -> Self {
        1e-8
    }
}

impl Real for f32 {
    fn solver_tol() -> Self {
        2e-4
    }
}

/// Complex scalar over a [`Real`].
pub type Cplx<T> = nalgebra::Complex<T>;

#[inline]
pub(crate) fn cabs<T: Real>(z: Cplx<T>) -> T {
    z.re.hypot(z.im)
}

#[inline]
pub(crate) fn carg<T: Real>(z: Cplx<T>) -> T {
    z.im.atan2(z.re)
}

#[inline]
pub(crate) fn polar<T: Real>(r: T, theta: T) -> Cplx<T> {
    Cplx::new(r * theta.cos(), r * theta.sin())
}
