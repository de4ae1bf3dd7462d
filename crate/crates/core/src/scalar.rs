use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Floating-point scalar accepted by every solver in the workspace.
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + NumAssign
        + FromPrimitive
        + ToPrimitive
        + FftNum
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Lossy conversion of an `f64` literal into `T`.
#[inline]
pub fn of<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable")
}

#[inline]
pub fn to64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// A tolerance no tighter than a few hundred ulps of `T`.
#[inline]
pub fn tol<T: Real>(want: f64) -> T {
    let floor = T::epsilon() * of(256.0);
    let t = of::<T>(want);
    if t < floor {
        floor
    } else {
        t
    }
}
