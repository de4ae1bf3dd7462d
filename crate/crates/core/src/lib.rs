//! Pinning regions, unpinning asymptotics and the numerical building blocks
//! for nonlocal bistable fronts u_t = d(−u + K∗u) + f_a(u).

pub mod error;
pub mod kernels;
pub mod nonlinearity;
pub mod numerics;
pub mod pinning;
pub mod scalar;
pub mod slowfast;

pub use error::{Error, Result};
pub use kernels::{ConvScratch, Convolver, FrontConvolver, Grid, KernelSpec};
pub use nonlinearity::{Branch, Clip, Nonlinearity};
pub use scalar::Real;

pub type Nonlinearity64 = Nonlinearity<f64>;
pub type Nonlinearity32 = Nonlinearity<f32>;
pub type Grid64 = Grid<f64>;
pub type Grid32 = Grid<f32>;
pub type Convolver64 = Convolver<f64>;
pub type PinningBoundary64 = pinning::PinningBoundary<f64>;
pub type CuspData64 = pinning::CuspData<f64>;
pub type AsymptoticLaw64 = slowfast::AsymptoticLaw<f64>;
