//! Travelling fronts c u′ + d(K∗u − u) + f_a(u) = 0 connecting u = 1 (left)
//! to u = 0 (right); c > 0 means the front moves right.

pub mod continuation;
pub mod mesh;
pub mod newton;
pub mod shoot;

use serde::Serialize;
use unpin_core::kernels::{reference_front, KernelSpec};
use unpin_core::scalar::{to64, Real};

pub use continuation::{continuation, ContinuationOptions, ContinuationRun, StopReason};
pub use newton::{newton_wave, NewtonOptions};
pub use shoot::{shoot_2d, shoot_3d, solve_speed_2d, solve_speed_3d, ShootOptions, ShootState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Newton,
    Shoot2d,
    Shoot3d,
}

#[derive(Debug, Clone)]
pub struct WaveSolution<T> {
    pub x: Vec<T>,
    pub u: Vec<T>,
    /// K∗u on the same nodes, when the solver carries it explicitly.
    pub w: Option<Vec<T>>,
    pub c: T,
    /// Max-norm of the front equation over interior nodes.
    pub residual: T,
    pub method: Method,
    pub kernel: KernelSpec,
    pub a: T,
    pub d: T,
    /// False when the profile rises by more than 1e−6 anywhere.
    pub monotone: bool,
    pub iterations: usize,
}

impl<T: Real> WaveSolution<T> {
    pub fn summary(&self) -> Summary {
        Summary {
            kernel: self.kernel.name(),
            a: to64(self.a),
            d: to64(self.d),
            c: to64(self.c),
            residual: to64(self.residual),
            method: self.method,
            nodes: self.x.len(),
            monotone: self.monotone,
            iterations: self.iterations,
        }
    }
}

/// Serializable scalar part of a solution.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub kernel: String,
    pub a: f64,
    pub d: f64,
    pub c: f64,
    pub residual: f64,
    pub method: Method,
    pub nodes: usize,
    pub monotone: bool,
    pub iterations: usize,
}

/// Starting point for Newton: either the smooth tanh front or samples of a
/// previous solution.
#[derive(Debug, Clone)]
pub struct Guess<T> {
    pub profile: Profile<T>,
    pub c: T,
}

#[derive(Debug, Clone)]
pub enum Profile<T> {
    Tanh,
    Samples { x: Vec<T>, u: Vec<T>, w: Option<Vec<T>> },
}

impl<T: Real> Guess<T> {
    pub fn tanh(c: T) -> Self {
        Self { profile: Profile::Tanh, c }
    }

    pub fn from_solution(s: &WaveSolution<T>) -> Self {
        Self { profile: Profile::Samples { x: s.x.clone(), u: s.u.clone(), w: s.w.clone() }, c: s.c }
    }

    pub fn with_c(mut self, c: T) -> Self {
        self.c = c;
        self
    }

    /// Profile values at `xs`; `shift` moves the tanh guess's centre.
    pub(crate) fn sample(&self, xs: &[T], shift: T) -> (Vec<T>, Option<Vec<T>>) {
        match &self.profile {
            Profile::Tanh => (xs.iter().map(|&x| reference_front(x - shift)).collect(), None),
            Profile::Samples { x, u, w } => {
                (mesh::resample(x, u, xs), w.as_ref().map(|w| mesh::resample(x, w, xs)))
            }
        }
    }
}

pub(crate) fn is_monotone<T: Real>(u: &[T]) -> bool {
    let tol = unpin_core::scalar::of::<T>(1e-6);
    u.windows(2).all(|p| p[1] - p[0] <= tol)
}

pub type WaveSolution64 = WaveSolution<f64>;
pub type WaveSolution32 = WaveSolution<f32>;
pub type NewtonOptions64 = NewtonOptions<f64>;
pub type Guess64 = Guess<f64>;
