//! Natural continuation in the detuning a with warm starts and step halving.

use serde::Serialize;
use unpin_core::kernels::KernelSpec;
use unpin_core::scalar::{of, to64, Real};
use unpin_core::{Error, Nonlinearity, Result};

use crate::newton::{newton_wave, NewtonOptions, SpectralWorkspace};
use crate::{Guess, WaveSolution};

#[derive(Debug, Clone, Copy)]
pub struct ContinuationOptions<T> {
    pub newton: NewtonOptions<T>,
    /// Smallest step in a before giving up on a target.
    pub min_step: T,
    /// Continuation stops once the speed falls below this.
    pub c_floor: T,
    /// Speed guess for the first target.
    pub c_guess: T,
}

impl<T: Real> Default for ContinuationOptions<T> {
    fn default() -> Self {
        Self { newton: NewtonOptions::default(), min_step: of(1e-7), c_floor: of(1e-8), c_guess: of(0.01) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopReason {
    Completed,
    /// The speed dropped below the floor: the pinning region has been reached.
    SpeedFloor { a: f64, c: f64 },
    StepUnderflow { a: f64, target: f64, reason: String },
}

#[derive(Debug, Clone)]
pub struct ContinuationRun<T> {
    /// One solution per reached target, in path order.
    pub solutions: Vec<WaveSolution<T>>,
    pub stop: StopReason,
}

/// Speed guess from the last two accepted points, extrapolating c^{2/3}
/// linearly in a (exact for a 3/2 law) and never dropping below a third.
fn predict<T: Real>(hist: &[(T, T)], a: T) -> Option<T> {
    let [(a1, c1), (a2, c2)] = hist[hist.len().checked_sub(2)?..] else { return None };
    if !(c1 > T::zero() && c2 > T::zero()) || a1 == a2 {
        return None;
    }
    let p = of::<T>(2.0 / 3.0);
    let (s1, s2) = (c1.powf(p), c2.powf(p));
    let s = s2 + (s2 - s1) * (a - a2) / (a2 - a1);
    Some(s.max(s2 * of(0.3)).powf(of(1.5)))
}

pub fn continuation<T: Real>(
    kernel: &KernelSpec,
    nl: &Nonlinearity<T>,
    d: T,
    a_path: &[T],
    opts: &ContinuationOptions<T>,
) -> Result<ContinuationRun<T>> {
    let Some(&first) = a_path.first() else {
        return Err(Error::Parameter("empty continuation path".into()));
    };
    let spectral = match kernel.rational_order() {
        Some(_) if !opts.newton.force_spectral => None,
        _ => Some(SpectralWorkspace::new(kernel, &opts.newton)?),
    };
    let solve = |a: T, guess: &Guess<T>| match &spectral {
        Some(ws) => ws.solve(&nl.with_a(a), d, guess, &opts.newton),
        None => newton_wave(kernel, &nl.with_a(a), d, guess, &opts.newton),
    };
    let mut last = solve(first, &Guess::tanh(opts.c_guess))?;
    let mut hist = vec![(first, last.c)];
    let mut out = vec![last.clone()];
    if last.c < opts.c_floor {
        return Ok(ContinuationRun { solutions: out, stop: StopReason::SpeedFloor { a: to64(first), c: to64(last.c) } });
    }
    for &target in &a_path[1..] {
        let mut step = target - last.a;
        while last.a != target {
            let a_try = if (target - last.a).abs() <= step.abs() { target } else { last.a + step };
            let c_pred = predict(&hist, a_try).unwrap_or(last.c);
            match solve(a_try, &Guess::from_solution(&last).with_c(c_pred)) {
                Ok(s) => {
                    hist.push((a_try, s.c));
                    last = s;
                    step = step * of(2.0);
                }
                Err(e) => {
                    step = step * of(0.5);
                    if step.abs() < opts.min_step {
                        let stop = StopReason::StepUnderflow { a: to64(last.a), target: to64(target), reason: e.to_string() };
                        return Ok(ContinuationRun { solutions: out, stop });
                    }
                }
            }
        }
        out.push(last.clone());
        if last.c < opts.c_floor {
            return Ok(ContinuationRun { solutions: out, stop: StopReason::SpeedFloor { a: to64(target), c: to64(last.c) } });
        }
    }
    Ok(ContinuationRun { solutions: out, stop: StopReason::Completed })
}
