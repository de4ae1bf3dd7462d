//! Pinning-region boundaries in the (a, d) plane.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonlinearity::{eval_g, g_clipped_integral, g_da, g_decompose, g_integral, Clip, Nonlinearity};
use crate::numerics::quad::simpson;
use crate::numerics::roots::{bisect, brent, scan_brackets};
use crate::scalar::{of, to64, tol, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    AreaBalance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PinningBoundary<T> {
    pub d: T,
    pub a_minus: T,
    pub a_plus: T,
    pub provenance: Provenance,
    pub residual: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    OneToZero,
    ZeroToOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CuspData<T> {
    pub a_star: T,
    pub d_star: T,
    pub u_star: T,
    pub g3: T,
    pub g_ud: T,
    /// Opening coefficient with g_ud squared.
    pub a2: T,
    /// Same expression with g_ud to the first power.
    pub a2_unsquared: T,
    pub da_integral: T,
}

/// Cubic boundary d(a).
pub fn boundary_cubic<T: Real>(a: T) -> T {
    let one = T::one();
    let two = of::<T>(2.0);
    let root = if a <= of(0.5) { (one - two * a).sqrt() } else { (two * a - one).sqrt() };
    (one - a + a * a - root) / of(3.0)
}

/// Inverse of the cubic boundary: (a_−, a_+) at coupling d ∈ (0, 1/4].
pub fn boundary_cubic_inverse<T: Real>(d: T) -> Result<(T, T)> {
    let quarter = of::<T>(0.25);
    if !(d > T::zero()) || d > quarter {
        return Err(Error::OutsidePinningRegime { d: to64(d) });
    }
    // With s = √(1−2a): 12d = 3 + s⁴ − 4s, decreasing in s on [0, 1].
    let c = of::<T>(3.0) - of::<T>(12.0) * d;
    let phi = |s: T| s * s * s * s - of::<T>(4.0) * s + c;
    let s = if c <= T::zero() { T::zero() } else { brent(phi, T::zero(), T::one(), T::epsilon(), 200)? };
    let am = (T::one() - s * s) * of(0.5);
    Ok((am, T::one() - am))
}

pub fn boundary_pwl<T: Real>(a: T) -> T {
    if a <= of(0.5) {
        a / (T::one() - a)
    } else {
        (T::one() - a) / a
    }
}

pub fn boundary_pwl_inverse<T: Real>(d: T) -> Result<(T, T)> {
    if !(d > T::zero()) || d > T::one() {
        return Err(Error::OutsidePinningRegime { d: to64(d) });
    }
    Ok((d / (T::one() + d), T::one() / (T::one() + d)))
}

/// Largest d at which fronts of the given orientation stay pinned.
pub fn boundary_onesided<T: Real>(a: T, orientation: Orientation) -> T {
    let q = of::<T>(0.25);
    match orientation {
        Orientation::OneToZero => a * a * q,
        Orientation::ZeroToOne => (T::one() - a) * (T::one() - a) * q,
    }
}

fn balance<T: Real>(nl: &Nonlinearity<T>, a: T, d: T, clip: Clip) -> T {
    g_clipped_integral(&nl.with_a(a), d, clip).map(|v| v - of(0.5)).unwrap_or_else(|_| T::nan())
}

/// Area-balance boundary: ∫g_M = 1/2 gives a_−, ∫g_m = 1/2 gives a_+.
pub fn boundary_numeric<T: Real>(nl: &Nonlinearity<T>, d: T) -> Result<PinningBoundary<T>> {
    if !(d > T::zero()) {
        return Err(Error::Parameter(format!("d must be positive, got {}", to64(d))));
    }
    let edge = of::<T>(1e-6);
    let hi = T::one() - edge;
    let root = |clip: Clip| -> Result<T> {
        let f = |a: T| balance(nl, a, d, clip);
        let brackets = scan_brackets(f, edge, hi, 64);
        for (lo, up) in brackets {
            let a = brent(f, lo, up, T::epsilon() * of(4.0), 300)?;
            // A crossing where g is monotone is the balanced moving front, not a pinning edge.
            if !g_decompose(&nl.with_a(a), d)?.degenerate {
                return Ok(a);
            }
        }
        Err(Error::OutsidePinningRegime { d: to64(d) })
    };
    let a_minus = root(Clip::Max)?;
    let a_plus = root(Clip::Min)?;
    let residual = balance(nl, a_minus, d, Clip::Max).abs().max(balance(nl, a_plus, d, Clip::Min).abs());
    Ok(PinningBoundary { d, a_minus, a_plus, provenance: Provenance::AreaBalance, residual })
}

/// Closed-form boundary for the built-in families.
pub fn boundary_closed<T: Real>(nl: &Nonlinearity<T>, d: T) -> Result<PinningBoundary<T>> {
    use crate::nonlinearity::Family;
    let (a_minus, a_plus) = match nl.family {
        Family::Cubic => boundary_cubic_inverse(d)?,
        Family::PiecewiseLinear => boundary_pwl_inverse(d)?,
        Family::Custom(_) => return Err(Error::Unsupported("no closed form for custom nonlinearities".into())),
    };
    let residual = balance(nl, a_minus, d, Clip::Max).abs().max(balance(nl, a_plus, d, Clip::Min).abs());
    Ok(PinningBoundary { d, a_minus, a_plus, provenance: Provenance::ClosedForm, residual })
}

/// Largest d with a pinning interval, by bisection on solvability.
pub fn pinning_tip<T: Real>(nl: &Nonlinearity<T>, d_lo: T, d_hi: T) -> T {
    let ok = |d: T| if boundary_numeric(nl, d).is_ok() { -T::one() } else { T::one() };
    bisect(ok, d_lo, d_hi, tol(1e-10))
}

/// Solves the organising-centre system {g_u = 0, g_uu = 0, ∫g = 1/2} and
/// returns the quadratic opening coefficient of the cusp.
pub fn cusp_coefficient<T: Real>(nl: &Nonlinearity<T>) -> Result<CuspData<T>> {
    if !nl.is_smooth() {
        return Err(Error::Hypothesis("cusp analysis needs a smooth nonlinearity".into()));
    }
    let resid = |x: [T; 3]| -> Result<[T; 3]> {
        let (u, a, d) = (x[0], x[1], x[2]);
        let n = nl.with_a(a);
        Ok([eval_g(u, &n, d, 1)?, eval_g(u, &n, d, 2)?, g_integral(&n, d)? - of(0.5)])
    };
    let mut x = [of::<T>(0.45), of::<T>(0.45), of::<T>(0.2)];
    let mut r = resid(x)?;
    let norm = |r: &[T; 3]| r.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let target = tol::<T>(1e-13);
    let mut converged = false;
    for _ in 0..100 {
        if norm(&r) <= target {
            converged = true;
            break;
        }
        let mut jac = [[T::zero(); 3]; 3];
        for k in 0..3 {
            let h = T::epsilon().sqrt() * x[k].abs().max(T::one());
            let (mut xp, mut xm) = (x, x);
            xp[k] += h;
            xm[k] -= h;
            let (rp, rm) = (resid(xp)?, resid(xm)?);
            for i in 0..3 {
                jac[i][k] = (rp[i] - rm[i]) / (h + h);
            }
        }
        let dx = solve3(jac, [-r[0], -r[1], -r[2]]).ok_or_else(|| Error::NoConvergence {
            what: "cusp Newton: singular Jacobian".into(),
            estimate: to64(x[2]),
        })?;
        let mut lambda = T::one();
        let n0 = norm(&r);
        loop {
            let trial = [x[0] + lambda * dx[0], x[1] + lambda * dx[1], x[2] + lambda * dx[2]];
            if trial[2] > T::zero() {
                if let Ok(rt) = resid(trial) {
                    if norm(&rt) < n0 || lambda < of(1e-3) {
                        x = trial;
                        r = rt;
                        break;
                    }
                }
            }
            lambda = lambda * of(0.5);
            if lambda < of(1e-6) {
                return Err(Error::NoConvergence { what: "cusp Newton: damping failed".into(), estimate: to64(x[2]) });
            }
        }
    }
    if !converged && norm(&r) > tol(1e-10) {
        return Err(Error::NoConvergence { what: "cusp Newton".into(), estimate: to64(x[2]) });
    }
    let (u_star, a_star, d_star) = (x[0], x[1], x[2]);
    let n = nl.with_a(a_star);
    let g3 = eval_g(u_star, &n, d_star, 3)?;
    if g3 <= T::zero() {
        return Err(Error::Hypothesis(format!("g3 = {} must be positive", to64(g3))));
    }
    let g_ud = n.f(u_star, 1)? / (d_star * d_star);
    let da_integral = simpson(&|v| g_da(v, &n, d_star), T::zero(), T::one(), &[], tol(1e-13))?;
    let nine_halves = of::<T>(4.5);
    Ok(CuspData {
        a_star,
        d_star,
        u_star,
        g3,
        g_ud,
        a2: nine_halves * g_ud * g_ud / (g3 * da_integral.abs()),
        a2_unsquared: nine_halves * g_ud / (g3 * da_integral.abs()),
        da_integral,
    })
}

fn solve3<T: Real>(m: [[T; 3]; 3], b: [T; 3]) -> Option<[T; 3]> {
    let det = |m: &[[T; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d == T::zero() || !d.is_finite() {
        return None;
    }
    let mut out = [T::zero(); 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut mk = m;
        for i in 0..3 {
            mk[i][k] = b[i];
        }
        *o = det(&mk) / d;
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trip() {
        for &d in &[0.02f64, 0.1, 0.2, 0.249] {
            let (am, ap) = boundary_cubic_inverse(d).unwrap();
            assert!((boundary_cubic(am) - d).abs() < 1e-14);
            assert!((boundary_cubic(ap) - d).abs() < 1e-14);
        }
    }
}
