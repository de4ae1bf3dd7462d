//! Heteroclinic shooting for the two rational-kernel reductions, written in
//! the front coordinate ξ with ε = c/d:
//!
//! exp2:       w′ = v, v′ = w − u, u′ = (g(u) − w)/ε       (0,0,0) ← (1,0,1)
//! one-sided:  w′ = u − w,         u′ = (g(u) − w)/ε       (0,0)   ← (1,1)
//!
//! The origin's stable manifold is one-dimensional in both systems and is
//! traced backwards in ξ, where the slow manifolds attract.

use unpin_core::nonlinearity::{eval_g, g_decompose};
use unpin_core::numerics::ode::{Dop853, Event, Stop};
use unpin_core::numerics::roots::brent;
use unpin_core::scalar::{of, to64, Real};
use unpin_core::{Error, Nonlinearity, Result};

#[derive(Debug, Clone, Copy)]
pub struct ShootOptions<T> {
    /// Distance of the seed from the equilibrium along its eigenvector.
    pub seed: T,
    pub rtol: T,
    pub atol: T,
    /// Longest ξ-interval integrated before declaring a miss.
    pub xi_max: T,
    /// Relative tolerance on c.
    pub c_tol: T,
    /// Centre of the initial bracket search; a geometric scan from `c_max`
    /// downwards is used without one.
    pub c_hint: Option<T>,
    pub c_max: T,
    pub c_min: T,
}

impl<T: Real> Default for ShootOptions<T> {
    fn default() -> Self {
        Self {
            seed: of(1e-6),
            rtol: of(1e-12),
            atol: of(1e-14),
            xi_max: of(400.0),
            c_tol: of(1e-11),
            c_hint: None,
            c_max: of(4.0),
            c_min: of(1e-10),
        }
    }
}

/// End point of one shot: the state at the section and the signed miss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootState<T, const N: usize> {
    pub state: [T; N],
    pub xi: T,
    pub c: T,
    pub miss: T,
}

fn g<T: Real>(u: T, nl: &Nonlinearity<T>, d: T) -> T {
    u - nl.f0(u) / d
}

fn g1<T: Real>(u: T, nl: &Nonlinearity<T>, d: T) -> T {
    eval_g(u, nl, d, 1).unwrap_or_else(|_| T::one() - nl.f1(u) / d)
}

/// Vector field of the exp2 reduction, state (w, v, u).
pub fn field_3d<T: Real>(nl: &Nonlinearity<T>, d: T, c: T, y: &[T; 3]) -> [T; 3] {
    let [w, v, u] = *y;
    [v, w - u, (g(u, nl, d) - w) * d / c]
}

/// Vector field of the one-sided reduction, state (w, u).
pub fn field_2d<T: Real>(nl: &Nonlinearity<T>, d: T, c: T, y: &[T; 2]) -> [T; 2] {
    let [w, u] = *y;
    [u - w, (g(u, nl, d) - w) * d / c]
}

fn check<T: Real>(d: T, c: T) -> Result<()> {
    if !(d > T::zero()) {
        return Err(Error::Parameter(format!("d must be positive, got {}", to64(d))));
    }
    if !(c > T::zero()) {
        return Err(Error::Parameter(format!("shooting needs c > 0 (no heteroclinic for c ≤ 0), got {}", to64(c))));
    }
    Ok(())
}

/// Negative eigenvalue of the exp2 linearisation at the origin,
/// a root of λ³/q − gλ² − λ/q + (g − 1) = 0 with q = d/c, g = g′(0).
fn stable_root_3d<T: Real>(q: T, g0: T) -> T {
    let one = T::one();
    let mut l = -((g0 - one) / g0).sqrt();
    for _ in 0..50 {
        let p = l * l * l / q - g0 * l * l - l / q + g0 - one;
        let dp = of::<T>(3.0) * l * l / q - of::<T>(2.0) * g0 * l - one / q;
        let step = p / dp;
        l -= step;
        if step.abs() <= T::epsilon() * l.abs() * of(4.0) {
            break;
        }
    }
    l
}

/// Backward shot from the origin of the exp2 reduction. The miss is the
/// coefficient of the mode that grows backwards at (1, 0, 1), read off
/// where the orbit first turns (v = 0) or overshoots (w = 1).
pub fn shoot_3d<T: Real>(nl: &Nonlinearity<T>, d: T, c: T, opts: &ShootOptions<T>) -> Result<ShootState<T, 3>> {
    check(d, c)?;
    let q = d / c;
    let g0 = g1(T::zero(), nl, d);
    let gp1 = g1(T::one(), nl, d);
    if !(g0 > T::one() && gp1 > T::one()) {
        return Err(Error::Hypothesis("equilibria of the slow flow must be saddles (g′ > 1 at u = 0, 1)".into()));
    }
    let lam = stable_root_3d(q, g0);
    let vec = [T::one(), lam, q / (q * g0 - lam)];
    let norm = vec.iter().fold(T::zero(), |s, &v| s + v * v).sqrt();
    let y0 = vec.map(|v| v * opts.seed / norm);
    let kappa = (T::one() - T::one() / gp1).sqrt();
    let rhs = |_: T, y: &[T; 3]| field_3d(nl, d, c, y).map(|v| -v);
    let big = of::<T>(3.0);
    let events = [
        Event::terminal(|_, y: &[T; 3]| y[1], 0),
        Event::terminal(|_, y: &[T; 3]| y[0] - T::one(), 0),
        Event::terminal(move |_, y: &[T; 3]| big - y.iter().fold(T::zero(), |m, v| m.max(v.abs())), -1),
    ];
    let ode = Dop853 { rtol: opts.rtol, atol: opts.atol, ..Dop853::default() };
    let traj = ode.solve(rhs, T::zero(), y0, opts.xi_max, &events)?;
    let (s, y) = traj.last();
    if traj.stop == Stop::Event(2) {
        return Err(Error::Geometry(format!("shot escaped the box |y| ≤ 3 at ξ = −{}", to64(s))));
    }
    let miss = ((y[0] - T::one()) * kappa - y[1]) / (kappa + kappa);
    Ok(ShootState { state: y, xi: -s, c, miss })
}

/// Roots (stable, unstable) of the one-sided linearisation at a point with
/// slope g′ = gp: λ² − (q gp − 1)λ + q(1 − gp) = 0.
fn roots_2d<T: Real>(q: T, gp: T) -> (T, T) {
    let b = q * gp - T::one();
    let p = q * (T::one() - gp);
    let disc = (b * b - of::<T>(4.0) * p).sqrt();
    let big = if b >= T::zero() { (b + disc) * of(0.5) } else { (b - disc) * of(0.5) };
    let small = p / big;
    if big > small {
        (small, big)
    } else {
        (big, small)
    }
}

/// Matching of the origin's stable manifold (traced backwards) with the
/// fast unstable manifold of (1, 1) (traced forwards) on the section
/// u = (u_max + 1)/2; the miss is the difference in w.
pub fn shoot_2d<T: Real>(nl: &Nonlinearity<T>, d: T, c: T, opts: &ShootOptions<T>) -> Result<ShootState<T, 2>> {
    check(d, c)?;
    let q = d / c;
    let dec = g_decompose(nl, d)?;
    let u_sec = if dec.degenerate { of(0.5) } else { (dec.u_max + T::one()) * of(0.5) };
    let ode = Dop853 { rtol: opts.rtol, atol: opts.atol, ..Dop853::default() };
    let unit = |v: [T; 2]| {
        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
        [v[0] / n, v[1] / n]
    };

    let (ls, _) = roots_2d(q, g1(T::zero(), nl, d));
    let e = unit([T::one(), T::one() + ls]);
    let y0 = [e[0] * opts.seed, e[1] * opts.seed];
    let sec = [
        Event::terminal(move |_, y: &[T; 2]| y[1] - u_sec, 1),
        Event::terminal(|_, y: &[T; 2]| of::<T>(3.0) - y[0].abs().max(y[1].abs()), -1),
    ];
    let back = ode.solve(|_, y: &[T; 2]| field_2d(nl, d, c, y).map(|v| -v), T::zero(), y0, opts.xi_max, &sec)?;
    let (sb, yb) = back.last();
    let wb = if back.stop == Stop::Event(0) { yb[0] } else { of(10.0) };

    let (_, lu) = roots_2d(q, g1(T::one(), nl, d));
    let e = unit([T::one(), T::one() + lu]);
    let y1 = [T::one() - e[0] * opts.seed, T::one() - e[1] * opts.seed];
    let sec = [
        Event::terminal(move |_, y: &[T; 2]| y[1] - u_sec, -1),
        Event::terminal(|_, y: &[T; 2]| of::<T>(3.0) - y[0].abs().max(y[1].abs()), -1),
    ];
    let fwd = ode.solve(|_, y: &[T; 2]| field_2d(nl, d, c, y), T::zero(), y1, opts.xi_max, &sec)?;
    let (_, yf) = fwd.last();
    if fwd.stop != Stop::Event(0) {
        return Err(Error::Geometry("unstable manifold of (1, 1) never reached the section".into()));
    }
    Ok(ShootState { state: yb, xi: -sb, c, miss: wb - yf[0] })
}

/// Bracket a sign change of `miss` in c and refine it with Brent. A shot
/// that fails during the search (stiffness at tiny c, escape) ends it.
fn solve_speed<T: Real>(mut miss: impl FnMut(T) -> Result<T>, opts: &ShootOptions<T>, what: &str) -> Result<T> {
    let mut bracket = None;
    let mut why = String::new();
    let mut eval = |c: T, why: &mut String| match miss(c) {
        Ok(m) => Some(m),
        Err(e) => {
            *why = format!("; search stopped at c = {:e}: {e}", to64(c));
            None
        }
    };
    match opts.c_hint {
        Some(h) => {
            let (mut lo, mut hi) = (h / of(1.5), h * of(1.5));
            let mut vals = eval(lo, &mut why).zip(eval(hi, &mut why));
            for _ in 0..40 {
                let Some((mlo, mhi)) = vals else { break };
                if mlo * mhi <= T::zero() {
                    bracket = Some((lo, hi));
                    break;
                }
                lo = lo / of(2.0);
                hi = hi * of(2.0);
                if lo < opts.c_min || hi > opts.c_max {
                    break;
                }
                vals = eval(lo, &mut why).zip(eval(hi, &mut why));
            }
        }
        None => {
            let mut hi = opts.c_max;
            let mut mhi = eval(hi, &mut why);
            while let Some(m) = mhi {
                if hi <= opts.c_min {
                    break;
                }
                let lo = hi / of(2.0);
                let Some(mlo) = eval(lo, &mut why) else { break };
                if mlo * m <= T::zero() {
                    bracket = Some((lo, hi));
                    break;
                }
                hi = lo;
                mhi = Some(mlo);
            }
        }
    }
    let Some((lo, hi)) = bracket else {
        return Err(Error::NoBracket(format!(
            "{what}: no speed in [{}, {}]; pinned or out of range{why}",
            to64(opts.c_min),
            to64(opts.c_max)
        )));
    };
    let mut err = None;
    let f = |c: T| match miss(c) {
        Ok(m) => m,
        Err(e) => {
            err.get_or_insert(e);
            T::nan()
        }
    };
    let root = brent(f, lo, hi, lo * opts.c_tol, 300)?;
    match err {
        Some(e) => Err(e),
        None => Ok(root),
    }
}

pub fn solve_speed_3d<T: Real>(nl: &Nonlinearity<T>, d: T, opts: &ShootOptions<T>) -> Result<T> {
    solve_speed(|c| shoot_3d(nl, d, c, opts).map(|s| s.miss), opts, "shoot_3d")
}

pub fn solve_speed_2d<T: Real>(nl: &Nonlinearity<T>, d: T, opts: &ShootOptions<T>) -> Result<T> {
    solve_speed(|c| shoot_2d(nl, d, c, opts).map(|s| s.miss), opts, "shoot_2d")
}
