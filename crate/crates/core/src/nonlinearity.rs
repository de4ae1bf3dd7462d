//! Bistable nonlinearities f_a and the reduced function g(u) = u − f_a(u)/d.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::quad::simpson;
use crate::numerics::roots::{bisect, brent};
use crate::scalar::{of, to64, tol, Real};

/// `(u, a, order) ↦ ∂ᵘ f_a(u)` for `order ≤ 3`.
pub type CustomFn<T> = Arc<dyn Fn(T, T, u8) -> T + Send + Sync>;

#[derive(Clone)]
pub enum Family<T> {
    Cubic,
    PiecewiseLinear,
    Custom(CustomFn<T>),
}

impl<T> fmt::Debug for Family<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Cubic => write!(f, "Cubic"),
            Family::PiecewiseLinear => write!(f, "PiecewiseLinear"),
            Family::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Nonlinearity<T> {
    pub family: Family<T>,
    pub a: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clip {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GDecomposition<T> {
    pub beta1: T,
    pub beta2: T,
    pub u_max: T,
    pub u_max_partner: T,
    pub u_min: T,
    pub u_min_partner: T,
    pub degenerate: bool,
}

impl<T: Real> Nonlinearity<T> {
    pub fn cubic(a: T) -> Self {
        Self { family: Family::Cubic, a }
    }

    pub fn piecewise_linear(a: T) -> Self {
        Self { family: Family::PiecewiseLinear, a }
    }

    pub fn custom(a: T, f: CustomFn<T>) -> Self {
        Self { family: Family::Custom(f), a }
    }

    pub fn with_a(&self, a: T) -> Self {
        Self { family: self.family.clone(), a }
    }

    pub fn is_smooth(&self) -> bool {
        !matches!(self.family, Family::PiecewiseLinear)
    }

    fn kinks(&self) -> [T; 2] {
        let h = of::<T>(0.5);
        [self.a * h, (T::one() + self.a) * h]
    }

    /// `order`-th derivative of f_a at `u`.
    pub fn f(&self, u: T, order: u8) -> Result<T> {
        let a = self.a;
        match &self.family {
            Family::Cubic => {
                let one = T::one();
                Ok(match order {
                    0 => u * (one - u) * (u - a),
                    1 => -of::<T>(3.0) * u * u + of::<T>(2.0) * (one + a) * u - a,
                    2 => -of::<T>(6.0) * u + of::<T>(2.0) * (one + a),
                    3 => -of::<T>(6.0),
                    _ => T::zero(),
                })
            }
            Family::PiecewiseLinear => {
                let [k1, k2] = self.kinks();
                if order >= 1 && (u == k1 || u == k2) {
                    return Err(Error::Kink { at: to64(u), order });
                }
                Ok(match order {
                    0 if u <= k1 => -u,
                    0 if u <= k2 => u - a,
                    0 => T::one() - u,
                    1 if u < k1 || u > k2 => -T::one(),
                    1 => T::one(),
                    _ => T::zero(),
                })
            }
            Family::Custom(f) => Ok(f(u, a, order)),
        }
    }

    /// f_a(u), total for every family.
    #[inline]
    pub fn f0(&self, u: T) -> T {
        self.f(u, 0).unwrap_or_else(|_| T::nan())
    }

    /// f_a′(u); at piecewise-linear kinks the left slope is returned.
    #[inline]
    pub fn f1(&self, u: T) -> T {
        match self.f(u, 1) {
            Ok(v) => v,
            Err(_) => self.f(u - T::epsilon(), 1).unwrap_or_else(|_| T::nan()),
        }
    }

    /// ∂_a f_a(u).
    pub fn f_da(&self, u: T) -> T {
        match &self.family {
            Family::Cubic => -u * (T::one() - u),
            Family::PiecewiseLinear => {
                let [k1, k2] = self.kinks();
                if u > k1 && u < k2 {
                    -T::one()
                } else {
                    T::zero()
                }
            }
            Family::Custom(f) => {
                let h = T::epsilon().cbrt();
                (f(u, self.a + h, 0) - f(u, self.a - h, 0)) / (h + h)
            }
        }
    }
}

pub fn eval_g<T: Real>(u: T, nl: &Nonlinearity<T>, d: T, order: u8) -> Result<T> {
    let fk = nl.f(u, order)?;
    Ok(match order {
        0 => u - fk / d,
        1 => T::one() - fk / d,
        _ => -fk / d,
    })
}

#[inline]
pub(crate) fn g0<T: Real>(u: T, nl: &Nonlinearity<T>, d: T) -> T {
    u - nl.f0(u) / d
}

/// ∂_a g(u; a, d).
pub fn g_da<T: Real>(u: T, nl: &Nonlinearity<T>, d: T) -> T {
    -nl.f_da(u) / d
}

pub fn g_decompose<T: Real>(nl: &Nonlinearity<T>, d: T) -> Result<GDecomposition<T>> {
    if d <= T::zero() {
        return Err(Error::Parameter(format!("d must be positive, got {}", to64(d))));
    }
    let one = T::one();
    let a = nl.a;
    match &nl.family {
        Family::Cubic => {
            let three = of::<T>(3.0);
            let disc = (one + a) * (one + a) - three * (a + d);
            if disc <= T::zero() {
                let b = (one + a) / three;
                return Ok(degenerate(b));
            }
            let s = disc.sqrt();
            let u_max = ((one + a) - s) / three;
            let u_min = ((one + a) + s) / three;
            Ok(GDecomposition {
                beta1: u_max,
                beta2: u_min,
                u_max,
                u_max_partner: (one + a) - of::<T>(2.0) * u_max,
                u_min,
                u_min_partner: (one + a) - of::<T>(2.0) * u_min,
                degenerate: false,
            })
        }
        Family::PiecewiseLinear => {
            let [k1, k2] = nl.kinks();
            if d >= one {
                return Ok(degenerate((k1 + k2) * of(0.5)));
            }
            let gmax = k1 * (one + one / d);
            let gmin = k2 - (one - a) / (of::<T>(2.0) * d);
            Ok(GDecomposition {
                beta1: k1,
                beta2: k2,
                u_max: k1,
                u_max_partner: (gmax * d + one) / (d + one),
                u_min: k2,
                u_min_partner: gmin * d / (d + one),
                degenerate: false,
            })
        }
        Family::Custom(_) => decompose_scan(nl, d),
    }
}

fn degenerate<T: Real>(b: T) -> GDecomposition<T> {
    GDecomposition { beta1: b, beta2: b, u_max: b, u_max_partner: b, u_min: b, u_min_partner: b, degenerate: true }
}

fn decompose_scan<T: Real>(nl: &Nonlinearity<T>, d: T) -> Result<GDecomposition<T>> {
    let gp = |u: T| T::one() - nl.f(u, 1).unwrap_or_else(|_| T::nan()) / d;
    let n = 512;
    let mut crit = Vec::new();
    let mut u0 = T::zero();
    let mut s0 = gp(u0);
    for i in 1..=n {
        let u1 = of::<T>(i as f64 / n as f64);
        let s1 = gp(u1);
        if (s0 > T::zero()) != (s1 > T::zero()) {
            crit.push(bisect(&gp, u0, u1, tol(1e-13)));
        }
        u0 = u1;
        s0 = s1;
    }
    match crit.len() {
        0 => {
            // Monotone: report the inflection the scan sees as least steep.
            let mut best = (T::infinity(), of::<T>(0.5));
            for i in 0..=n {
                let u = of::<T>(i as f64 / n as f64);
                if gp(u) < best.0 {
                    best = (gp(u), u);
                }
            }
            Ok(degenerate(best.1))
        }
        2 if gp(T::zero()) > T::zero() => {
            let (u_max, u_min) = (crit[0], crit[1]);
            let gmax = g0(u_max, nl, d);
            let gmin = g0(u_min, nl, d);
            let hi = expand_up(|u| g0(u, nl, d) - gmax, u_min)?;
            let lo = expand_down(|u| g0(u, nl, d) - gmin, u_max)?;
            Ok(GDecomposition { beta1: u_max, beta2: u_min, u_max, u_max_partner: hi, u_min, u_min_partner: lo, degenerate: false })
        }
        k => Err(Error::Hypothesis(format!("g has {} monotonicity intervals on [0,1]", k + 1))),
    }
}

fn expand_up<T: Real, F: Fn(T) -> T>(f: F, from: T) -> Result<T> {
    let mut step = of::<T>(0.25);
    let mut lo = from;
    for _ in 0..60 {
        let hi = lo + step;
        if f(hi) >= T::zero() {
            return brent(&f, lo, hi, tol(1e-15), 200);
        }
        lo = hi;
        step = step * of(2.0);
    }
    Err(Error::NoBracket("companion preimage above the minimum".into()))
}

fn expand_down<T: Real, F: Fn(T) -> T>(f: F, from: T) -> Result<T> {
    let mut step = of::<T>(0.25);
    let mut hi = from;
    for _ in 0..60 {
        let lo = hi - step;
        if f(lo) <= T::zero() {
            return brent(&f, lo, hi, tol(1e-15), 200);
        }
        hi = lo;
        step = step * of(2.0);
    }
    Err(Error::NoBracket("companion preimage below the maximum".into()))
}

fn breaks<T: Real>(nl: &Nonlinearity<T>) -> Vec<T> {
    match nl.family {
        Family::PiecewiseLinear => nl.kinks().to_vec(),
        _ => Vec::new(),
    }
}

/// ∫₀¹ g(v) dv.
pub fn g_integral<T: Real>(nl: &Nonlinearity<T>, d: T) -> Result<T> {
    if let Family::Cubic = nl.family {
        let two = of::<T>(2.0);
        return Ok(T::one() / two - (T::one() - two * nl.a) / (of::<T>(12.0) * d));
    }
    simpson(&|u| g0(u, nl, d), T::zero(), T::one(), &breaks(nl), tol(1e-13))
}

/// ∫₀¹ of g with its hump replaced by the constant extremal value between the
/// extremum and its companion preimage.
pub fn g_clipped_integral<T: Real>(nl: &Nonlinearity<T>, d: T, which: Clip) -> Result<T> {
    let dec = g_decompose(nl, d)?;
    if dec.degenerate {
        return g_integral(nl, d);
    }
    let (zero, one) = (T::zero(), T::one());
    let clamp = |x: T| x.max(zero).min(one);
    let (lo, hi, level) = match which {
        Clip::Max => (dec.u_max, dec.u_max_partner, g0(dec.u_max, nl, d)),
        Clip::Min => (dec.u_min_partner, dec.u_min, g0(dec.u_min, nl, d)),
    };
    let (lo, hi) = (clamp(lo), clamp(hi));
    let mut br = breaks(nl);
    br.extend([lo, hi]);
    let f = |u: T| if u > lo && u < hi { level } else { g0(u, nl, d) };
    simpson(&f, zero, one, &br, tol(1e-13))
}

/// Solves g(u) = w on the branch continued from ±∞.
pub fn g_branch_inverse<T: Real>(w: T, nl: &Nonlinearity<T>, d: T, branch: Branch) -> Result<T> {
    let dec = g_decompose(nl, d)?;
    if !dec.degenerate {
        match branch {
            Branch::Plus => {
                let fold = g0(dec.u_min, nl, d);
                if w < fold {
                    return Err(Error::OutOfBranch { w: to64(w), fold: to64(fold) });
                }
            }
            Branch::Minus => {
                let fold = g0(dec.u_max, nl, d);
                if w > fold {
                    return Err(Error::OutOfBranch { w: to64(w), fold: to64(fold) });
                }
            }
        }
    }
    match &nl.family {
        Family::Cubic => Ok(cubic_branch(w, nl.a, d, branch, &dec)),
        Family::PiecewiseLinear => Ok(pwl_branch(w, nl.a, d, branch, &dec)),
        Family::Custom(_) => {
            let f = |u: T| g0(u, nl, d) - w;
            let (from_lo, from_hi) = match branch {
                Branch::Plus if !dec.degenerate => (dec.u_min, None),
                Branch::Minus if !dec.degenerate => (dec.u_max, Some(())),
                _ => (dec.beta1, if f(dec.beta1) > T::zero() { Some(()) } else { None }),
            };
            if f(from_lo) == T::zero() {
                return Ok(from_lo);
            }
            match from_hi {
                None => expand_up(f, from_lo),
                Some(()) => expand_down(f, from_lo),
            }
        }
    }
}

fn cubic_branch<T: Real>(w: T, a: T, d: T, branch: Branch, dec: &GDecomposition<T>) -> T {
    let u = cubic_branch_closed(w, a, d, branch, dec);
    let on_branch = dec.degenerate
        || match branch {
            Branch::Plus => u >= dec.u_min,
            Branch::Minus => u <= dec.u_max,
        };
    if on_branch && u.is_finite() {
        return u;
    }
    // Near a fold the closed form can report the far simple root instead of
    // the nearly double one; fall back to bracketing on the monotone piece.
    let nl = Nonlinearity::cubic(a);
    let f = |u: T| g0(u, &nl, d) - w;
    let r = match branch {
        Branch::Plus if f(dec.u_min) >= T::zero() => Ok(dec.u_min),
        Branch::Plus => expand_up(f, dec.u_min),
        Branch::Minus if f(dec.u_max) <= T::zero() => Ok(dec.u_max),
        Branch::Minus => expand_down(f, dec.u_max),
    };
    r.unwrap_or(u)
}

fn cubic_branch_closed<T: Real>(w: T, a: T, d: T, branch: Branch, dec: &GDecomposition<T>) -> T {
    // d·(g(u) − w) = u³ − (1+a)u² + (a+d)u − d·w
    let one = T::one();
    let p2 = -(one + a);
    let p1 = a + d;
    let p0 = -d * w;
    let roots = real_cubic_roots(p2, p1, p0);
    let mut u = match branch {
        Branch::Plus => *roots.last().unwrap(),
        Branch::Minus => roots[0],
    };
    let (lo, hi) = match branch {
        Branch::Plus if !dec.degenerate => (dec.u_min, T::infinity()),
        Branch::Minus if !dec.degenerate => (-T::infinity(), dec.u_max),
        _ => (-T::infinity(), T::infinity()),
    };
    let poly = |u: T| ((u + p2) * u + p1) * u + p0;
    let dpoly = |u: T| (of::<T>(3.0) * u + of::<T>(2.0) * p2) * u + p1;
    for _ in 0..3 {
        let dp = dpoly(u);
        if dp == T::zero() {
            break;
        }
        let un = u - poly(u) / dp;
        if !(un >= lo && un <= hi) || !un.is_finite() {
            break;
        }
        if (un - u).abs() <= T::epsilon() * u.abs().max(one) {
            u = un;
            break;
        }
        u = un;
    }
    u
}

/// Real roots of u³ + p2·u² + p1·u + p0, ascending.
pub fn real_cubic_roots<T: Real>(p2: T, p1: T, p0: T) -> Vec<T> {
    let three = of::<T>(3.0);
    let shift = p2 / three;
    let p = p1 - p2 * p2 / three;
    let q = of::<T>(2.0) * p2 * p2 * p2 / of(27.0) - p2 * p1 / three + p0;
    let disc = (q / of(2.0)) * (q / of(2.0)) + (p / three) * (p / three) * (p / three);
    let mut r = if disc > T::zero() {
        let s = disc.sqrt();
        let u = (-q / of(2.0) + s).cbrt();
        let v = (-q / of(2.0) - s).cbrt();
        vec![u + v - shift]
    } else if p == T::zero() {
        vec![-shift]
    } else {
        let m = of::<T>(2.0) * (-p / three).sqrt();
        let arg = (three * q / (p * m)).max(-T::one()).min(T::one());
        let th = arg.acos() / three;
        let tau = T::PI() * of(2.0) / three;
        vec![m * th.cos() - shift, m * (th - tau).cos() - shift, m * (th - tau - tau).cos() - shift]
    };
    r.sort_by(|x, y| x.partial_cmp(y).unwrap());
    r
}

fn pwl_branch<T: Real>(w: T, a: T, d: T, branch: Branch, dec: &GDecomposition<T>) -> T {
    let one = T::one();
    let s_out = one + one / d;
    let [k1, k2] = [a * of(0.5), (one + a) * of(0.5)];
    let left = w / s_out;
    let right = (w + one / d) / s_out;
    let middle = |w: T| (w - a / d) / (one - one / d);
    if dec.degenerate {
        if left <= k1 {
            return left;
        }
        if right >= k2 {
            return right;
        }
        return middle(w);
    }
    match branch {
        Branch::Minus => left,
        Branch::Plus => right,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_roots_three_real() {
        let r = real_cubic_roots(-6.0f64, 11.0, -6.0);
        for (x, e) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((x - e).abs() < 1e-12);
        }
    }

    #[test]
    fn pwl_continuity() {
        let nl = Nonlinearity::piecewise_linear(0.3f64);
        for k in nl.kinks() {
            let l = nl.f0(k - 1e-12);
            let r = nl.f0(k + 1e-12);
            assert!((l - r).abs() < 1e-11);
        }
    }

    #[test]
    fn closed_integral_matches_quadrature() {
        let nl = Nonlinearity::cubic(0.37f64);
        let q = simpson(&|u| g0(u, &nl, 0.13), 0.0, 1.0, &[], 1e-14).unwrap();
        assert!((q - g_integral(&nl, 0.13).unwrap()).abs() < 1e-13);
    }
}
