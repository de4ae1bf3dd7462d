//! Bracketed scalar root finding.

use crate::error::{Error, Result};
use crate::scalar::{of, to64, Real};

/// Brent's method on a sign-changing bracket `[a, b]`.
pub fn brent<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, xtol: T, max_iter: usize) -> Result<T> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || (fa > T::zero()) == (fb > T::zero()) {
        return Err(Error::NoBracket(format!(
            "f({}) = {:e}, f({}) = {:e}",
            to64(a),
            to64(fa),
            to64(b),
            to64(fb)
        )));
    }
    let two = of::<T>(2.0);
    let half = of::<T>(0.5);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if (fb > T::zero()) == (fc > T::zero()) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = two * T::epsilon() * b.abs() + half * xtol;
        let xm = half * (c - b);
        if xm.abs() <= tol1 || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * xm * s;
                q = T::one() - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (two * xm * qq * (qq - r) - (b - a) * (r - T::one()));
                q = (qq - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = of::<T>(3.0) * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1 * xm.signum() };
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::NoConvergence { what: "Brent: NaN residual".into(), estimate: to64(b) });
        }
    }
    Err(Error::NoConvergence { what: "Brent iteration limit".into(), estimate: to64(b) })
}

/// Scans `n` equal cells of `[a, b]` and returns every cell whose endpoint
/// values differ in sign.
pub fn scan_brackets<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, n: usize) -> Vec<(T, T)> {
    let h = (b - a) / of(n as f64);
    let mut out = Vec::new();
    let mut x0 = a;
    let mut f0 = f(x0);
    for i in 1..=n {
        let x1 = if i == n { b } else { a + h * of(i as f64) };
        let f1 = f(x1);
        if f0 == T::zero() || (f0 > T::zero()) != (f1 > T::zero()) && !f1.is_nan() && !f0.is_nan() {
            out.push((x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    out
}

/// Plain bisection; used where `f` is only reliable in sign.
pub fn bisect<T: Real, F: FnMut(T) -> T>(mut f: F, mut a: T, mut b: T, xtol: T) -> T {
    let fa_pos = f(a) > T::zero();
    while (b - a).abs() > xtol {
        let m = (a + b) * of(0.5);
        if m == a || m == b {
            break;
        }
        if (f(m) > T::zero()) == fa_pos {
            a = m;
        } else {
            b = m;
        }
    }
    (a + b) * of(0.5)
}
