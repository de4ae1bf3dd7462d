//! Adaptive Simpson quadrature with user-supplied panel breaks.

use crate::error::{Error, Result};
use crate::scalar::{of, to64, Real};

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]`, splitting first at every point of `breaks`
/// that lies strictly inside the interval.
pub fn simpson<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, breaks: &[T], abs_tol: T) -> Result<T> {
    let mut pts = vec![a];
    let mut inner: Vec<T> = breaks.iter().copied().filter(|&p| p > a && p < b).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.extend(inner);
    pts.push(b);
    let panels = of::<T>((pts.len() - 1) as f64);
    let mut total = T::zero();
    let mut worst = T::zero();
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let mid = (lo + hi) * of(0.5);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let whole = (hi - lo) / of(6.0) * (flo + of::<T>(4.0) * fmid + fhi);
        let (v, e) = recurse(f, lo, hi, flo, fmid, fhi, whole, abs_tol / panels, MAX_DEPTH);
        total += v;
        worst += e;
    }
    if worst > abs_tol * of(10.0) {
        return Err(Error::NoConvergence {
            what: format!("adaptive Simpson (error estimate {:e})", to64(worst)),
            estimate: to64(total),
        });
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> (T, T) {
    let m = (a + b) * of(0.5);
    let lm = (a + m) * of(0.5);
    let rm = (m + b) * of(0.5);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / of(6.0) * (fa + of::<T>(4.0) * flm + fm);
    let right = (b - m) / of(6.0) * (fm + of::<T>(4.0) * frm + fb);
    let delta = left + right - whole;
    let err = delta.abs() / of(15.0);
    // Stop once the panel is at roundoff scale: further halving cannot help.
    let tiny = (b - a) <= (a.abs() + b.abs() + T::one()) * T::epsilon() * of(16.0);
    if depth == 0 || err <= tol || tiny {
        return (left + right + delta / of(15.0), err);
    }
    let half = tol * of(0.5);
    let (l, el) = recurse(f, a, m, fa, flm, fm, left, half, depth - 1);
    let (r, er) = recurse(f, m, b, fm, frm, fb, right, half, depth - 1);
    (l + r, el + er)
}

/// Composite Gauss–Legendre (8 nodes) on `n` equal panels; used where the
/// integrand is smooth and an adaptive scheme would be wasteful.
pub fn gauss_legendre<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, n: usize) -> T {
    const X: [f64; 4] = [
        0.183_434_642_495_649_8,
        0.525_532_409_916_329_0,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    const W: [f64; 4] = [
        0.362_683_783_378_362_0,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    let h = (b - a) / of((n.max(1)) as f64);
    let mut s = T::zero();
    for k in 0..n.max(1) {
        let c = a + h * (of::<T>(k as f64) + of(0.5));
        for (x, w) in X.iter().zip(W.iter()) {
            let dx = h * of(0.5 * x);
            s += of::<T>(*w) * (f(c - dx) + f(c + dx));
        }
    }
    s * h * of(0.5)
}
