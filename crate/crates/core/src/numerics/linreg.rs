use crate::scalar::{of, Real};

/// Ordinary least-squares line `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line<T> {
    pub slope: T,
    pub intercept: T,
    pub r2: T,
    pub resid_sd: T,
}

pub fn fit_line<T: Real>(x: &[T], y: &[T]) -> Line<T> {
    let n = of::<T>(x.len() as f64);
    let mx = x.iter().fold(T::zero(), |s, &v| s + v) / n;
    let my = y.iter().fold(T::zero(), |s, &v| s + v) / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = x.iter().zip(y).fold(T::zero(), |s, (&a, &b)| {
        let e = b - (slope * a + intercept);
        s + e * e
    });
    let r2 = if syy > T::zero() { T::one() - sse / syy } else { T::one() };
    let dof = if x.len() > 2 { of::<T>((x.len() - 2) as f64) } else { T::one() };
    Line { slope, intercept, r2, resid_sd: (sse / dof).sqrt() }
}
