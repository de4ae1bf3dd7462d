use serde::Serialize;
use unpin_core::scalar::{to64, Real};
use unpin_core::{Error, Result};

/// Which samples enter the fit, by rank of ascending μ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WindowPolicy {
    /// 1-based inclusive ranks; the default 4th–8th smallest μ.
    Ranks { first: usize, last: usize },
    All,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy::Ranks { first: 4, last: 8 }
    }
}

impl std::str::FromStr for WindowPolicy {
    type Err = Error;

    /// "4:8" or "all".
    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            return Ok(WindowPolicy::All);
        }
        let bad = || Error::Parameter(format!("window must be 'first:last' (1-based ranks) or 'all', got '{s}'"));
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        let (first, last) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if first == 0 || last < first + 1 {
            return Err(bad());
        }
        Ok(WindowPolicy::Ranks { first, last })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit<T> {
    pub gamma: T,
    pub k: T,
    /// 1-based inclusive ranks (ascending μ) that were fitted.
    pub window: (usize, usize),
    /// Extreme chord slopes between pairs of samples in the window.
    pub gamma_lo: T,
    pub gamma_hi: T,
    pub r2: T,
}

impl<T: Real> PowerLawFit<T> {
    /// Whether `gamma` lies inside the error bar widened by `inflate`.
    pub fn brackets(&self, gamma: T, inflate: T) -> bool {
        gamma >= self.gamma_lo - inflate && gamma <= self.gamma_hi + inflate
    }
}

/// Least-squares fit of ln c = ln k + γ ln μ over a rank window.
pub fn powerlaw_fit<T: Real>(samples: &[(T, T)], policy: WindowPolicy) -> Result<PowerLawFit<T>> {
    let mut sorted = samples.to_vec();
    if let Some(&(mu, _)) = sorted.iter().find(|(mu, _)| !(*mu > T::zero()) || !mu.is_finite()) {
        return Err(Error::Parameter(format!("mu must be positive and finite, got {}", to64(mu))));
    }
    sorted.sort_by(|p, q| p.0.partial_cmp(&q.0).expect("finite"));
    if sorted.windows(2).any(|p| p[0].0 == p[1].0) {
        return Err(Error::Parameter("mu values must be distinct".into()));
    }
    let (first, last) = match policy {
        WindowPolicy::Ranks { first, last } => (first, last),
        WindowPolicy::All => (1, sorted.len()),
    };
    let need = last.max(8);
    if sorted.len() < need {
        return Err(Error::Parameter(format!("window {first}:{last} needs at least {need} samples, have {}", sorted.len())));
    }
    let win = &sorted[first - 1..last];
    if let Some(&(mu, c)) = win.iter().find(|(_, c)| !(*c > T::zero())) {
        return Err(Error::PinnedSample { mu: to64(mu), c: to64(c) });
    }
    let pts: Vec<(T, T)> = win.iter().map(|&(m, c)| (m.ln(), c.ln())).collect();
    let n = T::from(pts.len()).expect("small count");
    let xm = pts.iter().fold(T::zero(), |s, p| s + p.0) / n;
    let ym = pts.iter().fold(T::zero(), |s, p| s + p.1) / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for &(x, y) in &pts {
        sxx += (x - xm) * (x - xm);
        sxy += (x - xm) * (y - ym);
        syy += (y - ym) * (y - ym);
    }
    let gamma = sxy / sxx;
    let intercept = ym - gamma * xm;
    let sse = pts.iter().fold(T::zero(), |s, &(x, y)| {
        let r = y - intercept - gamma * x;
        s + r * r
    });
    let r2 = if syy > T::zero() { T::one() - sse / syy } else { T::one() };
    let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let s = (pts[j].1 - pts[i].1) / (pts[j].0 - pts[i].0);
            lo = lo.min(s);
            hi = hi.max(s);
        }
    }
    // The least-squares slope is a weighted mean of the chords; guard rounding.
    let (lo, hi) = (lo.min(gamma), hi.max(gamma));
    Ok(PowerLawFit { gamma, k: intercept.exp(), window: (first, last), gamma_lo: lo, gamma_hi: hi, r2 })
}
