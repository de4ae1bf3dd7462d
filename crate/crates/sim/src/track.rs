use unpin_core::scalar::{of, Real};
use unpin_core::{Error, Grid, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrontTrack<T> {
    pub times: Vec<T>,
    pub positions: Vec<T>,
}

impl<T: Real> FrontTrack<T> {
    pub fn push(&mut self, t: T, x: T) {
        self.times.push(t);
        self.positions.push(x);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Leftmost downward crossing of u = 1/2, interpolated linearly between
/// grid points.
pub fn front_position<T: Real>(grid: &Grid<T>, u: &[T]) -> Option<T> {
    let half = of::<T>(0.5);
    let i = u.windows(2).position(|p| p[0] >= half && p[1] < half)?;
    let frac = (u[i] - half) / (u[i] - u[i + 1]);
    Some(grid.x(i) + frac * grid.dx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedFit<T> {
    pub speed: T,
    pub intercept: T,
    pub r2: T,
    pub residual_std: T,
    pub samples: usize,
    pub t_first: T,
    pub t_last: T,
    /// R² below 0.999: the front has not settled into steady motion.
    pub transient: bool,
}

/// Least-squares slope of position against time after dropping the first
/// `discard` fraction of samples.
pub fn measure_speed<T: Real>(track: &FrontTrack<T>, discard: T) -> Result<SpeedFit<T>> {
    if !(discard >= T::zero() && discard < T::one()) {
        return Err(Error::Parameter("discard fraction must lie in [0, 1)".into()));
    }
    let skip = (unpin_core::scalar::to64(discard) * track.len() as f64).floor() as usize;
    let (t, x) = (&track.times[skip..], &track.positions[skip..]);
    let m = t.len();
    if m < 10 {
        return Err(Error::Parameter(format!("need at least 10 samples after the discard, have {m}")));
    }
    let nm = of::<T>(m as f64);
    let tm = t.iter().fold(T::zero(), |s, &v| s + v) / nm;
    let xm = x.iter().fold(T::zero(), |s, &v| s + v) / nm;
    let (mut stt, mut stx, mut sxx) = (T::zero(), T::zero(), T::zero());
    for (&ti, &xi) in t.iter().zip(x) {
        let (dt, dx) = (ti - tm, xi - xm);
        stt += dt * dt;
        stx += dt * dx;
        sxx += dx * dx;
    }
    let speed = stx / stt;
    let intercept = xm - speed * tm;
    let sse = t.iter().zip(x).fold(T::zero(), |s, (&ti, &xi)| {
        let r = xi - intercept - speed * ti;
        s + r * r
    });
    let r2 = if sxx > T::zero() { T::one() - sse / sxx } else { T::one() };
    let dof = of::<T>((m - 2) as f64);
    Ok(SpeedFit {
        speed,
        intercept,
        r2,
        residual_std: (sse / dof).sqrt(),
        samples: m,
        t_first: t[0],
        t_last: t[m - 1],
        transient: r2 < of(0.999),
    })
}
