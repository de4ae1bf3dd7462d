//! Direct simulation of u_t = d(K∗u − u) + f_a(u) by forward Euler with a
//! spectral convolution, tracking the front through its u = 1/2 crossing.

pub mod track;

use serde::Serialize;
use unpin_core::kernels::reference_front;
use unpin_core::scalar::{of, to64, Real};
use unpin_core::{ConvScratch, Error, FrontConvolver, Grid, KernelSpec, Nonlinearity, Result};

pub use track::{front_position, measure_speed, FrontTrack, SpeedFit};

#[derive(Debug, Clone)]
pub struct SimConfig<T> {
    pub kernel: KernelSpec,
    pub nl: Nonlinearity<T>,
    pub d: T,
    pub grid: Grid<T>,
    pub dt: T,
    pub t_end: T,
    /// Steps between recorded front positions.
    pub record_stride: usize,
    /// Fraction of the domain at each end reset to 1 (left) and 0 (right)
    /// after every step, so the periodic wrap never couples the two states.
    pub clamp_fraction: T,
    /// Recording stops once the front is this close to a clamp zone.
    pub margin: T,
    /// Abort once any |u| exceeds this.
    pub blowup: T,
}

impl<T: Real> SimConfig<T> {
    /// dt = 0.17 on |x| ≤ 30 with 2¹³ points.
    pub fn new(kernel: KernelSpec, nl: Nonlinearity<T>, d: T) -> Result<Self> {
        Ok(Self {
            kernel,
            nl,
            d,
            grid: Grid::new(of(30.0), 8192)?,
            dt: of(0.17),
            t_end: of(1000.0),
            record_stride: 10,
            clamp_fraction: of(0.05),
            margin: of(5.0),
            blowup: of(5.0),
        })
    }

    /// Spectral radius bound S = sup|d(K̂ − 1)| + sup|f′| on [−0.2, 1.2]:
    /// forward Euler needs dt·S ≤ 2.
    pub fn rate_bound(&self) -> T {
        let symbol = unpin_core::Convolver::new(&self.kernel, self.grid.clone()).symbol_samples();
        let linear = symbol.iter().fold(T::zero(), |m, s| m.max(((*s - T::one()) * self.d).norm()));
        let reaction = (0..=1400).fold(T::zero(), |m, k| {
            let u = of::<T>(-0.2 + 1.4 * k as f64 / 1400.0);
            m.max(self.nl.f1(u).abs())
        });
        linear + reaction
    }

    pub fn check(&self) -> Result<()> {
        if !(self.d >= T::zero()) {
            return Err(Error::Parameter(format!("d must be nonnegative, got {}", to64(self.d))));
        }
        if !(self.dt > T::zero() && self.t_end >= T::zero()) || self.record_stride == 0 {
            return Err(Error::Parameter("dt > 0, t_end ≥ 0 and record_stride ≥ 1 required".into()));
        }
        let factor = self.dt * self.rate_bound();
        if !(factor <= of(2.0)) {
            return Err(Error::Stability(format!(
                "dt·S = {:.4} exceeds 2 (dt = {}, largest stable dt = {:.4})",
                to64(factor),
                to64(self.dt),
                to64(of::<T>(2.0) / self.rate_bound())
            )));
        }
        Ok(())
    }

    /// Copy with dt lowered, if needed, to 90% of the stability limit.
    pub fn with_stable_dt(mut self) -> Self {
        let limit = of::<T>(1.8) / self.rate_bound();
        if self.dt > limit {
            self.dt = limit;
        }
        self
    }

    fn clamp_width(&self) -> usize {
        (to64(self.clamp_fraction) * self.grid.n as f64).ceil() as usize
    }

    /// Fronts closer than this to either end are no longer recorded.
    fn recording_limit(&self) -> T {
        let clamp = of::<T>(self.clamp_width() as f64) * self.grid.dx;
        self.grid.half_length - clamp - self.margin
    }
}

/// The default initial front (1 − tanh(x/2))/2.
pub fn tanh_front<T: Real>(grid: &Grid<T>) -> Vec<T> {
    grid.points().into_iter().map(reference_front).collect()
}

/// A running simulation; `advance` can be called repeatedly to extend it.
pub struct Simulation<T: Real> {
    cfg: SimConfig<T>,
    conv: FrontConvolver<T>,
    scratch: ConvScratch<T>,
    u: Vec<T>,
    ku: Vec<T>,
    steps: usize,
    track: FrontTrack<T>,
    left_window: bool,
}

impl<T: Real> Simulation<T> {
    pub fn new(cfg: SimConfig<T>, u0: Vec<T>) -> Result<Self> {
        cfg.check()?;
        if u0.len() != cfg.grid.n {
            return Err(Error::Parameter(format!("initial data has {} samples, grid has {}", u0.len(), cfg.grid.n)));
        }
        let (lo, hi) = (of::<T>(-0.2), of::<T>(1.2));
        if u0.iter().any(|&v| !(v >= lo && v <= hi)) {
            return Err(Error::Parameter("initial data must lie in [−0.2, 1.2]".into()));
        }
        let conv = FrontConvolver::new(&cfg.kernel, cfg.grid.clone());
        let scratch = conv.scratch();
        let n = cfg.grid.n;
        let mut sim = Self { cfg, conv, scratch, u: u0, ku: vec![T::zero(); n], steps: 0, track: FrontTrack::default(), left_window: false };
        sim.clamp();
        sim.record();
        Ok(sim)
    }

    pub fn config(&self) -> &SimConfig<T> {
        &self.cfg
    }

    pub fn time(&self) -> T {
        of::<T>(self.steps as f64) * self.cfg.dt
    }

    pub fn state(&self) -> &[T] {
        &self.u
    }

    pub fn track(&self) -> &FrontTrack<T> {
        &self.track
    }

    /// True once the front has come within the margin of a clamp zone;
    /// nothing further is recorded after that.
    pub fn left_window(&self) -> bool {
        self.left_window
    }

    fn clamp(&mut self) {
        let m = self.cfg.clamp_width();
        let n = self.u.len();
        self.u[..m].fill(T::one());
        self.u[n - m..].fill(T::zero());
    }

    fn record(&mut self) {
        let Some(x) = front_position(&self.cfg.grid, &self.u) else {
            self.left_window = true;
            return;
        };
        if x.abs() > self.cfg.recording_limit() {
            self.left_window = true;
            return;
        }
        let t = self.time();
        self.track.push(t, x);
    }

    pub fn step(&mut self) -> Result<()> {
        self.conv.convolve_with(&self.u, &mut self.ku, &mut self.scratch);
        let (d, dt, nl) = (self.cfg.d, self.cfg.dt, &self.cfg.nl);
        let mut peak = T::zero();
        for (u, &k) in self.u.iter_mut().zip(&self.ku) {
            *u += dt * (d * (k - *u) + nl.f0(*u));
            peak = peak.max(u.abs());
        }
        self.steps += 1;
        if !(peak <= self.cfg.blowup) {
            return Err(Error::BlowUp { t: to64(self.time()), bound: to64(self.cfg.blowup) });
        }
        self.clamp();
        Ok(())
    }

    /// Step until `t_end` (or until the front leaves the recording window).
    pub fn advance(&mut self, t_end: T) -> Result<()> {
        let target = (to64(t_end / self.cfg.dt) - 1e-9).ceil().max(0.0) as usize;
        while self.steps < target && !self.left_window {
            self.step()?;
            if self.steps % self.cfg.record_stride == 0 {
                self.record();
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Evolution<T> {
    pub track: FrontTrack<T>,
    pub state: Vec<T>,
    pub t: T,
    pub steps: usize,
    pub left_window: bool,
}

/// Run `cfg` from `u0` up to `cfg.t_end`.
pub fn evolve<T: Real>(cfg: &SimConfig<T>, u0: Vec<T>) -> Result<Evolution<T>> {
    let mut sim = Simulation::new(cfg.clone(), u0)?;
    sim.advance(cfg.t_end)?;
    Ok(Evolution { t: sim.time(), steps: sim.steps, left_window: sim.left_window, state: sim.u, track: sim.track })
}

/// Policy for measuring one speed: the run is doubled in length until the
/// retained window is clean or the cap is hit.
#[derive(Debug, Clone, Copy)]
pub struct MeasureOptions<T> {
    pub discard: T,
    pub min_samples: usize,
    /// Minimum front travel over the retained window, in grid cells.
    pub min_travel_cells: T,
    pub r2_min: T,
    pub t_cap: T,
}

impl<T: Real> Default for MeasureOptions<T> {
    fn default() -> Self {
        Self { discard: of(0.3), min_samples: 100, min_travel_cells: of(20.0), r2_min: of(0.999), t_cap: of(4.0e4) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpeedMeasurement {
    pub speed: f64,
    pub r2: f64,
    pub residual_std: f64,
    pub samples: usize,
    pub t_end: f64,
    pub dt: f64,
    /// Whether the retained window met every cleanliness requirement.
    pub converged: bool,
    /// The front did not move at all: pinned, possibly by the grid itself.
    pub stationary: bool,
}

/// Front speed from the tanh initial front, extending the run as needed.
pub fn measure<T: Real>(cfg: &SimConfig<T>, opts: &MeasureOptions<T>) -> Result<SpeedMeasurement> {
    let mut sim = Simulation::new(cfg.clone(), tanh_front(&cfg.grid))?;
    let mut t_end = cfg.t_end.min(opts.t_cap);
    loop {
        sim.advance(t_end)?;
        let fit = measure_speed(sim.track(), opts.discard);
        let clean = fit.as_ref().is_ok_and(|f| {
            let travel = f.speed.abs() * (f.t_last - f.t_first) / sim.cfg.grid.dx;
            f.samples >= opts.min_samples && f.r2 >= opts.r2_min && travel >= opts.min_travel_cells
        });
        // Locked to the grid: less than a millionth of a cell over the window.
        let stationary = fit.as_ref().is_ok_and(|f| {
            f.samples >= opts.min_samples && f.speed.abs() * (f.t_last - f.t_first) < of::<T>(1e-6) * sim.cfg.grid.dx
        });
        if clean || stationary || sim.left_window() || t_end >= opts.t_cap {
            let f = fit?;
            return Ok(SpeedMeasurement {
                speed: if stationary { 0.0 } else { to64(f.speed) },
                r2: to64(f.r2),
                residual_std: to64(f.residual_std),
                samples: f.samples,
                t_end: to64(sim.time()),
                dt: to64(cfg.dt),
                converged: clean || stationary,
                stationary,
            });
        }
        t_end = (t_end * of(2.0)).min(opts.t_cap);
    }
}

pub type SimConfig64 = SimConfig<f64>;
pub type FrontTrack64 = FrontTrack<f64>;
