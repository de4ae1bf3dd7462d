//! Speed scans over a μ-grid and the β-regularity scan.

use rayon::prelude::*;
use serde::Serialize;
use unpin_core::kernels::{KernelKind, Perturbation};
use unpin_core::nonlinearity::Family;
use unpin_core::pinning::boundary_numeric;
use unpin_core::{Error, Grid, KernelSpec, Nonlinearity, Result};
use unpin_sim::{measure, MeasureOptions, SimConfig};
use unpin_wave::{continuation, solve_speed_2d, solve_speed_3d, ContinuationOptions, ShootOptions, StopReason};

use crate::powerlaw::{powerlaw_fit, PowerLawFit, WindowPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Sim,
    Newton,
    /// Shooting in the ODE reduction of a rational kernel.
    Shoot,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sim" => Ok(Method::Sim),
            "newton" => Ok(Method::Newton),
            "shoot" => Ok(Method::Shoot),
            _ => Err(Error::Parameter(format!("method must be 'sim', 'newton' or 'shoot', got '{s}'"))),
        }
    }
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Sim => "sim",
            Method::Newton => "newton",
            Method::Shoot => "shoot",
        }
    }
}

/// Geometric grid of `n ≥ 2` points from `lo` to `hi`.
pub fn mu_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || n < 2 {
        return Err(Error::Parameter(format!("mu grid needs 0 < lo < hi and n ≥ 2, got {lo}:{hi}:{n}")));
    }
    let r = (hi / lo).ln() / (n - 1) as f64;
    Ok((0..n).map(|k| if k == n - 1 { hi } else { lo * (r * k as f64).exp() }).collect())
}

/// Detuning at which fronts stop moving, approached from below: the lower
/// area-balance boundary for d < 1/4, the balanced value 1/2 beyond the
/// tip, and 2√d for the one-sided kernel.
pub fn boundary_a(kernel: &KernelSpec, nl: &Nonlinearity<f64>, d: f64) -> Result<f64> {
    if matches!(kernel.kind, KernelKind::OneSided1) {
        if !(d > 0.0 && d < 0.25) {
            return Err(Error::Unsupported(format!("one-sided boundary needs 0 < d < 1/4, got {d}")));
        }
        return Ok(2.0 * d.sqrt());
    }
    if !kernel.is_symmetric() {
        return Err(Error::Unsupported(format!("no pinning boundary for kernel {}", kernel.name())));
    }
    if d >= 0.25 {
        return match nl.family {
            Family::Cubic | Family::PiecewiseLinear => Ok(0.5),
            Family::Custom(_) => Err(Error::Unsupported("balanced detuning unknown for a custom nonlinearity".into())),
        };
    }
    Ok(boundary_numeric(nl, d)?.a_minus)
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint {
    pub mu: f64,
    pub a: f64,
    pub c: f64,
    pub method: Method,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ScanPoint {
    pub fn moving(&self) -> bool {
        self.c > 0.0 && self.c.is_finite()
    }
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub half_length: f64,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub measure: MeasureOptions<f64>,
    pub continuation: ContinuationOptions<f64>,
    pub shoot: ShootOptions<f64>,
    /// Newton scans start at this μ (or the largest requested) from the tanh guess.
    pub lead_in_mu: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            half_length: 30.0,
            n: 8192,
            dt: 0.17,
            t_end: 1000.0,
            measure: MeasureOptions::default(),
            continuation: ContinuationOptions::default(),
            shoot: ShootOptions::default(),
            lead_in_mu: 3e-2,
        }
    }
}

fn sim_point(kernel: &KernelSpec, nl: &Nonlinearity<f64>, d: f64, a_b: f64, mu: f64, opts: &ScanOptions) -> ScanPoint {
    let a = a_b - mu;
    let run = || -> Result<_> {
        let mut cfg = SimConfig::new(*kernel, nl.with_a(a), d)?;
        cfg.grid = Grid::new(opts.half_length, opts.n)?;
        cfg.dt = opts.dt;
        cfg.t_end = opts.t_end;
        measure(&cfg.with_stable_dt(), &opts.measure)
    };
    match run() {
        Ok(m) => ScanPoint {
            mu,
            a,
            c: m.speed,
            method: Method::Sim,
            converged: m.converged,
            note: if m.stationary {
                Some("front did not move".into())
            } else {
                (!m.converged).then(|| format!("unclean window (r2 = {:.6}, t = {:.0})", m.r2, m.t_end))
            },
        },
        Err(e) => ScanPoint { mu, a, c: f64::NAN, method: Method::Sim, converged: false, note: Some(e.to_string()) },
    }
}

fn newton_points(kernel: &KernelSpec, nl: &Nonlinearity<f64>, d: f64, a_b: f64, mus: &[f64], opts: &ScanOptions) -> Vec<ScanPoint> {
    let mut order: Vec<usize> = (0..mus.len()).collect();
    order.sort_by(|&i, &j| mus[j].total_cmp(&mus[i]));
    let top = mus[order[0]];
    let mut path: Vec<f64> = Vec::new();
    if opts.lead_in_mu > top {
        let lead = mu_grid(top, opts.lead_in_mu, 6).unwrap_or_default();
        path.extend(lead.iter().rev().take(5).map(|m| a_b - m));
    }
    let lead_len = path.len();
    path.extend(order.iter().map(|&i| a_b - mus[i]));
    let mut out: Vec<ScanPoint> = mus
        .iter()
        .map(|&mu| ScanPoint { mu, a: a_b - mu, c: f64::NAN, method: Method::Newton, converged: false, note: None })
        .collect();
    match continuation(kernel, &nl.with_a(path[0]), d, &path, &opts.continuation) {
        Ok(run) => {
            let reached = run.solutions.len().saturating_sub(lead_len);
            for (s, &i) in run.solutions.iter().skip(lead_len).zip(&order) {
                out[i].c = s.c;
                out[i].converged = true;
            }
            if run.stop != StopReason::Completed {
                for &i in &order[reached.min(order.len())..] {
                    out[i].note = Some(format!("continuation stopped: {:?}", run.stop));
                }
            }
        }
        Err(e) => out.iter_mut().for_each(|p| p.note = Some(e.to_string())),
    }
    out
}

fn shoot_point(kernel: &KernelSpec, nl: &Nonlinearity<f64>, d: f64, a_b: f64, mu: f64, opts: &ShootOptions<f64>) -> ScanPoint {
    let a = a_b - mu;
    let nl = nl.with_a(a);
    let c = match kernel.kind {
        KernelKind::Exp2 => solve_speed_3d(&nl, d, opts),
        _ => solve_speed_2d(&nl, d, opts),
    };
    match c {
        Ok(c) => ScanPoint { mu, a, c, method: Method::Shoot, converged: true, note: None },
        Err(e) => ScanPoint { mu, a, c: f64::NAN, method: Method::Shoot, converged: false, note: Some(e.to_string()) },
    }
}

/// Shoots from the largest μ down. Each bracket search is centred on the
/// speed extrapolated from the last two solved points: an unguided search
/// from large c runs into stiff, unintegrable shots long before it reaches
/// the tiny speeds near the boundary.
fn shoot_points(kernel: &KernelSpec, nl: &Nonlinearity<f64>, d: f64, a_b: f64, mus: &[f64], opts: &ShootOptions<f64>) -> Vec<ScanPoint> {
    let mut order: Vec<usize> = (0..mus.len()).collect();
    order.sort_by(|&i, &j| mus[j].total_cmp(&mus[i]));
    let mut out: Vec<Option<ScanPoint>> = vec![None; mus.len()];
    let mut solved: Vec<(f64, f64)> = Vec::new();
    for i in order {
        let mu = mus[i];
        let hint = match solved.as_slice() {
            [.., (m0, c0), (m1, c1)] => {
                let s = (c1 / c0).ln() / (m1 / m0).ln();
                Some(c1 * (mu / m1).powf(s.clamp(0.5, 3.0)))
            }
            [(m1, c1)] => Some(c1 * (mu / m1).powf(1.5)),
            [] => None,
        };
        let mut o = *opts;
        if opts.c_hint.is_none() {
            o.c_hint = hint.filter(|h| h.is_finite() && *h > o.c_min);
        }
        let mut p = shoot_point(kernel, nl, d, a_b, mu, &o);
        if !p.converged && o.c_hint.is_some() && opts.c_hint.is_none() {
            // a poor extrapolation should not hide a point the plain search finds
            let retry = shoot_point(kernel, nl, d, a_b, mu, opts);
            if retry.converged {
                p = retry;
            }
        }
        if p.converged && p.c > 0.0 {
            solved.push((p.mu, p.c));
        }
        out[i] = Some(p);
    }
    out.into_iter().map(|p| p.expect("every index visited")).collect()
}

/// Speeds at a = boundary − μ for each μ, in input order. Failed points carry
/// c = NaN and a note instead of aborting the scan.
pub fn speed_scan(
    kernel: &KernelSpec,
    nl: &Nonlinearity<f64>,
    d: f64,
    mus: &[f64],
    method: Method,
    opts: &ScanOptions,
) -> Result<Vec<ScanPoint>> {
    if mus.is_empty() || mus.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::Parameter("mu values must be positive and non-empty".into()));
    }
    let a_b = boundary_a(kernel, nl, d)?;
    Ok(match method {
        Method::Sim => mus.par_iter().map(|&mu| sim_point(kernel, nl, d, a_b, mu, opts)).collect(),
        Method::Newton => newton_points(kernel, nl, d, a_b, mus, opts),
        Method::Shoot => {
            if !matches!(kernel.kind, KernelKind::Exp2 | KernelKind::OneSided1) {
                return Err(Error::Unsupported(format!("shooting needs exp2 or onesided1, got {}", kernel.name())));
            }
            shoot_points(kernel, nl, d, a_b, mus, &opts.shoot)
        }
    })
}

pub fn fit_points(points: &[ScanPoint], policy: WindowPolicy) -> Result<PowerLawFit<f64>> {
    let samples: Vec<(f64, f64)> = points.iter().map(|p| (p.mu, p.c)).collect();
    powerlaw_fit(&samples, policy)
}

/// Coarse bisection in a for the onset of motion in direct simulation: the
/// front counts as pinned when it drifts slower than `c_pinned`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundaryCheck {
    pub area_balance: f64,
    pub located: f64,
    pub resolution: f64,
}

pub fn locate_boundary(kernel: &KernelSpec, nl: &Nonlinearity<f64>, d: f64, opts: &ScanOptions) -> Result<BoundaryCheck> {
    let a_b = boundary_a(kernel, nl, d)?;
    const C_PINNED: f64 = 2e-5;
    let moving = |a: f64| -> Result<bool> {
        let mut cfg = SimConfig::new(*kernel, nl.with_a(a), d)?;
        cfg.grid = Grid::new(opts.half_length, opts.n)?;
        cfg.dt = opts.dt;
        cfg.t_end = 2000.0;
        let cfg = cfg.with_stable_dt();
        let ev = unpin_sim::evolve(&cfg, unpin_sim::tanh_front(&cfg.grid))?;
        Ok(ev.left_window || unpin_sim::measure_speed(&ev.track, 0.3)?.speed > C_PINNED)
    };
    let (mut lo, mut hi) = (a_b - 0.02, a_b + 0.02);
    if !moving(lo)? || moving(hi)? {
        return Err(Error::NoBracket(format!("motion onset not bracketed by a ∈ [{lo}, {hi}]")));
    }
    for _ in 0..5 {
        let mid = 0.5 * (lo + hi);
        if moving(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(BoundaryCheck { area_balance: a_b, located: 0.5 * (lo + hi), resolution: 0.5 * (hi - lo) })
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaRow {
    pub beta: f64,
    pub kernel: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryCheck>,
    pub fit: Option<PowerLawFit<f64>>,
    /// Requested μ at which no motion was measured; excluded from the fit.
    pub pinned: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub points: Vec<ScanPoint>,
}

#[derive(Debug, Clone)]
pub struct BetaScanOptions {
    pub scan: ScanOptions,
    pub window: WindowPolicy,
    pub perturbations: Vec<Perturbation>,
    pub check_boundary: bool,
}

impl Default for BetaScanOptions {
    fn default() -> Self {
        Self { scan: ScanOptions::default(), window: WindowPolicy::default(), perturbations: vec![Perturbation::None], check_boundary: false }
    }
}

/// γ(β) for the (1 + ℓ²)^{−β/2} family, one row per (β, perturbation).
/// Simulation cells are fanned out individually; a failing β is recorded
/// and the scan continues.
pub fn beta_scan(betas: &[f64], d: f64, mus: &[f64], method: Method, opts: &BetaScanOptions) -> Result<Vec<BetaRow>> {
    if let Some(b) = betas.iter().find(|&&b| !(b > 0.0 && b.is_finite())) {
        return Err(Error::Parameter(format!("beta must be positive, got {b}")));
    }
    let nl = Nonlinearity::cubic(0.5);
    let kernels: Vec<(f64, KernelSpec)> = betas
        .iter()
        .flat_map(|&b| opts.perturbations.iter().map(move |&p| (b, KernelSpec::beta_perturbed(b, p))))
        .collect();
    let points: Vec<Result<Vec<ScanPoint>>> = match method {
        Method::Sim => {
            let cells: Vec<(usize, f64)> = (0..kernels.len()).flat_map(|k| mus.iter().map(move |&m| (k, m))).collect();
            let bounds: Vec<Result<f64>> = kernels.iter().map(|(_, k)| boundary_a(k, &nl, d)).collect();
            let done: Vec<ScanPoint> = cells
                .par_iter()
                .filter_map(|&(k, mu)| bounds[k].as_ref().ok().map(|&a_b| sim_point(&kernels[k].1, &nl, d, a_b, mu, &opts.scan)))
                .collect();
            let mut it = done.into_iter();
            bounds
                .into_iter()
                .map(|b| b.map(|_| it.by_ref().take(mus.len()).collect()))
                .collect()
        }
        _ => kernels.par_iter().map(|(_, k)| speed_scan(k, &nl, d, mus, method, &opts.scan)).collect(),
    };
    let checks: Vec<Option<std::result::Result<BoundaryCheck, String>>> = kernels
        .par_iter()
        .map(|(_, k)| opts.check_boundary.then(|| locate_boundary(k, &nl, d, &opts.scan).map_err(|e| e.to_string())))
        .collect();
    Ok(kernels
        .iter()
        .zip(points)
        .zip(checks)
        .map(|(((beta, kernel), pts), check)| {
            let (boundary, check_err) = match check {
                Some(Ok(b)) => (Some(b), None),
                Some(Err(e)) => (None, Some(format!("boundary check: {e}"))),
                None => (None, None),
            };
            match pts {
                Ok(points) => {
                    // Ranks count measured speeds only: at small μ the grid pins
                    // fronts that the continuum problem would let move.
                    let moving: Vec<ScanPoint> = points.iter().filter(|p| p.moving()).cloned().collect();
                    let pinned = points.len() - moving.len();
                    let fit = fit_points(&moving, opts.window);
                    let error = fit.as_ref().err().map(|e| e.to_string()).or(check_err);
                    BetaRow { beta: *beta, kernel: kernel.name(), boundary, fit: fit.ok(), pinned, error, points }
                }
                Err(e) => BetaRow { beta: *beta, kernel: kernel.name(), boundary, fit: None, pinned: 0, error: Some(e.to_string()), points: vec![] },
            }
        })
        .collect())
}
