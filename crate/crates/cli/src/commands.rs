use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use unpin_core::pinning::{boundary_closed, boundary_numeric, boundary_onesided, Orientation};
use unpin_core::slowfast::{c0_constant, omega0, omega0_residual, prefactor, Regime};
use unpin_core::kernels::KernelKind;
use unpin_core::{Error, Grid};
use unpin_fitting::{beta_scan, mu_grid, powerlaw_fit, speed_scan, BetaScanOptions, ScanPoint};
use unpin_sim::{evolve, measure_speed, tanh_front, SimConfig};
use unpin_wave::{newton_wave, shoot_2d, shoot_3d, solve_speed_2d, solve_speed_3d, Guess, NewtonOptions, ShootOptions};

use crate::args::*;
use crate::output::{emit, parse_num, to_json, write_atomic, Cell, Format, Table};
use crate::presets::{self, ScanPreset};
use crate::CliError;

/// What a command produced, for the metadata record.
#[derive(Debug, Default)]
pub struct Report {
    pub outputs: Vec<PathBuf>,
    pub notes: Vec<String>,
    /// Echoed on stdout.
    pub summary: Option<Value>,
}

impl Report {
    fn table(&mut self, dir: &Path, name: &str, table: &Table) -> Result<(), CliError> {
        self.outputs.push(emit(table, Format::Csv, &dir.join(name))?);
        Ok(())
    }

    fn json<S: Serialize>(&mut self, dir: &Path, name: &str, value: &S) -> Result<(), CliError> {
        let path = dir.join(name);
        write_atomic(&path, &to_json(value))?;
        self.outputs.push(path);
        Ok(())
    }
}

pub fn pinning(args: &PinningArgs, dir: &Path) -> Result<Report, CliError> {
    let mut t = Table::new(&["d", "a_minus", "a_plus", "provenance", "residual"]);
    for d in args.d_range.linear() {
        let (am, ap, prov, res) = match args.nonlinearity {
            BoundaryFamily::Onesided => {
                if args.numeric {
                    return Err(CliError::Usage("--numeric applies to the symmetric-kernel families only".into()));
                }
                if !(d > 0.0 && d <= 1.0 / 16.0) {
                    return Err(Error::OutsidePinningRegime { d }.into());
                }
                let am = 2.0 * d.sqrt();
                let res = (boundary_onesided(am, Orientation::OneToZero) - d).abs();
                (am, 1.0 - am, "closed_form".to_string(), res)
            }
            family => {
                let nl = if family == BoundaryFamily::Pwl { NlKind::Pwl } else { NlKind::Cubic }.build(0.5);
                let b = if args.numeric { boundary_numeric(&nl, d)? } else { boundary_closed(&nl, d)? };
                let prov = serde_json::to_value(b.provenance).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                (b.a_minus, b.a_plus, prov, b.residual)
            }
        };
        t.push(vec![d.into(), am.into(), ap.into(), prov.into(), res.into()]);
    }
    let mut r = Report::default();
    r.table(dir, "pinning.csv", &t)?;
    Ok(r)
}

pub fn constants(args: &ConstantsArgs, dir: &Path) -> Result<Report, CliError> {
    let d = args.d;
    let om = omega0::<f64>();
    let generic = prefactor(Regime::GenericSymmetric, d).ok();
    let onesided = prefactor(Regime::OneSided, d).ok();
    let kc = prefactor::<f64>(Regime::CriticalTip, 0.25)?;
    let summary = json!({
        "d": d,
        "omega0": om,
        "omega0_residual": omega0_residual(om),
        "c0": c0_constant::<f64>()?,
        "k1": generic.map(|l| l.prefactor),
        "kc": kc.prefactor,
        "k2": onesided.map(|l| l.prefactor),
        "a_boundary": {
            "generic": generic.map(|l| l.boundary_a),
            "critical": kc.boundary_a,
            "one_sided": onesided.map(|l| l.boundary_a),
        },
        "exponents": { "generic": 1.5, "critical": 1.25, "one_sided": 1.5, "smooth": 1.0 },
    });
    let mut r = Report::default();
    r.json(dir, "constants.json", &summary)?;
    r.summary = Some(summary);
    Ok(r)
}

pub fn wave(args: &WaveArgs, dir: &Path) -> Result<Report, CliError> {
    let nl = args.nonlinearity.build(args.a);
    let mut r = Report::default();
    match args.method {
        WaveMethod::Newton => {
            let mut opts = NewtonOptions::default();
            if let Some(g) = args.grid {
                opts.half_length = g.half_length;
                opts.spectral_n = g.n;
                opts.h_max = opts.h_max.max(2.0 * g.half_length / g.n as f64);
            }
            let sol = newton_wave(&args.kernel, &nl, args.d, &Guess::tanh(args.c_guess), &opts)?;
            let mut t = Table::new(&["x", "u"]);
            for (&x, &u) in sol.x.iter().zip(&sol.u) {
                t.push(vec![x.into(), u.into()]);
            }
            r.table(dir, "wave_profile.csv", &t)?;
            let summary = serde_json::to_value(sol.summary()).expect("summary serializes");
            r.json(dir, "wave.json", &summary)?;
            r.summary = Some(summary);
        }
        WaveMethod::Shoot => {
            let opts = ShootOptions::default();
            let (c, miss, method) = match args.kernel.kind {
                KernelKind::Exp2 => {
                    let c = solve_speed_3d(&nl, args.d, &opts)?;
                    (c, shoot_3d(&nl, args.d, c, &opts)?.miss, "shoot3d")
                }
                KernelKind::OneSided1 => {
                    let c = solve_speed_2d(&nl, args.d, &opts)?;
                    (c, shoot_2d(&nl, args.d, c, &opts)?.miss, "shoot2d")
                }
                _ => return Err(CliError::Usage(format!("shooting needs exp2 or onesided1, got {}", args.kernel))),
            };
            let summary = json!({ "kernel": args.kernel.name(), "a": args.a, "d": args.d, "c": c, "residual": miss.abs(), "method": method });
            r.notes.push("shooting yields the speed only; no profile is written".into());
            r.json(dir, "wave.json", &summary)?;
            r.summary = Some(summary);
        }
    }
    Ok(r)
}

pub fn simulate(args: &SimulateArgs, dir: &Path) -> Result<Report, CliError> {
    let mut cfg = SimConfig::new(args.kernel, args.nonlinearity.build(args.a), args.d)?;
    cfg.grid = Grid::new(args.grid.half_length, args.grid.n)?;
    cfg.dt = args.dt;
    cfg.t_end = args.tend;
    let ev = evolve(&cfg, tanh_front(&cfg.grid))?;
    let fit = measure_speed(&ev.track, args.discard)?;
    let mut t = Table::new(&["t", "x_front"]);
    for (&tk, &x) in ev.track.times.iter().zip(&ev.track.positions) {
        t.push(vec![tk.into(), x.into()]);
    }
    let mut r = Report::default();
    r.table(dir, "simulate_track.csv", &t)?;
    let summary = json!({
        "speed": fit.speed,
        "r2": fit.r2,
        "residual_std": fit.residual_std,
        "samples": fit.samples,
        "transient": fit.transient,
        "t_end": ev.t,
        "dt": cfg.dt,
        "left_window": ev.left_window,
    });
    if fit.transient {
        r.notes.push(format!("transient not converged: r2 = {}", fit.r2));
    }
    r.json(dir, "simulate.json", &summary)?;
    r.summary = Some(summary);
    Ok(r)
}

fn scan_table(points: &[ScanPoint]) -> Table {
    let mut t = Table::new(&["mu", "c", "method"]);
    for p in points {
        t.push(vec![p.mu.into(), p.c.into(), p.method.name().into()]);
    }
    t
}

fn point_notes(points: &[ScanPoint]) -> Vec<String> {
    points.iter().filter_map(|p| p.note.as_ref().map(|n| format!("mu = {}: {n}", p.mu))).collect()
}

fn all_failed(points: &[ScanPoint]) -> Option<CliError> {
    (!points.is_empty() && points.iter().all(|p| p.c.is_nan())).then(|| {
        let why = points[0].note.clone().unwrap_or_default();
        CliError::Numerical { kind: "ScanFailed".into(), message: format!("no point of the scan succeeded; first: {why}") }
    })
}

pub fn scan(args: &ScanArgs, dir: &Path) -> Result<Report, CliError> {
    let mus = mu_grid(args.mu_grid.lo, args.mu_grid.hi, args.mu_grid.n)?;
    let mut opts = presets::scan_options();
    if let Some(g) = args.grid {
        opts.half_length = g.half_length;
        opts.n = g.n;
        opts.continuation.newton.half_length = g.half_length;
        opts.continuation.newton.spectral_n = g.n;
    }
    let points = speed_scan(&args.kernel, &args.nonlinearity.build(0.5), args.d, &mus, args.method.into(), &opts)?;
    let mut r = Report { notes: point_notes(&points), ..Default::default() };
    r.table(dir, "scan.csv", &scan_table(&points))?;
    match all_failed(&points) {
        Some(e) => Err(e),
        None => Ok(r),
    }
}

fn read_scan(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let headers = rd.headers().map_err(|e| CliError::Usage(e.to_string()))?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| CliError::Usage(format!("{}: no '{name}' column", path.display())))
    };
    let (im, ic) = (col("mu")?, col("c")?);
    let mut out = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Usage(e.to_string()))?;
        let get = |i: usize| {
            rec.get(i).and_then(parse_num).ok_or_else(|| CliError::Usage(format!("{}: bad number on data row {}", path.display(), line + 1)))
        };
        out.push((get(im)?, get(ic)?));
    }
    Ok(out)
}

pub fn fit(args: &FitArgs, dir: &Path) -> Result<Report, CliError> {
    let mut samples = read_scan(&args.input)?;
    let total = samples.len();
    if args.moving_only {
        samples.retain(|&(_, c)| c > 0.0 && c.is_finite());
    }
    let fit = powerlaw_fit(&samples, args.window)?;
    let mut value = serde_json::to_value(fit).expect("fit serializes");
    value["samples"] = json!(samples.len());
    value["dropped"] = json!(total - samples.len());
    let mut r = Report::default();
    r.json(dir, "fit.json", &value)?;
    r.summary = Some(value);
    Ok(r)
}

fn beta_tables(rows: &[unpin_fitting::BetaRow]) -> (Table, Table) {
    let mut fits = Table::new(&["beta", "gamma", "gamma_lo", "gamma_hi", "k", "kernel", "pinned"]);
    let mut pts = Table::new(&["kernel", "beta", "mu", "c", "method"]);
    for row in rows {
        let f = row.fit;
        let g = |v: Option<f64>| Cell::Num(v.unwrap_or(f64::NAN));
        fits.push(vec![
            row.beta.into(),
            g(f.map(|f| f.gamma)),
            g(f.map(|f| f.gamma_lo)),
            g(f.map(|f| f.gamma_hi)),
            g(f.map(|f| f.k)),
            row.kernel.clone().into(),
            row.pinned.into(),
        ]);
        for p in &row.points {
            pts.push(vec![row.kernel.clone().into(), row.beta.into(), p.mu.into(), p.c.into(), p.method.name().into()]);
        }
    }
    (fits, pts)
}

fn run_beta_scan(
    betas: &[f64],
    d: f64,
    mus: &[f64],
    method: unpin_fitting::Method,
    opts: &BetaScanOptions,
    dir: &Path,
    stem: &str,
) -> Result<Report, CliError> {
    let rows = beta_scan(betas, d, mus, method, opts)?;
    let (fits, pts) = beta_tables(&rows);
    let mut r = Report::default();
    r.notes = rows.iter().filter_map(|row| row.error.as_ref().map(|e| format!("{}: {e}", row.kernel))).collect();
    r.table(dir, &format!("{stem}.csv"), &fits)?;
    r.table(dir, &format!("{stem}_points.csv"), &pts)?;
    if rows.iter().all(|row| row.fit.is_none()) {
        return Err(CliError::Numerical { kind: "BetaScanFailed".into(), message: r.notes.join("; ") });
    }
    Ok(r)
}

pub fn beta_scan_cmd(args: &BetaScanArgs, dir: &Path) -> Result<Report, CliError> {
    let mus = mu_grid(args.mu_grid.lo, args.mu_grid.hi, args.mu_grid.n)?;
    let opts = BetaScanOptions {
        scan: presets::scan_options(),
        window: args.window,
        perturbations: args.perturbations.iter().map(|&p| p.into()).collect(),
        check_boundary: args.check_boundary,
    };
    run_beta_scan(&args.betas, args.d, &mus, args.method.into(), &opts, dir, "beta_scan")
}

fn measured(p: &ScanPreset, notes: &mut Vec<String>) -> (Vec<ScanPoint>, Option<unpin_fitting::PowerLawFit<f64>>) {
    match p.run() {
        Ok(points) => {
            notes.extend(point_notes(&points).into_iter().map(|n| format!("{}: {n}", p.label)));
            let fit = p.fit(&points).map_err(|e| notes.push(format!("{}: fit failed: {e}", p.label))).ok();
            (points, fit)
        }
        Err(e) => {
            notes.push(format!("{}: {e}", p.label));
            (Vec::new(), None)
        }
    }
}

pub fn repro(args: &ReproArgs, dir: &Path) -> Result<Report, CliError> {
    let mut r = Report::default();
    let pick = |v: Vec<ScanPreset>| -> Vec<ScanPreset> { if args.quick { v.into_iter().map(ScanPreset::quick).collect() } else { v } };
    match args.preset {
        Preset::Table1 => {
            let mut header = vec!["row", "kernel", "d", "method", "k_p", "s_p"];
            if args.measure {
                header.extend(["k_m", "s_m", "s_lo", "s_hi"]);
            }
            let mut t = Table::new(&header);
            for p in pick(presets::table1()) {
                let mut row: Vec<Cell> = vec![
                    p.label.into(),
                    p.kernel.name().into(),
                    p.d.into(),
                    p.method.name().into(),
                    p.k_p().unwrap_or(f64::NAN).into(),
                    p.s_p.into(),
                ];
                if args.measure {
                    let (_, fit) = measured(&p, &mut r.notes);
                    let g = |v: Option<f64>| Cell::Num(v.unwrap_or(f64::NAN));
                    row.extend([g(fit.map(|f| f.k)), g(fit.map(|f| f.gamma)), g(fit.map(|f| f.gamma_lo)), g(fit.map(|f| f.gamma_hi))]);
                }
                t.push(row);
            }
            r.table(dir, "repro_table1.csv", &t)?;
        }
        Preset::Table2 => {
            let mut t = Table::new(&["kernel", "d", "s_m", "s_lo", "s_hi", "k_m", "s_p"]);
            for p in pick(presets::table2()) {
                let (_, fit) = measured(&p, &mut r.notes);
                let g = |v: Option<f64>| Cell::Num(v.unwrap_or(f64::NAN));
                t.push(vec![
                    p.kernel.name().into(),
                    p.d.into(),
                    g(fit.map(|f| f.gamma)),
                    g(fit.map(|f| f.gamma_lo)),
                    g(fit.map(|f| f.gamma_hi)),
                    g(fit.map(|f| f.k)),
                    p.s_p.into(),
                ]);
            }
            r.table(dir, "repro_table2.csv", &t)?;
        }
        Preset::Fig7 => {
            let mut t = Table::new(&["kernel", "d", "mu", "c", "method"]);
            for p in pick(presets::fig7()) {
                let (points, _) = measured(&p, &mut r.notes);
                for q in points {
                    t.push(vec![p.kernel.name().into(), p.d.into(), q.mu.into(), q.c.into(), q.method.name().into()]);
                }
            }
            r.table(dir, "repro_fig7.csv", &t)?;
        }
        Preset::Fig8 => {
            let b = presets::fig8(args.quick);
            r.notes.push(format!("beta grid {:?}, mu {}:{}:{}, d = {}", b.betas, b.mu_lo, b.mu_hi, b.n, b.d));
            let inner = run_beta_scan(&b.betas, b.d, &b.mus(), unpin_fitting::Method::Sim, &b.options(), dir, "repro_fig8")?;
            r.outputs.extend(inner.outputs);
            r.notes.extend(inner.notes);
        }
    }
    Ok(r)
}
