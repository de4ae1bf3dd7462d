//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! `ACCEPTANCE_ONLY=5,6` restricts the run to a subset. The process fails
//! when the set of failing criteria differs from `KNOWN_RED`, so a newly
//! broken criterion and an unexpectedly fixed one both show up.

use std::collections::BTreeSet;
use std::time::Instant;

use unpin_cli::presets::{fig8, table1, table2, ScanPreset};
use unpin_core::kernels::{convolve, Grid};
use unpin_core::nonlinearity::Branch;
use unpin_core::numerics::linreg::fit_line;
use unpin_core::numerics::ode::Dop853;
use unpin_core::pinning::{boundary_cubic, boundary_cubic_inverse, boundary_numeric, cusp_coefficient};
use unpin_core::slowfast::{c0_levels, hamiltonian_g, omega0, omega0_residual, prefactor, slow_field, Regime};
use unpin_core::{KernelSpec, Nonlinearity};
use unpin_fitting::{beta_scan, powerlaw_fit, BetaRow, Method, PowerLawFit, ScanPoint, WindowPolicy};
use unpin_sim::{evolve, measure, measure_speed, tanh_front, MeasureOptions, SimConfig};
use unpin_wave::{newton_wave, solve_speed_3d, Guess, NewtonOptions, ShootOptions};

/// Perturbation invariance at β ≤ 0.75 is masked by lattice pinning of the
/// singular kernels, and the β = 3 error bars are narrower than the
/// bump-induced shift; see the project notes.
const KNOWN_RED: &[u32] = &[11];

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn fit_of(p: &ScanPreset) -> Result<(PowerLawFit<f64>, Vec<ScanPoint>), String> {
    let pts = p.run().map_err(|e| e.to_string())?;
    let fit = p.fit(&pts).map_err(|e| e.to_string())?;
    Ok((fit, pts))
}

fn row(label: &str) -> ScanPreset {
    table1().into_iter().find(|p| p.label == label).expect("table row exists")
}

fn c1_pinning_tip() -> Outcome {
    let tip = boundary_cubic(0.5f64);
    let mut worst = 0.0f64;
    for d in [0.05f64, 0.1, 0.15, 0.2] {
        let (am, ap) = boundary_cubic_inverse(d).map_err(|e| e.to_string())?;
        let b = boundary_numeric(&Nonlinearity::cubic(0.3), d).map_err(|e| e.to_string())?;
        worst = worst.max((b.a_minus - am).abs()).max((b.a_plus - ap).abs());
    }
    check(tip == 0.25 && worst < 1e-8, format!("d(1/2) = {tip}, numeric vs closed form {worst:.2e}"))
}

fn c2_cusp() -> Outcome {
    let c = cusp_coefficient(&Nonlinearity::cubic(0.3f64)).map_err(|e| e.to_string())?;
    let nl = Nonlinearity::cubic(0.5f64);
    let ds: Vec<f64> = (0..12).map(|i| 0.23 + (0.2499 - 0.23) * i as f64 / 11.0).collect();
    let x: Vec<f64> = ds.iter().map(|d| (0.25 - d) * (0.25 - d)).collect();
    let mut y = Vec::new();
    for &d in &ds {
        y.push(boundary_numeric(&nl, d).map_err(|e| e.to_string())?.a_plus - 0.5);
    }
    let slope = fit_line(&x, &y).slope;
    check(
        (c.a2.abs() - 4.5).abs() < 1e-6 && (slope - 4.5).abs() < 0.05,
        format!("|a2| = {:.9}, fitted opening {slope:.4}", c.a2.abs()),
    )
}

fn c3_omega0() -> Outcome {
    let z: f64 = omega0();
    let r = omega0_residual(z).abs();
    check((z - 2.3381).abs() < 5e-4 && r < 1e-10, format!("Ω0 = {z:.10}, residual {r:.1e}"))
}

fn c4_c0() -> Outcome {
    let est = c0_levels::<f64>().map_err(|e| e.to_string())?;
    let n = est.levels.len();
    let doubling = (est.levels[n - 1].1 - est.levels[n - 2].1).abs();
    check(
        (est.value + 2.6524).abs() < 2e-3 && doubling < 1e-4,
        format!("C0 = {:.6}, change on doubling T {doubling:.1e}", est.value),
    )
}

fn law_check(label: &str, gamma: f64, g_tol: f64, regime: Option<(Regime, f64, f64)>) -> Outcome {
    let p = row(label);
    let (fit, _) = fit_of(&p)?;
    let mut ok = (fit.gamma - gamma).abs() < g_tol;
    let mut detail = format!("γ = {:.4} on [{:.0e}, {:.0e}]", fit.gamma, p.mu_lo, p.mu_hi);
    if let Some((regime, d, k_tol)) = regime {
        let k = prefactor(regime, d).map_err(|e| e.to_string())?.prefactor;
        let r = rel(fit.k, k);
        ok &= r < k_tol;
        detail += &format!(", k = {:.4} vs {k:.4} ({:.1}%)", fit.k, 100.0 * r);
    }
    check(ok, detail)
}

fn c5_generic() -> Outcome {
    law_check("a", 1.5, 0.02, Some((Regime::GenericSymmetric, 0.1, 0.03)))
}

fn c6_critical() -> Outcome {
    law_check("c", 1.25, 0.02, Some((Regime::CriticalTip, 0.25, 0.15)))
}

fn c7_smooth() -> Outcome {
    law_check("d", 1.0, 0.05, None)
}

fn c8_one_sided() -> Outcome {
    let law = law_check("onesided", 1.5, 0.02, Some((Regime::OneSided, 1.0 / 16.0, 0.10)));
    let newton = row("onesided").run().map_err(|e| e.to_string())?;
    let shoot = ScanPreset { method: Method::Shoot, ..row("onesided") }.run().map_err(|e| e.to_string())?;
    let pairs: Vec<(f64, f64)> = newton.iter().zip(&shoot).filter(|(n, s)| n.moving() && s.moving()).map(|(n, s)| (n.c, s.c)).collect();
    let worst = pairs.iter().map(|&(n, s)| rel(n, s)).fold(0.0, f64::max);
    let agree = pairs.len() >= 8 && worst < 1e-3;
    let tail = format!("; newton vs shoot_2d {worst:.1e} over {} points", pairs.len());
    match law {
        Ok(d) => check(agree, d + &tail),
        Err(d) => Err(d + &tail),
    }
}

fn c9_cross_method() -> Outcome {
    let cases = [(0.25, 0.1), (0.3, 0.1), (0.35, 0.1), (0.3, 0.15), (0.2, 0.2), (0.35, 0.2), (0.3, 0.5), (0.4, 0.5), (0.35, 1.0), (0.45, 1.0)];
    let (mut w_shoot, mut w_sim, mut c_min) = (0.0f64, 0.0f64, f64::INFINITY);
    for (a, d) in cases {
        let nl = Nonlinearity::cubic(a);
        let nw = newton_wave(&KernelSpec::EXP2, &nl, d, &Guess::tanh(0.01), &NewtonOptions::default()).map_err(|e| format!("newton at ({a}, {d}): {e}"))?;
        let sh = solve_speed_3d(&nl, d, &ShootOptions::default()).map_err(|e| format!("shoot at ({a}, {d}): {e}"))?;
        let cfg = SimConfig::new(KernelSpec::EXP2, nl, d).map_err(|e| e.to_string())?.with_stable_dt();
        let sim = measure(&cfg, &MeasureOptions::default()).map_err(|e| format!("sim at ({a}, {d}): {e}"))?;
        c_min = c_min.min(nw.c);
        w_shoot = w_shoot.max(rel(nw.c, sh));
        w_sim = w_sim.max(rel(sim.speed, nw.c));
    }
    check(
        c_min > 1e-3 && w_shoot < 1e-3 && w_sim < 0.05,
        format!("10 points, c ≥ {c_min:.2e}: newton vs shoot_3d {w_shoot:.1e}, vs sim {w_sim:.1e}"),
    )
}

fn c10_other_kernels() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for p in table2() {
        let (fit, _) = fit_of(&p)?;
        let (target, tol) = if p.label == "charfn" { (1.40, 0.10) } else { (1.50, 0.05) };
        ok &= (fit.gamma - target).abs() < tol;
        parts.push(format!("{} γ = {:.3}", p.label, fit.gamma));
    }
    check(ok, parts.join(", "))
}

fn base_name(kernel: &str) -> bool {
    kernel.starts_with("beta:")
}

fn c11_beta_scan() -> Outcome {
    let preset = fig8(false);
    let rows = beta_scan(&preset.betas, preset.d, &preset.mus(), Method::Sim, &preset.options()).map_err(|e| e.to_string())?;
    let fit = |r: &BetaRow| r.fit.ok_or_else(|| format!("{}: {}", r.kernel, r.error.clone().unwrap_or_default()));
    let mut base: Vec<(f64, PowerLawFit<f64>)> = Vec::new();
    for r in rows.iter().filter(|r| base_name(&r.kernel)) {
        base.push((r.beta, fit(r)?));
    }
    base.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut problems = Vec::new();
    for (beta, f) in &base {
        if *beta >= 2.0 && (f.gamma - 1.5).abs() >= 0.05 {
            problems.push(format!("β = {beta}: γ = {:.3} off 3/2", f.gamma));
        }
    }
    // Smaller β, larger γ, with disjoint error bars between neighbours.
    for w in base.windows(2) {
        let ((b0, f0), (b1, f1)) = (&w[0], &w[1]);
        if *b1 <= 1.5 && !(f0.gamma_lo > f1.gamma_hi) {
            problems.push(format!("γ({b0}) = {:.3} not above γ({b1}) = {:.3}", f0.gamma, f1.gamma));
        }
    }
    for r in rows.iter().filter(|r| !base_name(&r.kernel)) {
        let f = fit(r)?;
        let Some((_, b)) = base.iter().find(|(beta, _)| *beta == r.beta) else { continue };
        if f.gamma_hi < b.gamma_lo || f.gamma_lo > b.gamma_hi {
            problems.push(format!("{}: [{:.3}, {:.3}] vs base [{:.3}, {:.3}]", r.kernel, f.gamma_lo, f.gamma_hi, b.gamma_lo, b.gamma_hi));
        }
    }
    let summary = base.iter().map(|(b, f)| format!("{b}:{:.3}", f.gamma)).collect::<Vec<_>>().join(" ");
    if problems.is_empty() {
        Ok(format!("γ(β) {summary}"))
    } else {
        Err(format!("γ(β) {summary}; {}", problems.join("; ")))
    }
}

fn hamiltonian_drift(branch: Branch, a: f64, d: f64, start: [f64; 2]) -> Result<f64, String> {
    let energy = |y: &[f64; 2]| hamiltonian_g(y[0], branch, a, d).map(|g| y[1] * y[1] / 2.0 + g).map_err(|e| e.to_string());
    let h0 = energy(&start)?;
    let sol = Dop853 { dense: true, ..Dop853::<f64>::tolerances(1e-12, 1e-14) }
        .solve(|_, y: &[f64; 2]| slow_field(y[0], y[1], branch, a, d).unwrap_or([f64::NAN; 2]), 0.0, start, 10.0, &[])
        .map_err(|e| e.to_string())?;
    sol.y.iter().try_fold(0.0f64, |m, y| Ok(m.max((energy(y)? - h0).abs())))
}

fn c12_properties() -> Outcome {
    let mut failures = Vec::new();
    let (a, d) = (0.4f64, 0.1f64);
    let k0 = (a / (a + d)).sqrt();
    let drift = hamiltonian_drift(Branch::Minus, a, d, [1e-5, 1e-5 * k0])?;
    if drift > 1e-8 {
        failures.push(format!("hamiltonian drift {drift:.1e}"));
    }

    let area = [0.05, 0.1, 0.15, 0.2, 0.24]
        .iter()
        .map(|&d| boundary_numeric(&Nonlinearity::cubic(0.3), d).map(|b| b.residual))
        .try_fold(0.0f64, |m, r| r.map(|r| m.max(r)))
        .map_err(|e| e.to_string())?;
    if area > 1e-10 {
        failures.push(format!("area balance {area:.1e}"));
    }

    let g = Grid::<f64>::new(30.0, 1024).map_err(|e| e.to_string())?;
    let mut conv = 0.0f64;
    for k in [KernelSpec::EXP2, KernelSpec::GAUSS, KernelSpec::CHARFN, KernelSpec::FOURTH, KernelSpec::beta(1.0)] {
        conv = convolve(&k, g, &vec![0.7; g.n]).iter().map(|v| (v - 0.7).abs()).fold(conv, f64::max);
    }
    let u: Vec<f64> = g.points().iter().map(|x| (-(x * x)).exp()).collect();
    conv = convolve(&KernelSpec::IDENTITY, g, &u).iter().zip(&u).map(|(v, w)| (v - w).abs()).fold(conv, f64::max);
    let l0 = 7.0 * std::f64::consts::PI / 30.0;
    let cosine: Vec<f64> = g.points().iter().map(|x| (l0 * x).cos()).collect();
    conv = convolve(&KernelSpec::EXP2, g, &cosine).iter().zip(&cosine).map(|(v, w)| (v - w / (1.0 + l0 * l0)).abs()).fold(conv, f64::max);
    if conv > 1e-12 {
        failures.push(format!("convolution identities {conv:.1e}"));
    }

    let samples: Vec<(f64, f64)> = (0..10).map(|i| 1e-3 * 1.6f64.powi(i)).map(|m| (m, 0.5 * m.powf(1.5) * (1.0 + 0.3 * m))).collect();
    let f0 = powerlaw_fit(&samples, WindowPolicy::default()).map_err(|e| e.to_string())?;
    let scaled: Vec<(f64, f64)> = samples.iter().map(|(m, c)| (3.0 * m, 7.0 * c)).collect();
    let f1 = powerlaw_fit(&scaled, WindowPolicy::default()).map_err(|e| e.to_string())?;
    let k_expect = 7.0 * f0.k / 3f64.powf(f0.gamma);
    if (f1.gamma - f0.gamma).abs() > 1e-10 || rel(f1.k, k_expect) > 1e-9 {
        failures.push("fit scale equivariance".into());
    }

    let mut cfg = SimConfig::new(KernelSpec::EXP2, Nonlinearity::cubic(0.3), 0.1).map_err(|e| e.to_string())?;
    cfg.t_end = 200.0;
    let base = tanh_front(&cfg.grid);
    let shift = 64;
    let mut moved = vec![1.0; shift];
    moved.extend_from_slice(&base[..base.len() - shift]);
    let s0: unpin_sim::SpeedFit<f64> = measure_speed(&evolve(&cfg, base).map_err(|e| e.to_string())?.track, 0.3).map_err(|e| e.to_string())?;
    let s1 = measure_speed(&evolve(&cfg, moved).map_err(|e| e.to_string())?.track, 0.3).map_err(|e| e.to_string())?;
    let shift_err: f64 = (s0.speed - s1.speed).abs();
    if shift_err > 1e-10 * s0.speed.abs().max(1e-3) {
        failures.push(format!("translation changed the speed by {shift_err:.1e}"));
    }

    let detail = format!("drift {drift:.1e}, area {area:.1e}, convolution {conv:.1e}, translation {shift_err:.1e}");
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", failures.join(", ")))
    }
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 12] = [
        (1, "pinning tip and closed forms", c1_pinning_tip),
        (2, "cusp opening coefficient", c2_cusp),
        (3, "fold-passage constant Ω0", c3_omega0),
        (4, "inflection constant C0", c4_c0),
        (5, "generic 3/2 law, exp2, d = 1/10", c5_generic),
        (6, "critical 5/4 law, d = 1/4", c6_critical),
        (7, "smooth regime, d = 1", c7_smooth),
        (8, "one-sided kernel, d = 1/16", c8_one_sided),
        (9, "cross-method speeds", c9_cross_method),
        (10, "other smooth kernels by simulation", c10_other_kernels),
        (11, "β-regularity scan", c11_beta_scan),
        (12, "property suites", c12_properties),
    ];
    let only: Option<BTreeSet<u32>> = std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    // `cargo test -- --list` and filters are harness conventions; honour --list.
    if std::env::args().any(|a| a == "--list") {
        for (id, name, _) in &criteria {
            println!("criterion_{id:02}: test ({name})");
        }
        return;
    }
    let mut failed = BTreeSet::new();
    let mut expected = BTreeSet::new();
    let start = Instant::now();
    for (id, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        if KNOWN_RED.contains(&id) {
            expected.insert(id);
        }
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        match &outcome {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} [{secs:.1} s]"),
            Err(detail) => println!("FAIL {id:>2} {name}: {detail} [{secs:.1} s]"),
        }
        if outcome.is_err() {
            failed.insert(id);
        }
    }
    println!("acceptance: {} failing {:?}, known red {:?}, {:.0} s", failed.len(), failed, expected, start.elapsed().as_secs_f64());
    if failed != expected {
        eprintln!("failing set differs from the known red set");
        std::process::exit(1);
    }
}
