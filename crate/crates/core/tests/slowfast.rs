use unpin_core::nonlinearity::{g_branch_inverse, Branch, Nonlinearity};
use unpin_core::numerics::ode::Dop853;
use unpin_core::numerics::roots::brent;
use unpin_core::pinning::{boundary_cubic_inverse, boundary_numeric};
use unpin_core::slowfast::*;

#[test]
fn omega0_root() {
    let z: f64 = omega0();
    assert!((z - 2.3381).abs() < 5e-5);
    assert!((z - 2.338_107_410_459_763).abs() < 1e-12);
    assert!(omega0_residual(z).abs() < 1e-10);
    assert!(omega0_residual(2.0f64) * omega0_residual(2.5f64) < 0.0);
}

#[test]
fn c0_constant_value_and_stability() {
    let est = c0_levels::<f64>().unwrap();
    assert!((est.value + 2.6524).abs() < 2e-3, "C0 = {}", est.value);
    let (l1, l2) = (est.levels[1].1, est.levels[2].1);
    assert!((l1 - l2).abs() < 1e-4, "doubling T changed C0 by {}", (l1 - l2).abs());
    assert!(est.spread < 1e-3);
}

#[test]
fn inflection_orbit_properties() {
    let o = inflection_trajectory(50.0f64, 1e-12).unwrap();
    assert!(o.defect_start < 1e-3, "defect {}", o.defect_start);
    let at0 = o.t.iter().position(|&t| t >= 0.0).unwrap();
    let u0 = o.u[at0 - 1] + (o.u[at0] - o.u[at0 - 1]) * (0.0 - o.t[at0 - 1]) / (o.t[at0] - o.t[at0 - 1]);
    assert!(u0 < 0.0 && u0 > -3.0, "u(0) = {u0}");
    let o2 = inflection_trajectory(100.0f64, 1e-12).unwrap();
    let near0 = |o: &InflectionOrbit<f64>| {
        let i = o.t.iter().position(|&t| t >= 0.0).unwrap();
        // One accepted step of the integrator straddles t = 0; integrate back to it exactly.
        let (t, u) = (o.t[i], o.u[i]);
        let sol = Dop853::<f64>::tolerances(1e-13, 1e-15)
            .solve(|_, y: &[f64; 2]| [-1.0, y[1] * y[1] * y[1] - y[0]], t, [-t, u], 0.0, &[])
            .unwrap();
        sol.last().1[1]
    };
    assert!((near0(&o) - near0(&o2)).abs() < 1e-10);
}

#[test]
fn leading_tail_is_odd() {
    let f = |t: f64| -t.cbrt();
    let v = unpin_core::numerics::quad::gauss_legendre(&f, -50.0, 50.0, 200);
    assert!(v.abs() < 1e-12);
}

#[test]
fn hamiltonian_examples() {
    assert!(hamiltonian_g(0.0f64, Branch::Minus, 0.4, 0.1).unwrap().abs() < 1e-15);
    for &(a, d) in &[(0.3f64, 0.1f64), (0.4, 0.125), (0.45, 0.2)] {
        let h = hamiltonian_g(1.0, Branch::Plus, a, d).unwrap();
        assert!((h - (1.0 - 2.0 * a) / (12.0 * d)).abs() < 1e-13);
        // Explicit polynomial form at u = 1.
        let poly = -0.5 + 3.0 / (4.0 * d) - 2.0 * (1.0 + a) / (3.0 * d) + (1.0 + a / d) / 2.0;
        assert!((h - poly).abs() < 1e-13);
        assert!((h_one(a, d) - h).abs() < 1e-13);
    }
}

fn drift_along(branch: Branch, a: f64, d: f64, start: [f64; 2]) -> f64 {
    let h0 = start[1] * start[1] / 2.0 + hamiltonian_g(start[0], branch, a, d).unwrap();
    let sol = Dop853 { dense: true, ..Dop853::<f64>::tolerances(1e-12, 1e-14) }
        .solve(|_, y: &[f64; 2]| slow_field(y[0], y[1], branch, a, d).unwrap(), 0.0, start, 10.0, &[])
        .unwrap();
    sol.y.iter().map(|y| (y[1] * y[1] / 2.0 + hamiltonian_g(y[0], branch, a, d).unwrap() - h0).abs()).fold(0.0, f64::max)
}

#[test]
fn hamiltonian_conserved_on_both_branches() {
    let (a, d) = (0.4f64, 0.1f64);
    // Start near each saddle along its unstable direction so the orbit stays on its branch for t = 10.
    let k0 = (a / (a + d)).sqrt();
    assert!(drift_along(Branch::Minus, a, d, [1e-5, 1e-5 * k0]) < 1e-8);
    assert!(drift_along(Branch::Minus, a, d, [-1e-5, 3e-6]) < 1e-8);
    let gp1 = 1.0 + (1.0 - a) / d;
    let k1 = (1.0 - 1.0 / gp1).sqrt();
    assert!(drift_along(Branch::Plus, a, d, [1.0 - 1e-5, -1e-5 * k1]) < 1e-8);
}

#[test]
fn fold_matching_at_boundary() {
    let (am, _) = boundary_cubic_inverse(0.1f64).unwrap();
    let (fold, mp) = fold_and_matching(am, 0.1).unwrap();
    assert!((mp.v_minus - mp.v_plus).abs() < 1e-8);
    assert!(fold.v_star > 0.0 && (fold.v_star - mp.v_minus).abs() < 1e-15);
    assert!(fold.alpha < 0.0 && fold.gamma > 0.0);
    let gp = unpin_core::nonlinearity::eval_g(fold.u_star, &Nonlinearity::cubic(am), 0.1, 1).unwrap();
    assert!(gp.abs() < 1e-10);
    assert!(fold_and_matching(0.5f64, 0.25).is_err());
}

#[test]
fn matching_root_agrees_with_area_balance() {
    let d = 0.1f64;
    let f = |a: f64| {
        let (_, mp) = fold_and_matching(a, d).unwrap();
        mp.v_minus * mp.v_minus - mp.v_plus * mp.v_plus
    };
    let root = brent(f, 0.3, 0.45, 1e-15, 200).unwrap();
    let b = boundary_numeric(&Nonlinearity::cubic(0.3), d).unwrap();
    assert!((root - b.a_minus).abs() < 1e-6);
}

#[test]
fn prefactors_match_table() {
    let k1 = prefactor::<f64>(Regime::GenericSymmetric, 0.1).unwrap();
    assert!((k1.prefactor / 0.5457 - 1.0).abs() < 5e-3, "k1 = {}", k1.prefactor);
    assert_eq!(k1.exponent, 1.5);
    let kc = prefactor::<f64>(Regime::CriticalTip, 0.25).unwrap();
    assert!((kc.prefactor / 0.3559 - 1.0).abs() < 1e-2, "kc = {}", kc.prefactor);
    assert_eq!(kc.exponent, 1.25);
    let k2 = prefactor::<f64>(Regime::OneSided, 1.0 / 16.0).unwrap();
    assert!((k2.prefactor / 0.4218 - 1.0).abs() < 1e-2, "k2 = {}", k2.prefactor);
    assert!((k2.boundary_a - 0.5).abs() < 1e-15);
    assert!(prefactor::<f64>(Regime::CriticalTip, 0.2).is_err());
    assert!(prefactor::<f64>(Regime::GenericSymmetric, 0.3).is_err());
}

#[test]
fn k1_positive_across_range() {
    for i in 0..=22 {
        let d = 0.02f64 + 0.01 * i as f64;
        let k = prefactor::<f64>(Regime::GenericSymmetric, d).unwrap().prefactor;
        assert!(k.is_finite() && k > 0.0, "d = {d}: {k}");
    }
}

#[test]
fn predicted_speed_examples() {
    let law = AsymptoticLaw { exponent: 1.5f64, prefactor: 0.5457, regime: Regime::GenericSymmetric, boundary_a: 0.4 };
    assert_eq!(predicted_speed(&law, 0.4).c, 0.0);
    assert!((predicted_speed(&law, 0.39).c - 5.457e-4).abs() < 1e-12);
    let r = predicted_speed(&law, 0.38).c / predicted_speed(&law, 0.39).c;
    assert!((r - 2f64.powf(1.5)).abs() < 1e-12);
    assert!(predicted_speed(&law, 0.41).pinned);
}

#[test]
fn branch_inverse_feeds_hamiltonian() {
    let u = g_branch_inverse(0.3, &Nonlinearity::cubic(0.4f64), 0.1, Branch::Minus).unwrap();
    assert!((hamiltonian_g(0.3, Branch::Minus, 0.4, 0.1).unwrap() - potential(u, 0.4, 0.1)).abs() < 1e-14);
}
