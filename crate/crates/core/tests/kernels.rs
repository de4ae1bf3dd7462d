use proptest::prelude::*;
use unpin_core::kernels::{convolve, perturbed_symbol, symbol_defect_sup, validate, Convolver, Grid, KernelSpec, Perturbation};

fn registry() -> Vec<KernelSpec> {
    ["exp2", "onesided1", "fourth", "charfn", "gauss", "beta:0.5", "beta:1", "beta:2.5", "beta+bump:1", "beta+gauss:1", "discrete_pair"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect()
}

#[test]
fn identity_symbol_is_identity() {
    let g = Grid::<f64>::new(10.0, 256).unwrap();
    let u: Vec<f64> = g.points().iter().map(|x| (-(x * x)).exp() + 0.1 * x.sin()).collect();
    let v = convolve(&KernelSpec::IDENTITY, g, &u);
    for (a, b) in u.iter().zip(&v) {
        assert!((a - b).abs() < 1e-13);
    }
}

#[test]
fn constants_preserved_by_every_kernel() {
    let g = Grid::<f64>::new(30.0, 1024).unwrap();
    for k in registry() {
        let v = convolve(&k, g, &vec![0.7; g.n]);
        for x in v {
            assert!((x - 0.7).abs() < 1e-12, "{k}: {x}");
        }
    }
}

#[test]
fn exp2_eigenfunction_scaling() {
    let g = Grid::<f64>::new(30.0, 2048).unwrap();
    let l0 = 7.0 * std::f64::consts::PI / 30.0;
    let u: Vec<f64> = g.points().iter().map(|x| (l0 * x).cos()).collect();
    let v = convolve(&KernelSpec::EXP2, g, &u);
    for (a, b) in u.iter().zip(&v) {
        assert!((a / (1.0 + l0 * l0) - b).abs() < 1e-12);
    }
}

#[test]
fn onesided_eigenfunction_has_phase() {
    let g = Grid::<f64>::new(30.0, 2048).unwrap();
    let l0 = 5.0 * std::f64::consts::PI / 30.0;
    let u: Vec<f64> = g.points().iter().map(|x| (l0 * x).cos()).collect();
    let v = convolve(&KernelSpec::ONESIDED1, g, &u);
    // Re[e^{iℓx}/(1+iℓ)] = (cos ℓx + ℓ sin ℓx)/(1+ℓ²)
    for (x, b) in g.points().iter().zip(&v) {
        let e = ((l0 * x).cos() + l0 * (l0 * x).sin()) / (1.0 + l0 * l0);
        assert!((e - b).abs() < 1e-12);
    }
}

#[test]
fn exp2_matches_helmholtz_solve() {
    // w − w″ = u solved spectrally by the same symbol.
    let g = Grid::<f64>::new(20.0, 512).unwrap();
    let u: Vec<f64> = g.points().iter().map(|x| (-(x * x) / 2.0).exp()).collect();
    let w = convolve(&KernelSpec::EXP2, g, &u);
    let conv = Convolver::from_symbol(g, |l: f64| num_complex::Complex::new(1.0 + l * l, 0.0));
    let back = conv.convolve(&w);
    for (a, b) in u.iter().zip(&back) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn validate_examples() {
    let r = validate(&KernelSpec::EXP2, 40.0).unwrap();
    assert!((r.mass - 1.0).abs() < 1e-10 && !r.asymmetric && r.positivity_defect == 0.0 && r.satisfies_h3);
    assert!((r.first_moment - 1.0).abs() < 1e-9);
    let r = validate(&KernelSpec::ONESIDED1, 40.0).unwrap();
    assert!((r.mass - 1.0).abs() < 1e-10 && r.asymmetric && !r.satisfies_h3);
    let r = validate(&KernelSpec::beta(0.5), 40.0).unwrap();
    assert!(r.singular_at_origin && (r.mass - 1.0).abs() < 1e-6);
    let r = validate(&KernelSpec::GAUSS, 20.0).unwrap();
    assert!((r.mass - 1.0).abs() < 1e-10 && r.satisfies_h3);
    let r = validate(&KernelSpec::FOURTH, 40.0).unwrap();
    assert!((r.mass - 1.0).abs() < 1e-6 && r.positivity_defect > 0.0, "fourth-order symbol has a sign-changing kernel");
    assert!(validate(&KernelSpec::beta(-1.0), 40.0).is_err());
}

#[test]
fn perturbed_symbol_examples() {
    assert_eq!(perturbed_symbol(1.0, Perturbation::AddBump, 0.0), 1.0);
    assert_eq!(perturbed_symbol(1.0, Perturbation::AverageGauss, 0.0), 1.0);
    assert!((perturbed_symbol(2.0, Perturbation::AddBump, 1.0) - (0.5 + (-1f64).exp())).abs() < 1e-15);
}

#[test]
fn discrete_pair_shifts_by_one() {
    let g = Grid::<f64>::new(32.0, 8192).unwrap();
    assert_eq!(1.0 / g.dx, 128.0);
    let u: Vec<f64> = g.points().iter().map(|x| (-(x * x)).exp()).collect();
    let v = convolve(&KernelSpec::DISCRETE_PAIR, g, &u);
    for (i, x) in g.points().iter().enumerate() {
        let e = 0.5 * ((-(x - 1.0) * (x - 1.0)).exp() + (-(x + 1.0) * (x + 1.0)).exp());
        assert!((v[i] - e).abs() < 1e-12);
    }
}

#[test]
fn stability_sup_of_symbol_defect() {
    let g = Grid::<f64>::new(30.0, 8192).unwrap();
    let s = symbol_defect_sup(&KernelSpec::EXP2, &g);
    assert!(s < 1.0 && s > 0.999);
    assert!(symbol_defect_sup(&KernelSpec::DISCRETE_PAIR, &g) <= 2.0 + 1e-12);
}

#[test]
fn single_precision_convolution() {
    let g = Grid::<f32>::new(30.0, 512).unwrap();
    let v = Convolver::new(&KernelSpec::GAUSS, g).convolve(&vec![0.25f32; 512]);
    assert!(v.iter().all(|x| (x - 0.25).abs() < 1e-6));
}

proptest! {
    #[test]
    fn even_data_stays_even(seed in prop::collection::vec(-1.0f64..1.0, 8), which in 0usize..5) {
        let kernels = [KernelSpec::EXP2, KernelSpec::FOURTH, KernelSpec::GAUSS, KernelSpec::CHARFN, KernelSpec::beta(0.75)];
        let g = Grid::<f64>::new(15.0, 256).unwrap();
        let n = g.n;
        let pts = g.points();
        let u: Vec<f64> = pts.iter().map(|x| seed.iter().enumerate().map(|(k, c)| c * ((k as f64 + 1.0) * 0.3 * x).cos()).sum::<f64>() * (-(x * x) / 20.0).exp()).collect();
        let v = convolve(&kernels[which], g, &u);
        for i in 1..n / 2 {
            prop_assert!((v[n / 2 - i] - v[n / 2 + i]).abs() < 1e-12);
        }
    }

    #[test]
    fn parseval_bound(seed in prop::collection::vec(-1.0f64..1.0, 64), which in 0usize..4) {
        let kernels = [KernelSpec::EXP2, KernelSpec::ONESIDED1, KernelSpec::DISCRETE_PAIR, KernelSpec::beta(1.5)];
        let g = Grid::<f64>::new(10.0, 64).unwrap();
        let v = convolve(&kernels[which], g, &seed);
        let n_in: f64 = seed.iter().map(|x| x * x).sum::<f64>().sqrt();
        let n_out: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(n_out <= n_in * (1.0 + 1e-12));
    }
}

mod step_response {
    use unpin_core::kernels::{reference_front, step_response, FrontConvolver, Grid, KernelSpec};
    use unpin_core::numerics::quad::simpson;

    fn direct(k: &KernelSpec, x: f64) -> f64 {
        let f = |y: f64| k.spatial::<f64>(y).unwrap() * reference_front(x - y);
        simpson(&f, -60.0, 60.0, &[-1.0, 0.0, 1.0], 1e-13).unwrap()
    }

    #[test]
    fn identity_returns_reference() {
        let xs = [-7.0, -1.0, 0.0, 0.3, 4.0, 25.0];
        for (x, v) in xs.iter().zip(step_response::<f64>(&KernelSpec::IDENTITY, &xs)) {
            assert!((v - reference_front(*x)).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn matches_spatial_quadrature() {
        let xs = [-3.0, 0.0, 0.7, 5.0, 20.0];
        for k in [KernelSpec::EXP2, KernelSpec::ONESIDED1, KernelSpec::GAUSS, KernelSpec::CHARFN] {
            for (x, v) in xs.iter().zip(step_response::<f64>(&k, &xs)) {
                let want = direct(&k, *x);
                assert!((v - want).abs() < 1e-10, "{k} at {x}: {v} vs {want}");
            }
        }
    }

    #[test]
    fn discrete_pair_is_shift_average() {
        let xs = [-2.0, 0.0, 0.5, 3.0];
        for (x, v) in xs.iter().zip(step_response::<f64>(&KernelSpec::DISCRETE_PAIR, &xs)) {
            let want = 0.5 * (reference_front(x - 1.0) + reference_front(x + 1.0));
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_kernel_symmetry() {
        let k = KernelSpec::beta(0.5);
        let xs = [0.0, 0.5, 3.0, 40.0];
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        let (p, m) = (step_response::<f64>(&k, &xs), step_response::<f64>(&k, &neg));
        for i in 0..xs.len() {
            assert!((p[i] + m[i] - 1.0).abs() < 1e-12);
        }
        assert!(p.windows(2).all(|w| w[1] < w[0]));
        // Singular at the origin but exponentially localised: the far field is reached.
        assert!(p[3].abs() < 1e-12);
        // (K∗H)′ = K∗H′ is bounded by max|H′| = 1/4.
        assert!(p[1] >= 0.5 - 0.125 && p[1] < 0.5);
    }

    #[test]
    fn front_convolver_has_no_seam() {
        let g = Grid::<f64>::new(40.0, 2048).unwrap();
        let u: Vec<f64> = g.points().iter().map(|&x| reference_front(2.0 * (x - 2.0))).collect();
        let fc = FrontConvolver::new(&KernelSpec::GAUSS, g);
        let v = fc.convolve(&u);
        for &i in &[0usize, 200, 1024, 1100, 2047] {
            let x = g.x(i);
            let f = |y: f64| KernelSpec::GAUSS.spatial::<f64>(y).unwrap() * reference_front(2.0 * (x - y - 2.0));
            let want = simpson(&f, -12.0, 12.0, &[0.0], 1e-13).unwrap();
            assert!((v[i] - want).abs() < 1e-10, "i = {i}: {} vs {want}", v[i]);
        }
    }
}
