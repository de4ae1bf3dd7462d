//! Singular-perturbation data for the cubic: slow-flow Hamiltonians, fold
//! matching, the universal constants Ω0 and C0, and speed-law prefactors.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonlinearity::{eval_g, g_branch_inverse, g_da, g_decompose, Branch, Nonlinearity};
use crate::numerics::ode::{Dop853, Stop};
use crate::numerics::roots::brent;
use crate::numerics::special::bessel_j;
use crate::pinning::boundary_cubic_inverse;
use crate::scalar::{of, to64, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldData<T> {
    pub u_star: T,
    pub w_star: T,
    pub v_star: T,
    pub alpha: T,
    pub gamma: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchingPoints<T> {
    pub w_a: T,
    pub v_minus: T,
    pub v_plus: T,
    pub dv_minus_da: T,
    pub dv_plus_da: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    GenericSymmetric,
    CriticalTip,
    OneSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticLaw<T> {
    pub exponent: T,
    pub prefactor: T,
    pub regime: Regime,
    pub boundary_a: T,
}

const DIFF_STEP: f64 = 1e-5;

/// G expressed through u on the critical manifold: −g(u)²/2 + ∫₀ᵘ s·g′(s) ds.
pub fn potential<T: Real>(u: T, a: T, d: T) -> T {
    let one = T::one();
    let u2 = u * u;
    let w = u - u * (one - u) * (u - a) / d;
    -of::<T>(0.5) * w * w + of::<T>(0.75) / d * u2 * u2 - of::<T>(2.0) * (one + a) / (of::<T>(3.0) * d) * u2 * u + of::<T>(0.5) * (one + a / d) * u2
}

/// H at the far equilibrium (w, v) = (1, 0).
pub fn h_one<T: Real>(a: T, d: T) -> T {
    (T::one() - of::<T>(2.0) * a) / (of::<T>(12.0) * d)
}

/// G_∓(w): the slow potential with u on the requested branch; H = v²/2 + G.
pub fn hamiltonian_g<T: Real>(w: T, branch: Branch, a: T, d: T) -> Result<T> {
    let u = g_branch_inverse(w, &Nonlinearity::cubic(a), d, branch)?;
    Ok(potential(u, a, d))
}

/// Slow flow on one branch: w′ = v, v′ = w − g⁻¹(w).
pub fn slow_field<T: Real>(w: T, v: T, branch: Branch, a: T, d: T) -> Result<[T; 2]> {
    let u = g_branch_inverse(w, &Nonlinearity::cubic(a), d, branch)?;
    Ok([v, w - u])
}

fn matching_v<T: Real>(u_lo: T, u_hi: T, a: T, d: T) -> Result<(T, T)> {
    let rm = -of::<T>(2.0) * potential(u_lo, a, d);
    let rp = of::<T>(2.0) * (h_one(a, d) - potential(u_hi, a, d));
    if rm < T::zero() || rp < T::zero() {
        return Err(Error::Geometry(format!(
            "negative radicand in matching values at a = {} (v−² = {:e}, v+² = {:e})",
            to64(a),
            to64(rm),
            to64(rp)
        )));
    }
    Ok((rm.sqrt(), rp.sqrt()))
}

fn fold_v<T: Real>(a: T, d: T) -> Result<(T, T, T)> {
    let nl = Nonlinearity::cubic(a);
    let dec = g_decompose(&nl, d)?;
    if dec.degenerate {
        return Err(Error::Geometry(format!("no fold at (a, d) = ({}, {})", to64(a), to64(d))));
    }
    let (vm, vp) = matching_v(dec.u_max, dec.u_max_partner, a, d)?;
    Ok((vm, vp, eval_g(dec.u_max, &nl, d, 0)?))
}

pub fn fold_and_matching<T: Real>(a: T, d: T) -> Result<(FoldData<T>, MatchingPoints<T>)> {
    let nl = Nonlinearity::cubic(a);
    let dec = g_decompose(&nl, d)?;
    if dec.degenerate {
        return Err(Error::Geometry("degenerate fold (α = 0); use the critical-tip prefactor".into()));
    }
    let (vm, vp, w_a) = fold_v(a, d)?;
    let h = of::<T>(DIFF_STEP);
    let (vm_p, vp_p, _) = fold_v(a + h, d)?;
    let (vm_m, vp_m, _) = fold_v(a - h, d)?;
    let fold = FoldData {
        u_star: dec.u_max,
        w_star: w_a,
        v_star: vm,
        alpha: eval_g(dec.u_max, &nl, d, 2)? * of(0.5),
        gamma: g_da(dec.u_max, &nl, d),
    };
    let mp = MatchingPoints {
        w_a,
        v_minus: vm,
        v_plus: vp,
        dv_minus_da: (vm_p - vm_m) / (h + h),
        dv_plus_da: (vp_p - vp_m) / (h + h),
    };
    Ok((fold, mp))
}

fn airy_combination<T: Real>(z: T) -> T {
    let zeta = of::<T>(2.0 / 3.0) * z * z.sqrt();
    let third = of::<T>(1.0 / 3.0);
    bessel_j(-third, zeta, 60) + bessel_j(third, zeta, 60)
}

/// First positive root of J₋₁/₃(⅔z^{3/2}) + J₁/₃(⅔z^{3/2}).
pub fn omega0<T: Real>() -> T {
    brent(airy_combination::<T>, of(2.0), of(2.5), T::epsilon(), 200).expect("bracket [2, 2.5] changes sign")
}

pub fn omega0_residual<T: Real>(z: T) -> T {
    airy_combination(z)
}

#[derive(Debug, Clone)]
pub struct InflectionOrbit<T> {
    pub t: Vec<T>,
    pub w: Vec<T>,
    pub u: Vec<T>,
    /// ∫ u dt from −T to T.
    pub integral: T,
    /// |u³ − w| / |w| at t = −T and t = +T.
    pub defect_start: T,
    pub defect_end: T,
}

fn cbrt_signed<T: Real>(x: T) -> T {
    x.cbrt()
}

/// Large-|t| expansion of the unique orbit of w′ = −1, u′ = u³ − w (w = −t).
pub fn inflection_asymptotics<T: Real>(t: T) -> T {
    let s = cbrt_signed(t);
    let p = T::one() / (s * s * s * s * s);
    -s * (T::one() + p / of(9.0) - of::<T>(5.0 / 81.0) * p * p)
}

/// The orbit is repelling forward in t, so it is traced backward from +T,
/// where it is seeded on its asymptotic expansion.
pub fn inflection_trajectory<T: Real>(t_max: T, tol: T) -> Result<InflectionOrbit<T>> {
    if !(t_max >= of(5.0)) {
        return Err(Error::Parameter("truncation T must be at least 5".into()));
    }
    let solver = Dop853 { rtol: tol, atol: tol * of(1e-2), dense: true, ..Dop853::default() };
    let u0 = inflection_asymptotics(t_max);
    let bound = of::<T>(4.0) * t_max.cbrt() + of(10.0);
    let guard = [crate::numerics::ode::Event::terminal(move |_, y: &[T; 3]| bound - y[1].abs(), -1)];
    let sol = solver.solve(|_, y: &[T; 3]| [-T::one(), y[1] * y[1] * y[1] - y[0], -y[1]], t_max, [-t_max, u0, T::zero()], -t_max, &guard)?;
    if let Stop::Event(_) = sol.stop {
        return Err(Error::Integration { t: to64(sol.last().0), reason: "orbit blew up".into() });
    }
    let (_, end) = sol.last();
    let defect = |w: T, u: T| (u * u * u - w).abs() / w.abs();
    Ok(InflectionOrbit {
        t: sol.t.iter().rev().copied().collect(),
        w: sol.y.iter().rev().map(|y| y[0]).collect(),
        u: sol.y.iter().rev().map(|y| y[1]).collect(),
        integral: end[2],
        defect_start: defect(end[0], end[1]),
        defect_end: defect(-t_max, u0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C0Estimate<T> {
    pub value: T,
    pub levels: Vec<(T, T)>,
    pub spread: T,
}

/// Principal-value integral of u along the inflection orbit with the
/// −(2/3)T^{−1/3} tail correction; levels T ∈ {50, 100, 200}.
pub fn c0_levels<T: Real>() -> Result<C0Estimate<T>> {
    let mut levels = Vec::new();
    for &tm in &[50.0, 100.0, 200.0] {
        let t = of::<T>(tm);
        let orbit = inflection_trajectory(t, crate::scalar::tol(1e-13))?;
        let tail = -of::<T>(2.0 / 3.0) / t.cbrt();
        levels.push((t, orbit.integral + tail));
    }
    let vals: Vec<T> = levels.iter().map(|l| l.1).collect();
    let spread = vals.iter().fold(T::zero(), |m, &v| m.max((v - vals[0]).abs()));
    if spread > of(1e-3) {
        return Err(Error::NoConvergence { what: format!("C0 levels {:?}", vals.iter().map(|v| to64(*v)).collect::<Vec<_>>()), estimate: to64(vals[2]) });
    }
    Ok(C0Estimate { value: vals[2], levels, spread })
}

pub fn c0_constant<T: Real>() -> Result<T> {
    Ok(c0_levels::<T>()?.value)
}

fn cached_c0() -> Result<f64> {
    static C0: OnceLock<std::result::Result<f64, Error>> = OnceLock::new();
    C0.get_or_init(c0_constant::<f64>).clone()
}

fn cached_omega0() -> f64 {
    static OMEGA: OnceLock<f64> = OnceLock::new();
    *OMEGA.get_or_init(omega0::<f64>)
}

fn inflection_v<T: Real>(a: T, d: T) -> Result<(T, T)> {
    let u = (T::one() + a) / of(3.0);
    matching_v(u, u, a, d)
}

pub fn prefactor<T: Real>(regime: Regime, d: T) -> Result<AsymptoticLaw<T>> {
    let quarter = of::<T>(0.25);
    let om = of::<T>(cached_omega0());
    let h = of::<T>(DIFF_STEP);
    match regime {
        Regime::GenericSymmetric => {
            if !(d > T::zero() && d < quarter) {
                return Err(Error::Parameter(format!("generic regime needs 0 < d < 1/4, got {}", to64(d))));
            }
            let (a_b, _) = boundary_cubic_inverse(d)?;
            let (fold, mp) = fold_and_matching(a_b, d)?;
            let dec = g_decompose(&Nonlinearity::cubic(a_b), d)?;
            let jump = dec.u_max_partner - dec.u_max;
            let v = fold.v_star;
            let q = (v * v / (fold.alpha.abs() * d * d)).cbrt();
            let ddv = (mp.dv_plus_da - mp.dv_minus_da).abs();
            let k = (ddv * v / (om * q * jump)).powf(of(1.5));
            Ok(AsymptoticLaw { exponent: of(1.5), prefactor: k, regime, boundary_a: a_b })
        }
        Regime::CriticalTip => {
            if (d - quarter).abs() > of(1e-12) {
                return Err(Error::Parameter(format!("critical regime needs d = 1/4, got {}", to64(d))));
            }
            let a = of::<T>(0.5);
            let (vm, _) = inflection_v(a, d)?;
            let (vmp, vpp) = inflection_v(a + h, d)?;
            let (vmm, vpm) = inflection_v(a - h, d)?;
            let ddv = ((vpp - vpm) - (vmp - vmm)).abs() / (h + h);
            let c0 = of::<T>(cached_c0()?).abs();
            let k = (ddv / (c0 * (of::<T>(4.0) / vm).powf(of(0.2)))).powf(of(1.25));
            Ok(AsymptoticLaw { exponent: of(1.25), prefactor: k, regime, boundary_a: a })
        }
        Regime::OneSided => {
            if !(d > T::zero() && d < quarter) {
                return Err(Error::Parameter(format!("one-sided regime needs 0 < d < 1/4, got {}", to64(d))));
            }
            let a_b = of::<T>(2.0) * d.sqrt();
            let nl = Nonlinearity::cubic(a_b);
            let dec = g_decompose(&nl, d)?;
            let w = eval_g(dec.u_max, &nl, d, 0)?;
            let alpha = eval_g(dec.u_max, &nl, d, 2)? * of(0.5);
            let dw = g_da(dec.u_max, &nl, d).abs();
            let k = dw.powf(of(1.5)) * d * alpha * alpha / ((w - dec.u_max) * (om * alpha.abs()).powf(of(1.5)));
            Ok(AsymptoticLaw { exponent: of(1.5), prefactor: k, regime, boundary_a: a_b })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction<T> {
    pub c: T,
    pub pinned: bool,
}

/// k·μ^γ with μ = boundary_a − a on the moving side.
pub fn predicted_speed<T: Real>(law: &AsymptoticLaw<T>, a: T) -> Prediction<T> {
    let mu = law.boundary_a - a;
    if mu <= T::zero() {
        return Prediction { c: T::zero(), pinned: mu < T::zero() };
    }
    Prediction { c: law.prefactor * mu.powf(law.exponent), pinned: false }
}
