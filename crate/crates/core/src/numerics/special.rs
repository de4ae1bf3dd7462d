//! Γ via the Lanczos approximation and J_ν by its ascending series.

use crate::scalar::{of, Real};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

pub fn gamma<T: Real>(x: T) -> T {
    if x < of(0.5) {
        // Reflection keeps the approximation on its accurate half-plane.
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma(T::one() - x));
    }
    let x = x - T::one();
    let mut a = of::<T>(LANCZOS[0]);
    let t = x + of(LANCZOS_G + 0.5);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += of::<T>(*c) / (x + of(i as f64));
    }
    (T::PI() * of(2.0)).sqrt() * t.powf(x + of(0.5)) * (-t).exp() * a
}

/// J_ν(x) for x ≥ 0 and non-integer-negative ν, summed until terms stall.
pub fn bessel_j<T: Real>(nu: T, x: T, max_terms: usize) -> T {
    if x == T::zero() {
        return if nu == T::zero() { T::one() } else if nu > T::zero() { T::zero() } else { T::infinity() };
    }
    let half = x * of(0.5);
    let q = -(half * half);
    let mut term = half.powf(nu) / gamma(nu + T::one());
    let mut sum = term;
    for k in 1..max_terms {
        let kf = of::<T>(k as f64);
        term = term * q / (kf * (kf + nu));
        sum += term;
        if term.abs() <= sum.abs() * T::epsilon() * of(0.5) {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_values() {
        assert!((gamma(5.0f64) - 24.0).abs() < 1e-12);
        assert!((gamma(0.5f64) - std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert!((gamma(1.0f64 / 3.0) - 2.678_938_534_707_747_6).abs() < 1e-13);
    }

    #[test]
    fn half_order_closed_form() {
        // J_{1/2}(x) = sqrt(2/(πx)) sin x
        for &x in &[0.3f64, 1.0, 2.5, 4.0] {
            let exact = (2.0 / (std::f64::consts::PI * x)).sqrt() * x.sin();
            assert!((bessel_j(0.5, x, 40) - exact).abs() < 1e-14);
        }
    }
}
