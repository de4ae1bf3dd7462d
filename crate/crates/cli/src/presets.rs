//! Parameter sets behind the published tables and figures.

use serde::Serialize;
use unpin_core::kernels::Perturbation;
use unpin_core::slowfast::{prefactor, Regime};
use unpin_core::{KernelSpec, Nonlinearity, Result};
use unpin_fitting::{fit_points, mu_grid, speed_scan, BetaScanOptions, Method, PowerLawFit, ScanOptions, ScanPoint, WindowPolicy};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScanPreset {
    pub label: &'static str,
    #[serde(serialize_with = "kernel_name")]
    pub kernel: KernelSpec,
    pub d: f64,
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub n: usize,
    pub method: Method,
    /// Predicted exponent and, where theory provides one, prefactor regime.
    pub s_p: f64,
    #[serde(skip)]
    pub regime: Option<Regime>,
}

fn kernel_name<S: serde::Serializer>(k: &KernelSpec, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(k)
}

impl ScanPreset {
    pub fn mus(&self) -> Vec<f64> {
        mu_grid(self.mu_lo, self.mu_hi, self.n).expect("preset grids are valid")
    }

    pub fn k_p(&self) -> Option<f64> {
        self.regime.map(|r| prefactor(r, self.d).map(|l| l.prefactor)).transpose().ok().flatten()
    }

    /// A faster variant: fewer points over the upper part of the range.
    pub fn quick(mut self) -> Self {
        self.mu_lo = (self.mu_lo * self.mu_hi).sqrt().min(self.mu_hi / 8.0);
        self.n = 8;
        self
    }

    pub fn run(&self) -> Result<Vec<ScanPoint>> {
        let nl = Nonlinearity::cubic(0.5);
        speed_scan(&self.kernel, &nl, self.d, &self.mus(), self.method, &scan_options())
    }

    pub fn fit(&self, points: &[ScanPoint]) -> Result<PowerLawFit<f64>> {
        fit_points(points, WindowPolicy::default())
    }
}

/// Scan options shared by every preset; the continuation floor sits below
/// the smallest critical-regime speeds.
pub fn scan_options() -> ScanOptions {
    let mut o = ScanOptions::default();
    o.continuation.c_floor = 1e-14;
    o
}

const D_TIP: f64 = 0.25;

/// Table 1: rows (a)–(d) for exp2 and the one-sided row.
pub fn table1() -> Vec<ScanPreset> {
    vec![
        ScanPreset {
            label: "a",
            kernel: KernelSpec::EXP2,
            d: 0.1,
            mu_lo: 1e-4,
            mu_hi: 3e-2,
            n: 12,
            method: Method::Newton,
            s_p: 1.5,
            regime: Some(Regime::GenericSymmetric),
        },
        ScanPreset {
            label: "b",
            kernel: KernelSpec::EXP2,
            d: 0.1,
            mu_lo: SIM_MU.0,
            mu_hi: SIM_MU.1,
            n: 12,
            method: Method::Sim,
            s_p: 1.5,
            regime: Some(Regime::GenericSymmetric),
        },
        ScanPreset {
            label: "c",
            kernel: KernelSpec::EXP2,
            d: D_TIP,
            mu_lo: 1e-6,
            mu_hi: 3e-4,
            n: 12,
            // shooting turns stiff below c ≈ 5e−7; continuation reaches 1e−8
            method: Method::Newton,
            s_p: 1.25,
            regime: Some(Regime::CriticalTip),
        },
        ScanPreset {
            label: "d",
            kernel: KernelSpec::EXP2,
            d: 1.0,
            mu_lo: 1e-4,
            mu_hi: 3e-2,
            n: 12,
            method: Method::Newton,
            s_p: 1.0,
            regime: None,
        },
        ScanPreset {
            label: "onesided",
            kernel: KernelSpec::ONESIDED1,
            d: 1.0 / 16.0,
            mu_lo: 1e-4,
            mu_hi: 3e-2,
            n: 12,
            method: Method::Newton,
            s_p: 1.5,
            regime: Some(Regime::OneSided),
        },
    ]
}

/// μ-range for direct simulation on the 2¹³-point grid: below ~2e−3 the
/// grid itself starts to pin fronts.
pub const SIM_MU: (f64, f64) = (2e-3, 1e-1);

/// Table 2: other smooth kernels by direct simulation.
pub fn table2() -> Vec<ScanPreset> {
    [("fourth", KernelSpec::FOURTH), ("charfn", KernelSpec::CHARFN), ("gauss", KernelSpec::GAUSS)]
        .into_iter()
        .map(|(label, kernel)| ScanPreset {
            label,
            kernel,
            d: 0.1,
            mu_lo: SIM_MU.0,
            mu_hi: SIM_MU.1,
            n: 12,
            method: Method::Sim,
            s_p: 1.5,
            regime: None,
        })
        .collect()
}

/// Raw speed data for the universality figure: the one-sided row plus the
/// three smooth kernels.
pub fn fig7() -> Vec<ScanPreset> {
    let mut v = vec![table1().pop().expect("one-sided row")];
    v.extend(table2());
    v
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaPreset {
    pub betas: Vec<f64>,
    pub d: f64,
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub n: usize,
    #[serde(serialize_with = "perturbation_names")]
    pub perturbations: Vec<Perturbation>,
}

fn perturbation_names<S: serde::Serializer>(p: &[Perturbation], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(p.len()))?;
    for q in p {
        seq.serialize_element(match q {
            Perturbation::None => "none",
            Perturbation::AddBump => "bump",
            Perturbation::AverageGauss => "gauss",
        })?;
    }
    seq.end()
}

/// β-regularity scan. Singular kernels pin on the grid up to μ ≈ 1.3e−2
/// (β = 0.5), so the grid extends to 0.2 and ranks count moving samples.
pub fn fig8(quick: bool) -> BetaPreset {
    if quick {
        BetaPreset { betas: vec![1.0, 1.5, 2.0, 3.0], d: 0.1, mu_lo: 4e-3, mu_hi: 2e-1, n: 10, perturbations: vec![Perturbation::None] }
    } else {
        BetaPreset {
            betas: vec![0.5, 0.75, 1.0, 1.5, 2.0, 3.0],
            d: 0.1,
            mu_lo: 2e-3,
            mu_hi: 2e-1,
            n: 16,
            perturbations: vec![Perturbation::None, Perturbation::AddBump, Perturbation::AverageGauss],
        }
    }
}

impl BetaPreset {
    pub fn mus(&self) -> Vec<f64> {
        mu_grid(self.mu_lo, self.mu_hi, self.n).expect("preset grids are valid")
    }

    pub fn options(&self) -> BetaScanOptions {
        BetaScanOptions { perturbations: self.perturbations.clone(), ..Default::default() }
    }
}
