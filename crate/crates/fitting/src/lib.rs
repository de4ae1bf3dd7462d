//! Power-law fits c ≈ k·μ^γ and the scans that feed them.

pub mod powerlaw;
pub mod scan;

pub use powerlaw::{powerlaw_fit, PowerLawFit, WindowPolicy};
pub use scan::{beta_scan, boundary_a, fit_points, locate_boundary, mu_grid, speed_scan, BetaRow, BetaScanOptions, BoundaryCheck, Method, ScanOptions, ScanPoint};

pub type PowerLawFit64 = PowerLawFit<f64>;
