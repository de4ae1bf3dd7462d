use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("derivative of order {order} requested at kink u = {at}")]
    Kink { at: f64, order: u8 },
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("w = {w} lies beyond the fold value {fold} of the branch")]
    OutOfBranch { w: f64, fold: f64 },
    #[error("d = {d} is outside the pinning regime")]
    OutsidePinningRegime { d: f64 },
    #[error("{what} did not converge (last estimate {estimate})")]
    NoConvergence { what: String, estimate: f64 },
    #[error("geometry violated: {0}")]
    Geometry(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("no sign change: {0}")]
    NoBracket(String),
    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },
    #[error("unstable time step: {0}")]
    Stability(String),
    #[error("solution blew up (|u| > {bound}) at t = {t}")]
    BlowUp { t: f64, bound: f64 },
    #[error("sample at mu = {mu} has nonpositive speed {c}; pinned")]
    PinnedSample { mu: f64, c: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
