use thiserror::Error;

use crate::neumann::SmallnessReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("kernel evaluated at its singular point")]
    SingularPoint,

    #[error("no unique boundary projection for {point:?}: {reason}")]
    NoUniqueProjection { point: [f64; 3], reason: &'static str },

    #[error("point lies outside the normal-coordinate chart (|eta'| or |eta_n| >= rho)")]
    OutOfChart,

    #[error("input does not decay at the grid boundary (ring max {ring:.3e} vs peak {peak:.3e})")]
    NonDecayingInput { ring: f64, peak: f64 },

    #[error("target at distance {distance:.3e} is closer to the surface than the validity limit {limit:.3e}")]
    TooCloseToSurface { distance: f64, limit: f64 },

    #[error("no admissible ball found for the oscillation estimator")]
    NoAdmissibleBall,

    #[error("boundary operator is not contractive: empirical |2S| = {:.4}", .report.empirical_2s_norm.unwrap_or(f64::NAN))]
    NotContractive { report: Box<SmallnessReport> },

    #[error("Neumann series hit the iteration cap; last residual {residual:.3e}")]
    MaxIterations { residual: f64 },

    #[error("trace extrapolation unstable: stencils disagree by {gap:.3e} (limit {limit:.3e})")]
    ExtrapolationUnstable { gap: f64, limit: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
