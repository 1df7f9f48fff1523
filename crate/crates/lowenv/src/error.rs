use thiserror::Error;

/// Errors produced by the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("quantile argument {0} outside the open interval (0,1)")]
    QuantileArgOutOfRange(f64),

    #[error("distribution has no density")]
    DensityUnavailable,

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("sample mean of an empty list")]
    EmptySample,

    #[error("all objective values were NaN over the solver grid")]
    AllObjectivesNan,

    #[error("family has no parameter box; cannot minimize over it")]
    NoParamBox,

    #[error("consistency route {route} is not applicable: {reason}")]
    RouteInapplicable { route: String, reason: String },

    #[error(
        "certification failed for route {route}: max violation {max_violation:.6e} > 0"
    )]
    CertificationFailed { route: String, max_violation: f64 },

    #[error(
        "analytic gradient disagrees with finite differences at x={x}, t={t:?}: \
         relative error {rel_err:.3e} > {tol:.1e}"
    )]
    GradientMismatch {
        x: f64,
        t: Vec<f64>,
        rel_err: f64,
        tol: f64,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("computation error: {0}")]
    Computation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
