use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KerrError {
    #[error("invalid Kerr parameters a={a}, M={m}: need 0 < |a| < M")]
    InvalidParams { a: f64, m: f64 },

    #[error("point lies on the ring singularity (r={r}, theta={theta})")]
    RingSingularity { r: f64, theta: f64 },

    #[error("Boyer-Lindquist chart is singular on the horizon r={r}")]
    OnHorizon { r: f64 },

    #[error("tangent vector chart does not match the base point chart")]
    ChartMismatch,

    #[error("radius r={r} does not lie in the requested block {block:?}")]
    BlockMismatch { r: f64, block: crate::kerr::Block },

    #[error("polynomial is identically zero")]
    DegeneratePolynomial,

    #[error("theta potential has no admissible oscillation (discriminant {dis})")]
    NoOscillation { dis: f64 },

    #[error(
        "orbit has constant theta (discriminant {dis}); the oscillation increment is undefined"
    )]
    ConstantTheta { dis: f64 },

    #[error("formula has a pole at r={r}")]
    Pole { r: f64 },

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("first-order system evaluated in a forbidden region ({which} = {value})")]
    ForbiddenRegion { which: &'static str, value: f64 },

    #[error("tangent vector is not null (g(v,v) = {q})")]
    NonNull { q: f64 },

    #[error("rescaled constants need E != 0")]
    ZeroEnergy,

    #[error("step size underflow at affine parameter s={s}")]
    StepFailure {
        s: f64,
        partial: Box<crate::integrator::Trajectory>,
    },
}

pub type Result<T> = std::result::Result<T, KerrError>;
