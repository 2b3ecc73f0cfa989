use thiserror::Error;

/// Errors raised by the geometry, flow and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("principal curvatures {kappa:?} are outside the cone of speed `{speed}`")]
    ConeViolation { speed: String, kappa: Vec<f64> },

    #[error("nodes {index} and {next} are closer than {threshold:e}")]
    DegenerateSpacing {
        index: usize,
        next: usize,
        threshold: f64,
    },

    #[error("profile node {index} violates the axis constraint (r = {r})")]
    AxisViolation { index: usize, r: f64 },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("coincident points: |X(x) - X(y)| = {distance:e}")]
    CoincidentPoints { distance: f64 },

    #[error("non-finite coordinates after step {step}")]
    Instability { step: usize },

    #[error("input is not convex: kappa = {kappa} at sample {index}")]
    NonConvexInput { index: usize, kappa: f64 },

    #[error("speed is not positive at snapshot {snapshot} (min F = {min_f})")]
    NonPositiveSpeed { snapshot: usize, min_f: f64 },

    #[error("a resampling event lies between snapshots {snapshot} and {next}")]
    ResampleBoundary { snapshot: usize, next: usize },

    #[error("bodies are in contact initially (d_min = {distance:e})")]
    InitialContact { distance: f64 },

    #[error("cannot parse speed `{input}`: bad token `{token}`")]
    SpeedParse { input: String, token: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
