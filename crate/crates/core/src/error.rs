use std::path::PathBuf;

use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system specification: {0}")]
    InvalidSpec(ValidationReport),

    #[error("state dimension {dimension} exceeds the dimension cap of {cap}")]
    DimensionCap { dimension: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid spectral density: {0}")]
    SpectralDensity(String),

    #[error("the sink dissipator is defined on the site basis; got an eigen-basis Hamiltonian")]
    SinkInEigenBasis,

    #[error("the amplitude picture has no sink channel (gamma_sink = {0})")]
    SinkNotSupported(f64),

    #[error("bath window too narrow: captured coupling weight {captured:.6} < 0.99 of the total")]
    BathWindow { captured: f64 },

    #[error("bath discretization needs at least {min} modes, got {got}")]
    TooFewBathModes { min: usize, got: usize },

    #[error("invariant violated at t = {time}: {detail}")]
    Invariant { time: f64, detail: String },

    #[error("integrator step size underflow at t = {0}")]
    StepUnderflow(f64),

    #[error("{0}")]
    Config(String),

    #[error("time grids differ between runs {0} and {1}")]
    GridMismatch(String, String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
