use num_complex::Complex64 as C64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported polynomial degree {0} (supported: 1, 2, 3)")]
    UnsupportedDegree(usize),

    #[error("W = {w} is not a root of H (|H(W)| = {residual:.3e})")]
    InvalidSheet { w: C64, residual: f64 },

    #[error("boundary value undefined: mu_+ or mu_- vanishes at z = {0}")]
    SingularBoundary(C64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("grids do not share a GridSpec")]
    GridMismatch,

    #[error("gauge projection stagnated (relative residual {0:.3e})")]
    Projection(f64),

    #[error("conical singularity at K = 0")]
    ConicalSingularity,

    #[error("H has a repeated root near {0}")]
    RepeatedRoot(C64),

    #[error("sample coordinates do not form a uniform grid")]
    NonUniformGrid,

    #[error("surface scan failed at {failed} of {total} samples")]
    ScanFailed { failed: usize, total: usize },

    #[error("B = {b}: {source}")]
    AtB {
        b: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of an iterative numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::Projection(_) | Error::ScanFailed { .. }
        ) || matches!(self, Error::AtB { source, .. } if source.is_numerical())
    }
}
