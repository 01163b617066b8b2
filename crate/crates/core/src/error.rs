use alloc::boxed::Box;
use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("radius {r} outside the annulus [{r_inner}, {r_outer}]")]
    Domain { r: f64, r_inner: f64, r_outer: f64 },

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("singular system at wavenumbers {label}")]
    Singular { label: String },

    #[error("solve residual {residual:e} exceeds tolerance at {label}")]
    Residual { label: String, residual: f64 },

    #[error("leading eigenvalue at k = {k} is complex (imaginary part {imag:e}); outside the non-oscillatory regime")]
    Regime { k: f64, imag: f64 },

    #[error("eigensolver failure at k = {k}: {reason}")]
    Eigen { k: f64, reason: String },

    #[error("adjoint eigenvalue {adjoint} inconsistent with direct eigenvalue {direct} at k = {k}")]
    AdjointMismatch { k: f64, direct: f64, adjoint: f64 },

    #[error("mode branch tracking broke between k = {from} and k = {to} (overlap {overlap:.3})")]
    BranchTracking { from: f64, to: f64, overlap: f64 },

    #[error("no sign change bracketed: {0}")]
    SearchRange(String),

    #[error("missing dependency: {0}")]
    Dependency(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("fixed-point iteration did not converge at t = {t} within {iterations} iterations (update {update:e}); try a smaller time step than {dt}")]
    StepFailure {
        t: f64,
        dt: f64,
        iterations: usize,
        update: f64,
    },

    #[error("Hermitian symmetry drifted by {drift:e} at t = {t}")]
    SymmetryDrift { t: f64, drift: f64 },

    #[error("at wavenumbers {tuple}: {source}")]
    At {
        tuple: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attaches the offending wavenumber tuple.
    pub fn at(self, tuple: String) -> Self {
        Error::At {
            tuple,
            source: Box::new(self),
        }
    }

    /// The innermost error, with tuple context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::At { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
