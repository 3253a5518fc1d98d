use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("steady-state system is singular (sigma_min/sigma_max = {ratio:.3e})")]
    SingularSystem { ratio: f64 },

    #[error("degenerate rates: 2*gamma_bc*Delta^2 + gamma*|Omega_d|^2 vanishes")]
    DegenerateRates,

    #[error("coefficient A has no positive root in [0, 10*gamma]")]
    NoSignChange,

    #[error("quadrature not converged: n and 2n nodes differ by {relative:.3e} (relative)")]
    QuadratureDivergence { relative: f64 },

    #[error("reference transmission underflows ({reference:.3e}); the cell is opaque")]
    ZeroBackground { reference: f64 },

    #[error("spectrum is flat (variance {variance:.3e}); nothing to fit")]
    DegenerateSpectrum { variance: f64 },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("schema mismatch: expected header `{expected}`, found `{found}`")]
    SchemaMismatch { expected: String, found: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
