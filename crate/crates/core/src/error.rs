use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The antenna frame is undefined (K below the admissibility floor).
    #[error(
        "frame singularity at theta = {theta_deg:.6} deg, phi = {phi_deg:.6} deg (K = {kappa:.3e})"
    )]
    FrameSingularity {
        theta_deg: f64,
        phi_deg: f64,
        kappa: f64,
    },

    #[error("{count} measurement(s) fall outside the k-space grid (first: #{first_index} at q = {first_q:?} rad/m)")]
    OutOfBand {
        count: usize,
        first_index: usize,
        first_q: [f64; 3],
    },

    #[error("dense matrix of {entries} entries exceeds the cap of {cap}")]
    SizeCap { entries: usize, cap: usize },

    #[error("AA^H is ill-conditioned (condition estimate {condition:.3e}); coincident samples: {duplicates:?}")]
    Conditioning {
        condition: f64,
        duplicates: Vec<(usize, usize)>,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("cannot suggest a grid: {0}")]
    CannotSuggest(String),

    #[error("diagonal AA^H identity does not hold: {0}")]
    IdentityViolated(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("format error in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
