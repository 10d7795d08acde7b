use thiserror::Error;

use crate::model::DriveAxis;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The closed-form particular solution is singular at `Omega == omega`.
    #[error(
        "closed form unusable near resonance: |omega^2 - Omega^2| = {gap:.3e} <= {threshold:.3e} (use the numeric path)"
    )]
    Resonance { gap: f64, threshold: f64 },

    #[error("bad time grid: {0}")]
    Grid(String),

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("no rational p/q within 1e-12 of {ratio} with q <= {max_den}")]
    Incommensurate { ratio: f64, max_den: u64 },

    #[error("curve is not closed: endpoints differ by {gap:.3e}")]
    OpenCurve { gap: f64 },

    #[error("Fock truncation unsafe: tail mass {tail_mass:.3e} exceeds 1e-10 at N = {dim} (try N >= {suggested})")]
    Truncation {
        tail_mass: f64,
        dim: usize,
        suggested: usize,
    },

    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),

    #[error("{axis} axis: {source}")]
    Axis {
        axis: DriveAxis,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn on_axis(self, axis: DriveAxis) -> Error {
        Error::Axis {
            axis,
            source: Box::new(self),
        }
    }

    /// Strips axis tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Axis { source, .. } => source.root(),
            e => e,
        }
    }
}
