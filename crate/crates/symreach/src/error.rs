use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("affine map is singular (|det| = {det:e})")]
    SingularMap { det: f64 },
    #[error("region is unbounded in gridded dimension {dim}")]
    UnboundedRegion { dim: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("non-finite state at t = {t}")]
    NumericalBlowup { t: f64 },
    #[error("state is not inside the guard of edge {edge}")]
    GuardNotSatisfied { edge: usize },
    #[error("edge {edge} does not leave mode {mode}")]
    InvalidEdge { edge: usize, mode: usize },
    #[error("roads {index} and {next} are not connected")]
    DisconnectedPath { index: usize, next: usize },
    #[error("road has zero length")]
    DegenerateRoad,
    #[error("symmetry pair fails equivariance (residual {residual:e})")]
    EquivarianceFailed { residual: f64 },
    #[error("no symmetry pair registered for mode {0:?}")]
    UnknownMode(Vec<f64>),
    #[error("no fixed point after {segments} segments")]
    NoFixedPoint { segments: usize },
    #[error("virtual mode {0} has no dictionary entry")]
    UncoveredMode(usize),
    #[error("baseline initial set {index} has zero volume")]
    DegenerateBaseline { index: usize },
    #[error("{method} requires a virtual map")]
    MissingMap { method: &'static str },
    #[error("scenario error at `{path}`: {msg}")]
    Schema { path: String, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn schema(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            msg: msg.into(),
        }
    }

    /// True for failures of the numerical substrate rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalBlowup { .. }
                | Error::SingularMap { .. }
                | Error::EquivarianceFailed { .. }
                | Error::DegenerateBaseline { .. }
        )
    }
}
