use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("particle cloud must contain at least one particle")]
    EmptyCloud,

    #[error("particle cloud must have dimension >= 1")]
    ZeroDim,

    #[error("non-finite coordinate at particle {particle}, coordinate {coordinate}")]
    NonFinite { particle: usize, coordinate: usize },

    #[error("degenerate domain box in coordinate {coordinate}: [{low}, {high}]")]
    DegenerateDomain {
        coordinate: usize,
        low: f64,
        high: f64,
    },

    #[error("unknown objective '{0}'; run `list-objectives` for the registry")]
    UnknownObjective(String),

    #[error("objective '{name}' requires dimension >= {min_dim}, got {dim}")]
    BadDimension {
        name: String,
        min_dim: usize,
        dim: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "moment singularity: {moment} at coordinate {coordinate} is {value:.3e} (floor {floor:.1e})"
    )]
    SingularMoment {
        moment: &'static str,
        coordinate: usize,
        value: f64,
        floor: f64,
    },

    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:.3e})")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("run diverged at iteration {iteration}: non-finite particle state")]
    Diverged { iteration: usize },

    #[error("missing traces: {0:?}")]
    MissingTraces(Vec<String>),

    #[error("iteration grids do not match across traces ({0})")]
    MismatchedGrid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("failed to parse {path}: {message}")]
    Parse { path: String, message: String },
}
