use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph spec `{spec}`: {reason}")]
    InvalidGraphSpec { spec: String, reason: String },

    #[error("edge list line {line}: {reason}")]
    EdgeListParse { line: usize, reason: String },

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("self-loop at node {0}")]
    SelfLoop(usize),

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("random {d}-regular graph on {n} nodes not found after {attempts} attempts")]
    RegularGenerationFailed { n: usize, d: usize, attempts: usize },

    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("invalid initialization: {0}")]
    InvalidInit(String),

    #[error("not a probability vector: {0}")]
    NotProbability(String),

    #[error("vector is zero")]
    ZeroVector,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sequence {index} lost monotonicity at position {position}")]
    MonotonicityViolation { index: usize, position: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
