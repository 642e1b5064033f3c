use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no closed form for this profile combination; use the numerical integrator")]
    Unsupported,

    #[error("non-finite generator state at s = {s}")]
    NonFiniteState { s: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("branch budget exceeded: {requested} branches requested, cap is {cap}")]
    BranchBudgetExceeded { requested: u128, cap: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("map {index} is not contractive (lambda = {lambda})")]
    Contractivity { index: usize, lambda: f64 },

    #[error("unbalanced brackets in {location} at position {position}")]
    UnbalancedBrackets { location: String, position: usize },

    #[error("edge {edge}: no heading-matched curve reaches the target (chord angle {angle} rad)")]
    NoSolution { edge: usize, angle: f64 },

    #[error("edge {edge} has coincident endpoints")]
    DegenerateEdge { edge: usize },

    #[error("curve speed vanishes on the requested span")]
    IrregularCurve,

    #[error("curve family not supported: {0}")]
    UnsupportedFamily(String),

    #[error("trees are not isomorphic at scaffold node {scaffold_node} / discrete node {discrete_node}: {reason}")]
    NotIsomorphic {
        scaffold_node: usize,
        discrete_node: usize,
        reason: String,
    },

    #[error("depth {requested} requested but the tree only reaches depth {available}")]
    DepthUnavailable { requested: usize, available: usize },

    #[error("point set is empty")]
    EmptySet,

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable tag, used in CLI error documents.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Unsupported => "unsupported",
            Error::NonFiniteState { .. } => "non_finite_state",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::BranchBudgetExceeded { .. } => "branch_budget_exceeded",
            Error::Parse { .. } => "parse",
            Error::Contractivity { .. } => "contractivity",
            Error::UnbalancedBrackets { .. } => "unbalanced_brackets",
            Error::NoSolution { .. } => "no_solution",
            Error::DegenerateEdge { .. } => "degenerate_edge",
            Error::IrregularCurve => "irregular_curve",
            Error::UnsupportedFamily(_) => "unsupported_family",
            Error::NotIsomorphic { .. } => "not_isomorphic",
            Error::DepthUnavailable { .. } => "depth_unavailable",
            Error::EmptySet => "empty_set",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
