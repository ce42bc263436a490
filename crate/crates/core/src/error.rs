//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by graph construction, file I/O, operator assembly and
/// the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("self-loop at node {0}")]
    SelfLoop(usize),

    #[error("edge ({i}, {j}) out of range for {n} nodes")]
    EdgeOutOfRange { i: usize, j: usize, n: usize },

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("graph must have at least one node")]
    EmptyGraph,

    #[error("invalid community partition: {0}")]
    InvalidPartition(String),

    #[error("invalid edge probabilities: {0}")]
    InvalidProbability(String),

    #[error("generated graph disconnected after {attempts} attempts; raise p_in/p_out")]
    SbmDisconnected { attempts: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("missing edge ({0}, {1}) in curvature file")]
    MissingCurvature(usize, usize),

    #[error("curvature entry for unknown edge ({0}, {1})")]
    UnknownEdge(usize, usize),

    #[error("duplicate curvature entry for edge ({0}, {1})")]
    DuplicateCurvature(usize, usize),

    #[error("non-finite curvature on edge ({0}, {1})")]
    NonFiniteCurvature(usize, usize),

    #[error("curvature {kappa} on edge ({i}, {j}) would overflow exp(-kappa)")]
    WeightOverflow { i: usize, j: usize, kappa: f64 },

    #[error("nonpositive weight on edge ({0}, {1})")]
    NonPositiveWeight(usize, usize),

    #[error("weight field does not match graph: {0}")]
    WeightMismatch(String),

    #[error("weights must lie in (0, 1]: edge ({0}, {1}) has weight {2}")]
    WeightOutOfUnit(usize, usize, f64),

    #[error("graph is disconnected; contact operators require a connected graph")]
    Disconnected,

    #[error("zero row {0} in contact matrix")]
    ZeroRow(usize),

    #[error("matrix entry ({i}, {j}) invalid: {msg}")]
    InvalidEntry { i: usize, j: usize, msg: String },

    #[error("row {row} of a row-stochastic matrix sums to {sum}, expected 1")]
    NotStochastic { row: usize, sum: f64 },

    #[error(
        "power iteration did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite state at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },

    #[error("Volterra function requires a strictly interior state")]
    NonInteriorState,

    #[error("no endemic equilibrium: R0 = {r0} <= 1")]
    NoEndemicEquilibrium { r0: f64 },

    #[error("bracket construction failed: {0}")]
    BracketFailure(String),

    #[error("fixed-point iteration hit {max_iter} iterations (bracket width {width:.3e})")]
    FixedPointMaxIter { max_iter: usize, width: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
