use thiserror::Error;

use crate::geometry::Point2;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no point survived the domain filter")]
    EmptyResult,

    #[error("candidates are not polynomial-determining: no admissible pivot at step {step}")]
    RankDeficient { step: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid value: {0}")]
    Value(String),

    #[error("io error on {path}: {msg}")]
    Io { path: String, msg: String },

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("interpolation matrix is numerically singular")]
    Singular,

    #[error("leave-one-out diagonal entry {index} is degenerate ({value:e})")]
    DegenerateDiagonal { index: usize, value: f64 },

    #[error("every parameter candidate failed")]
    AllCandidatesFailed,

    #[error("data point {index} is not covered by any patch")]
    CoverageFailure { index: usize },

    #[error("point ({}, {}) lies outside every patch", .0.x, .0.y)]
    UncoveredPoint(Point2),

    #[error("could not build a unisolvent covering (seed point {seed})")]
    CoverFailure { seed: usize },

    #[error("evaluation point coincides with data point {index}")]
    NodeHit { index: usize },

    #[error("mu = {mu} does not exceed the threshold {threshold}")]
    MuTooSmall { mu: f64, threshold: f64 },

    #[error("interpolant failed at rule node {index}: {source}")]
    NodeEvaluation {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
