use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid wells: {0}")]
    InvalidWells(String),

    #[error("invalid potential parameters: {0}")]
    InvalidParams(String),

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:.3e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("geodesic relaxation did not converge after {iterations} iterations")]
    PathConvergence {
        iterations: usize,
        last: Box<crate::geodesics::PathSample>,
    },

    #[error("truncation half-width too small: {0}")]
    TruncationTooSmall(String),

    #[error("tail too short for decay fit: {0}")]
    InsufficientTail(String),

    #[error("point lies on the curve (distance {0:.3e})")]
    OnCurve(f64),

    #[error("degenerate surface tension: {0}")]
    DegenerateTension(String),

    #[error("strict triangle inequality violated: {0}")]
    TriangleViolation(String),

    #[error("inconsistent labeling: {0}")]
    InconsistentLabeling(String),

    #[error("boundary arc too short: {0}")]
    ArcTooShort(String),

    #[error("target exceeds source footprint: {0}")]
    OutOfFootprint(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("circle or ball leaves the domain: {0}")]
    OutsideDomain(String),

    #[error("degenerate annulus: r1 = {r1}, r2 = {r2}")]
    DegenerateAnnulus { r1: f64, r2: f64 },

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("delta too large: {0}")]
    DeltaTooLarge(String),

    #[error("invalid boundary data: {0}")]
    InvalidBoundaryData(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unsupported field file version: expected {expected}, found {found}")]
    Version { expected: String, found: String },

    #[error("config error in {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
