use crate::numeric::RootError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown background descriptor `{0}`")]
    UnknownDescriptor(String),
    #[error("spatial metric not positive-definite: {0}")]
    NotPositiveDefinite(String),
    #[error("singular metric at chart point {0:?}")]
    SingularMetric([f64; 4]),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("conformal factor e^(2 theta) = {factor:e} below floor {floor:e}")]
    DegenerateConformalFactor { factor: f64, floor: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("coincidence extrapolation error estimate {estimate:e} exceeds tolerance {tol:e}")]
    Extrapolation { estimate: f64, tol: f64 },
    #[error("inconsistent tail data: {0}")]
    InconsistentTail(String),
    #[error("invalid parameter `{key}`: {msg}")]
    InvalidParameter { key: String, msg: String },
    #[error("root finding failed: {0}")]
    Root(#[from] RootError),
    #[error("no root on [{lo}, {hi}]; residual scan (x, f): {scan:?}")]
    NoRoot { lo: f64, hi: f64, scan: Vec<(f64, f64)> },
    #[error("config error at line {line}, column {column}: {msg}")]
    Config { line: usize, column: usize, msg: String },
    #[error("evolution halted at t = {time}: {msg}")]
    Halted { time: f64, msg: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
