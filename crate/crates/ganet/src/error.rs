//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    DimensionMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("length mismatch in {op}: expected {expected}, got {got}")]
    LengthMismatch {
        op: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value encountered in {op}")]
    NonFinite { op: &'static str },
    #[error("column {col} is fully masked (isolated node without a self-loop?)")]
    DegenerateColumn { col: usize },
    #[error("empty candidate neighborhood for node {node}")]
    DegenerateNeighborhood { node: usize },
    #[error("projection vector norm {norm:e} is below tolerance")]
    DegenerateProjection { norm: f64 },
    #[error("node {node} has degree zero; add self-loops before normalizing")]
    DegreeZero { node: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("graph file: {0}")]
    GraphFile(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
