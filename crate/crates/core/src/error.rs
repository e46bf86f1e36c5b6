use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("singular zero mode: {0}")]
    SingularMode(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("block index {k} outside filter-bank window [{k_min}, {k_max}]")]
    BlockRange { k: i32, k_min: i32, k_max: i32 },

    #[error("filter bank does not cover lattice shells: {uncovered:?}")]
    Uncovered { uncovered: Vec<f64> },

    #[error("vacuum approached: 1 + a = {value:e} < {floor:e} at grid index {index}")]
    Vacuum { value: f64, floor: f64, index: usize },

    #[error("physical recovery failed: P = {value:e} at grid index {index}")]
    Recovery { value: f64, index: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("|xi| = {xi} outside validity radius {beta}")]
    OutOfValidity { xi: f64, beta: f64 },

    #[error("quadrature did not converge: relative change {change:e} after refinement")]
    Accuracy { change: f64 },

    #[error("time step {dt:e} fell below the minimum {dt_min:e}")]
    StepTooSmall { dt: f64, dt_min: f64 },
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
