use alloc::vec::Vec;

use crate::kernels::Family;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("kernel index {n} is out of range for {family} (allowed {min}..={max})")]
    InvalidKernelIndex {
        family: Family,
        n: u32,
        min: u32,
        max: u32,
    },
    #[error("unknown kernel family `{0}`")]
    UnknownFamily(alloc::string::String),
    #[error("malformed kernel spec `{0}` (expected family:n)")]
    MalformedKernelSpec(alloc::string::String),
    #[error("field evaluation returned a non-finite value at t = {t}")]
    Evaluation { t: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("kernel support maps to [{lo}, {hi}] which leaves the path grid [{grid_lo}, {grid_hi}]")]
    OutsideGrid {
        lo: f64,
        hi: f64,
        grid_lo: f64,
        grid_hi: f64,
    },
    #[error("path spacing {spacing} is coarser than the required {required}")]
    Resolution { spacing: f64, required: f64 },
    #[error("objective became non-finite at iteration {iteration} (last finite iterate {last_point:?})")]
    NonFiniteObjective {
        iteration: usize,
        last_point: Vec<f64>,
    },
    #[error("non-finite activation in layer {layer}")]
    NonFiniteActivation { layer: usize },
    #[error("training loss became non-finite in epoch {epoch}")]
    Diverged { epoch: usize },
}
