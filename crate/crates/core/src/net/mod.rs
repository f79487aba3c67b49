//! Dense tensor math and the stacked-LSTM generator network.

mod checkpoint;
mod lstm;
mod model;
mod optim;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Checkpoint};
pub use lstm::{LstmLayer, LstmState};
pub use model::{Dense, LstmModel, ModelConfig, Params, StreamState, PARAM_NAMES};
pub use optim::{Optimizer, OptimizerKind};

/// N-dimensional 64-bit array used at module boundaries.
pub type Tensor = ndarray::ArrayD<f64>;

#[derive(Debug, thiserror::Error)]
pub enum NetError {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
