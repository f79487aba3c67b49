//! Character-level LSTM generation of SMILES molecules, with the chemistry
//! needed to check, canonicalize and describe what the network produces.

pub mod analyze;
pub mod chem;
#[cfg(feature = "cli")]
pub mod cli;
pub mod corpus;
pub mod descriptors;
pub mod encode;
pub mod net;
pub mod sample;
pub mod smiles;
pub mod train;
