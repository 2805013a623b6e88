pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod geodesics;
pub mod junction;
pub mod network;
pub mod numerics;
pub mod partitions;
pub mod potential;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
