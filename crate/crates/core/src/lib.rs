//! Discrete-time simulator and capacity analyzer for a quantum switch that
//! serves multipartite entanglement requests under Max-Weight scheduling.

pub mod capacity;
pub mod cli;
pub mod config;
pub mod error;
pub mod matching;
pub mod model;
pub mod output;
pub mod scheduler;
pub mod sim;
pub mod simplex;

pub use error::{Error, Result};
