//! Coupled opinion, confidence-network and asset-price dynamics.
//!
//! `no_std` with `alloc`. The `std` feature adds a threaded ensemble
//! driver. File formats and the command line live in the `confnet` crate.

#![no_std]
extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod engine;
pub mod graph;
pub mod market;
pub mod matrix;
pub mod opinion;
pub mod sim;

pub use engine::{EngineError, EngineSetup, MarketEngine, NoiseMode};
pub use graph::{classify, gantmacher_form, AgentClassification, DirectedGraph};
pub use market::{MarketParams, UpdateRule};
pub use matrix::{ConfidenceMatrix, Matrix};
pub use opinion::{OpinionVector, StabilityReport};
pub use sim::{monte_carlo, run, SimConfig, Trajectory};
