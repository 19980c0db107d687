//! Simulation and robust prediction intervals for direct treatment effects
//! when treatments follow a Curie–Weiss (Ising) assignment and units interact
//! through a latent random network.

pub mod cli;
pub mod config;
pub mod error;
pub mod estimators;
pub mod graph;
pub mod harness;
pub mod inference;
pub mod ising;
pub mod laws;
pub mod numeric;
pub mod outcome;

pub use error::{Error, Result};
