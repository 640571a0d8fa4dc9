pub mod cli;
pub mod config;
pub mod cvae;
pub mod dataset;
pub mod gan;
pub mod gradcheck;
mod error;
pub mod model;
pub mod nn;
pub mod pipeline;
pub mod realnvp;
pub mod rng;
pub mod text;
pub mod vae;
pub mod validation;

pub use error::{Error, Result};
