//! Spectral fragility analysis of interbank exposure networks.

pub mod cli;
pub mod dynamics;
pub mod econometrics;
pub mod error;
pub mod graph;
pub mod imputer;
pub mod io;
pub mod policy;
pub mod rng;
pub mod spectral;
pub mod synthgen;

pub use error::{Error, Result};
