//! Perturbative light–matter spectroscopy with quantized fields.

pub mod cli;
pub mod config;
pub mod error;
pub mod field;
pub mod matter;
pub mod operator;
pub mod oracle;
pub mod response;
pub mod superop;

pub use error::{Error, Result};
