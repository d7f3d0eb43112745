//! Shock-model copulas: Marshall, maxmin and reflected maxmin families built
//! from generating functions, their imprecise (p-box) bounds, and independent
//! oracles for checking both.

pub mod cli;
pub mod config;
pub mod copulas;
pub mod distfn;
pub mod error;
pub mod example;
pub mod genfn;
pub mod imprecise;
pub mod surface;
pub mod verify;

pub use error::{Error, Result};
