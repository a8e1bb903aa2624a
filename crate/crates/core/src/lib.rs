//! High-precision evaluation and verification of the Green function of a
//! complex torus, with the exact arithmetic around it: Bernoulli numbers,
//! order bounds for residue ratio sets and integer relation detection.

pub mod arith;
pub mod bernoulli;
pub mod cli;
pub mod elliptic;
pub mod error;
pub mod green;
pub mod lattice;
pub mod numerics;
pub mod orderbound;
pub mod reckon;
pub mod report;
pub mod suite;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
