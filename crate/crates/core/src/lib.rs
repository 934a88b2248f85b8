//! Gradient compression with a randomized Hadamard flattening step and a
//! dithered one-bit quantizer, plus an in-process parameter-server simulator.
//!
//! The pieces compose as follows:
//!
//! - [`transform`]: normalized fast Walsh–Hadamard transform and the random
//!   sign-flipped basis `H_ε = H·D_ε`.
//! - [`quantizer`]: the K-averaged dithered one-bit quantizer and its
//!   closed-form moments.
//! - [`codec`]: encoder, decoder and the byte format a worker transmits.
//! - [`oracle`]: objectives and stochastic gradient oracles.
//! - [`simulator`]: the distributed protocol, baselines and traces.
//! - [`cli`]: experiment files and the command-line front end.

pub mod cli;
pub mod codec;
pub mod error;
pub mod oracle;
pub mod quantizer;
pub mod rng;
pub mod simulator;
pub mod transform;

mod bits;

pub use error::{Error, Result};
