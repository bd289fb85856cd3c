//! Numerical core for frequency-multiplexed continuous-variable QKD.
//!
//! The crate evaluates secret-key rates of entanglement-based CV-QKD from
//! multimode covariance matrices and searches for local beam-splitter
//! networks (applied by each trusted party to its own homodyne data) that
//! undo crosstalk between multiplexed mode pairs.
//!
//! Everything here is `no_std` with `alloc`: file formats, the command line
//! and thread-level parallelism live in the `cvmux` companion crate.
//!
//! Conventions used throughout:
//!
//! * covariance matrices are in shot-noise units (vacuum variance 1);
//! * quadratures are interleaved, `(x_1, p_1, x_2, p_2, ...)`;
//! * entropies and mutual information are in bits per multimode channel use.

#![no_std]
#![deny(unsafe_code)]
#![warn(missing_debug_implementations)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod channel;
pub mod decoupler;
mod error;
pub mod gaussian;
pub mod security;
pub mod source;

pub use channel::ChannelSpec;
pub use error::{Error, Result};
pub use gaussian::{CovarianceState, ModePartition, Quadrature, SymplecticForm};
pub use security::{ErrorModel, KeyRateReport};
