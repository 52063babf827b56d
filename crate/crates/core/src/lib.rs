//! Realisation-ensemble model of quantum chaos for periodically perturbed
//! one-dimensional Hamiltonian systems.
//!
//! The crate is `no_std` and needs only `alloc`. It contains:
//!
//! - [`spectrum`]: finite-difference bound-state solver for the unperturbed
//!   potential and the derived level separation, frequency and `ε*` set.
//! - [`realisations`]: realisation counting, probabilities `αᵢ`, jump
//!   realisations with shifted effective-potential amplitude, density of
//!   realisations.
//! - [`borders`]: classical and quantum chaos borders, chaoticity `K`,
//!   intermittent domains and regime classification.
//! - [`ensemble`]: noise-triggered jumps between realisations and the
//!   resulting probability-density estimate.
//! - [`tunnelling`]: chaotic jump-tunnelling probabilities.
//! - [`classical`]: Chirikov standard map used as the classical reference.
//!
//! All quantities are in caller-chosen consistent units.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod borders;
pub mod classical;
pub mod ensemble;
mod error;
pub mod grid;
mod math;
pub mod params;
pub mod realisations;
pub mod serde_inf;
pub mod spectrum;
pub mod tridiag;
pub mod tunnelling;

pub use error::{Error, Result};
pub use params::SystemParams;
