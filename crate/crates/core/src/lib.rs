//! Link-level simulation of OFDM and GFDM systems with pilot-aided channel
//! estimation.
//!
//! The crate is split along the signal chain:
//!
//! - [`primitives`]: unitary DFTs, structured matrix constructors and QPSK.
//! - [`waveforms`]: OFDM and GFDM modulators, the RRC prototype filter and
//!   interference-free pilot framing.
//! - [`channel`]: tapped-delay-line Rayleigh channels, AWGN and pilot
//!   covariance synthesis.
//! - [`estimators`]: LS, LMMSE, LS-BEM, LMMSE-BEM and approximated
//!   LMMSE-BEM, with complex-exponential and Legendre bases.
//! - [`detection`]: zero-forcing equalization, GFDM interference
//!   cancellation and bit-error counting.
//! - [`harness`]: seeded Monte Carlo MSE/BER sweeps and report emission.

pub mod channel;
pub mod detection;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod primitives;
pub mod rng;
pub mod waveforms;

pub use error::{Error, Result};
pub use num_complex::Complex64;
