//! Real-time state estimation of a Rabi-oscillating qubit monitored by a
//! sequence of discrete unsharp sigma_z measurements.
//!
//! - [`qubit`]: states, propagators, effects and Kraus operators.
//! - [`protocol`]: the elementary evolve-measure-update step and trajectories.
//! - [`analytics`]: closed-form one-step fidelity change, the fidelity rate
//!   equation, its RK4 integration and asymptotic fidelities.
//! - [`ensemble`]: seeded, reproducible Monte Carlo ensembles.
//! - [`cli`]: experiment presets and CSV output.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod cli;
pub mod ensemble;
pub mod error;
pub mod protocol;
pub mod qubit;
pub mod rng;

pub use error::{Error, Result};
