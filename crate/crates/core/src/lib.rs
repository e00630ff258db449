//! Numerical core of an itinerant signal classifier: class-wise adaptive
//! filters whose parameter estimates wander over a unit circle until the
//! filtered residual vanishes, plus the tooling to tune, simulate, verify and
//! realize them as a fixed-weight recurrent network.
#![no_std]
// `!(x > 0.0)` is the NaN-rejecting form of every range check
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod classifier;
pub mod error;
pub mod experiment;
pub mod integrator;
pub mod plant;
pub mod prototype;
pub mod rng;
pub mod rnn;
pub mod signals;

pub use error::{Error, Result};
