//! Schedule synthesis and verification for patrol security games.
//!
//! A defender patrols `n` targets of values `α_i` (normalized to sum to one,
//! each at most one half), spending one time unit per move. An attacker picks
//! a target and an attack duration against the defender's randomized
//! schedule. This crate builds defender schedules and computes the attacker's
//! best response exactly:
//!
//! * [`dyadic`]: the optimal 2-quasi-regular random sequence, obtained by
//!   rounding the values to powers of two ([`rounding`]) and interleaving.
//! * [`golden`]: the Golden Ratio rotation schedule with exact arithmetic in
//!   `Q(√5)`, plus the closed-form three-gap distribution.
//! * [`matching`]: periodic schedules from perfect matchings of slots and
//!   visit tokens on the circle.
//! * [`attacker`]: best responses against piecewise linear return-time CDFs.
//! * [`verifier`]: quasi-regularity measurement and optimality certificates.

pub mod attacker;
pub mod dyadic;
mod error;
pub mod gaps;
pub mod golden;
pub mod matching;
pub mod rng;
pub mod rounding;
mod scalar;
pub mod sequence;
#[cfg(test)]
mod testing;
pub mod values;
pub mod verifier;

pub use attacker::AttackerResponse;
pub use error::{Error, Result};
pub use gaps::{GapDistribution, PiecewiseLinearCdf};
pub use scalar::Scalar;
pub use sequence::PeriodicSequence;
pub use values::{Rational, ValueVector};
