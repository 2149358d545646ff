//! Selfish coded caching under the symmetric `(K, alpha, f)` file demand set
//! structure.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure
//! computation:
//!
//! * [`fds`]: users, file classes, demands and their validity.
//! * [`placement`]: the selfish MAN-style placement and the unselfish MAN
//!   baseline.
//! * [`demands`]: circular demands, alpha-demands, FDS request graphs and the
//!   circular-shift counting identity.
//! * [`delivery`]: XOR delivery schemes and GF(2) decodability checking.
//! * [`bounds`]: closed-form converse, baselines, coding gains and the LP step.
//! * [`oracle`]: brute-force reconstruction of the converse through index
//!   coding acyclic-set bounds.
//!
//! Every load and fraction is an exact [`Rational`]; nothing on a correctness
//! path touches floating point.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod combinatorics;
pub mod delivery;
pub mod demands;
mod error;
pub mod fds;
pub mod gf2;
pub mod oracle;
pub mod placement;
mod rational;

pub use error::{Error, Result};
pub use fds::{Demand, FdsStructure, FileRef, UserSet, MAX_USERS};
pub use rational::Rational;

/// Default ceiling on enumerated items (demands or bound evaluations).
pub const DEFAULT_CAP: u64 = 10_000_000;
