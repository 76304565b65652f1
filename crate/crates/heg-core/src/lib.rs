//! Coalition formation with capped coalition sizes, where a group's worth is
//! the sum over skills of the best expertise among its members and every
//! member of a coalition values it by that same worth.
//!
//! The crate provides:
//!
//! - instance and partition types with JSON round-trips ([`instance`],
//!   [`partition`]),
//! - the shared-value game abstraction plus table and closure adapters,
//!   structure checks, and the sorted-utilities potential ([`game`],
//!   [`hgcrp`]),
//! - stability checkers with explicit witnesses ([`stability`]),
//! - constructive solvers: better-response dynamics, the swap construction,
//!   and the greedy coalition builder with its brute-force oracle
//!   ([`algorithms`]),
//! - instance generators and reductions from covering problems and weighted
//!   graphs ([`generators`]),
//! - a deterministic desk-scale verification suite ([`verify`]).
//!
//! Budgets for the exhaustive oracles live in [`num::Limits`]; every scan
//! that could run away checks them first and reports a capability error
//! instead of stalling.

pub mod algorithms;
pub mod enumerate;
pub mod error;
pub mod game;
pub mod generators;
pub mod hgcrp;
pub mod instance;
pub mod num;
pub mod partition;
pub mod stability;
pub mod verify;

pub use error::{Error, Result};
pub use game::Game;
pub use instance::Instance;
pub use num::{Limits, ValueCmp, DEFAULT_EPSILON, ONE_MINUS_INV_E};
pub use partition::{Coalition, Partition};
