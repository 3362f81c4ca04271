#![no_std]

//! Randomized symmetry breaking in anonymous synchronous networks.
//!
//! Parties carry no identifiers and are wired to `k` independent uniform bit
//! sources; parties sharing a source see identical bits. This crate models
//! the resulting executions combinatorially:
//!
//! - [`complexes`]: chromatic complexes stored as facet antichains, the
//!   value projection and a simplicial-map checker.
//! - [`randomness`]: randomness configurations, realizations, exact
//!   probabilities and exhaustive enumeration.
//! - [`knowledge`]: full-information knowledge in the blackboard and
//!   port-numbered message-passing models, computed both as explicit terms
//!   and by class refinement.
//! - [`tasks`]: symmetric output complexes and per-realization solvability.
//! - [`analysis`]: exact solvability probabilities and the eventual
//!   solvability classifiers.
//! - [`protocols`]: executable round-synchronous protocols (blackboard
//!   election, randomized matching, Euclid-style election, leader-based task
//!   solving).
//!
//! Everything here is pure and allocation-only; IO, file formats and the
//! command line live in the `symbreak` crate.

extern crate alloc;

pub mod analysis;
pub mod complexes;
mod error;
pub mod knowledge;
pub mod protocols;
pub mod randomness;
pub mod tasks;

pub use error::{Error, Result};

/// Exact rational used for every probability in the analysis path.
pub type Rational = num_rational::BigRational;
