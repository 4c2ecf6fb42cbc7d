//! Directed polymers on a disordered `d`-ary tree with a localized defect.
//!
//! The crate covers three families of models that share one tree geometry:
//!
//! * homogeneous bulk disorder (every node carries an i.i.d. potential),
//! * a defect branch (the leftmost branch has its potential shifted by `u`),
//! * a defect subtree (the leftmost `d1`-ary subtree carries either the
//!   constant potential `u` or the shifted bulk potential).
//!
//! It provides the analytic free energies and phase boundaries
//! ([`closedform`]), exact quenched log-partition functions computed by tree
//! recursion together with two independent oracles ([`treesim`]), and a
//! replica Monte Carlo layer that compares finite-depth estimates against the
//! analytic anchors ([`montecarlo`]).
//!
//! All partition-function-scale quantities are exchanged in the log domain
//! (natural log).
//!
//! The crate is `no_std` and only needs `alloc`. Parallel execution is
//! injected through [`montecarlo::Executor`], so a std front end can supply a
//! thread pool without changing any result bit.

#![no_std]

extern crate alloc;

pub mod closedform;
pub mod disorder;
mod error;
pub mod math;
pub mod model;
pub mod montecarlo;
pub mod rng;
pub mod treesim;

pub use disorder::{DisorderSpec, NodeAddress};
pub use error::{Error, Result};
pub use model::{DefectKind, ModelSpec};
