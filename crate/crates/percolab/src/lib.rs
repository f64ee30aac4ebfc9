//! percolab: a percolation laboratory for the Hamming hypercube.
//!
//! The crate has three layers:
//!
//! - exact analytics for the non-backtracking random walk ([`nbw`]): the
//!   lumped weight kernel, the uniform mixing time, the random-walk
//!   conditions, and the lace-correction sums;
//! - deterministic, seedable bond percolation ([`perc`]) with Monte Carlo
//!   estimators and experiment harnesses on top ([`estimators`]);
//! - brute-force oracles on tiny instances ([`oracle`]) that every estimator
//!   is validated against.
//!
//! All Monte Carlo runs are reproducible: edge states come from a
//! counter-based PRF keyed by (master seed, trial, stream, edge index), and
//! trial results are reduced in trial order, so outputs are bit-identical for
//! any thread count.

pub mod error;
pub mod estimators;
pub mod graph;
pub mod nbw;
pub mod oracle;
pub mod par;
pub mod perc;
mod prf;
mod union_find;

pub use error::{Error, Result};
pub use graph::{EdgeId, GraphSpec, VertexId};
