//! Exact-arithmetic toolkit for pointed metric spaces and strongly
//! norm-attaining Lipschitz functions.
//!
//! The crate builds finite metric spaces (explicit or truncated from
//! closed-form generators), computes Lipschitz norms and attainment
//! witnesses exactly, decides the isometric-c0 property of a function
//! family through the pairwise certificate, constructs certified tent and
//! spike families, replays the counterexample proof patterns as
//! refutation searches, and extracts separated subsets from net
//! hierarchies. Every quantity is an arbitrary-precision rational; there
//! is no floating point in any decision path.
//!
//! With the default `parallel` feature the pair and triple scans run on
//! rayon with deterministic reductions; disabling it swaps in sequential
//! loops with identical results.

pub mod certify;
pub mod constructions;
pub mod error;
pub mod fixtures;
pub mod generator;
pub mod io;
pub mod lip;
pub mod metric;
pub mod petr;
pub mod rat;
pub mod refuter;
pub mod selfcheck;

mod scaled;

#[doc(hidden)]
pub use scaled::kernels;

pub use error::{Error, Result};
pub use rat::Rat;
