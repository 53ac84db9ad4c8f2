//! Exact computational engine for free chaos spaces.
//!
//! Square-integrable kernels on `[0, T]^n` are represented by step functions on a
//! uniform grid. That subspace is closed under tensor products, nested and star
//! contractions, index permutations and slicing, so every quantity computed here
//! (inner products, moments of multiple Wigner and free Poisson integrals,
//! covariances, gradient pairings) is exact up to floating point rounding.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the random-matrix
//! oracle and the experiment runner live in the `freechaos` companion crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bichaos;
pub mod catalog;
pub mod chaos;
pub mod contraction;
mod error;
pub mod freeness;
pub mod grid;
pub mod kernel;
pub mod limits;
pub mod numeric;
pub mod oracles;

pub use bichaos::{BiChaosElement, BiKernel};
pub use chaos::{ChaosElement, Kind};
pub use contraction::{nested_contract, star_contract};
pub use error::{Error, Result};
pub use freeness::{FreenessVerdict, Method, SequenceTrace, Trend};

pub use grid::GridSpec;
pub use kernel::{CellBox, Kernel, Storage};
pub use oracles::NCPartition;

/// Crate version, echoed into experiment reports.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
