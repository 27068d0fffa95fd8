//! Spin-coupled state preparation: circuits, oracles, simulation and subspace methods.
//!
//! Qubit `2i` is the α spin-orbital of spatial orbital `i`, qubit `2i+1` the β one, and
//! qubit 0 is the least-significant bit of every basis index.

// `!(x > 0.0)` guards are written to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asp;
pub mod circuit;
pub mod csf;
pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod pauli;
pub mod references;
pub mod resources;
pub mod sim;
pub mod studies;
pub mod subspace;
pub mod synth;

pub use error::{Error, Result};
