//! Kronecker-kernel learning of conditional rankings on graphs.
//!
//! Nodes carry feature vectors, a node kernel is lifted to edges through a
//! Kronecker product, and dual coefficients are trained either in closed
//! form on complete graphs or with BiCGSTAB on arbitrary edge sets.

pub mod cli;
pub mod datasets;
pub mod error;
pub mod graph;
pub mod kernels;
pub mod linalg;
pub mod losses;
pub mod model;
pub mod solvers;

pub use error::{Error, Result};
