//! Eigenvalue statistics of products of random matrices.
//!
//! The library samples products of Ginibre, rectangular Gaussian and
//! truncated Haar unitary matrices (with optional inverted factors), and
//! evaluates the determinantal kernel, the finite-size radial laws and the
//! large-size limit laws of their eigenvalues.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

mod error;

pub mod cli;
pub mod ensembles;
pub mod linalg;
pub mod quad;
pub mod radial;
pub mod rng;
pub mod special;
pub mod stats;
pub mod weights;

pub use ensembles::{EnsembleKind, EnsembleSpec, Sign, Signs};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use rng::SeedStream;
