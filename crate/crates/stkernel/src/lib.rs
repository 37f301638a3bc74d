//! Space-time covariance kernels with full, dynamical and compact support.
//!
//! The crate covers the Matérn, Generalized Wendland and Cauchy building blocks,
//! the DGW family and its temporally tapered variant, the space-time Matérn DM
//! model, their spectral densities, compatibility predicates between models,
//! covariance-matrix assembly and factorization, and likelihood-based
//! estimation and kriging on fixed domains.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod compat;
pub mod covmat;
pub mod error;
pub mod inference;
pub mod kernels;
pub mod par;
pub mod quad;
pub mod spectral;
pub mod specfun;

pub use error::{Error, Result};
pub use par::Parallelism;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
