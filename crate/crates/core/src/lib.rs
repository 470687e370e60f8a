//! Simulation and verification laboratory for weighted recursive trees (WRT)
//! and affine preferential-attachment trees (PAT).
//!
//! The crate grows both tree families at scale, exposes the Beta-product urn
//! representation that couples them, evaluates the limit laws of rescaled
//! degrees (Mittag-Leffler chains, generalized Gamma products), and ships an
//! exact small-instance oracle certifying that the two tree laws coincide.

// parameter validation uses `!(x > 0.0)` so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod check;
pub mod error;
pub mod experiment;
pub mod fenwick;
pub mod limits;
pub mod oracle;
pub mod pagraph;
pub mod rng;
pub mod sequences;
pub mod stats;
pub mod trees;
pub mod urns;

pub use error::{Error, Result};
