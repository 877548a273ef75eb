//! Certified Mapper.
//!
//! Builds Mapper covers of point clouds and checks whether the cover admits the
//! nerve lemma. Two routes are available:
//!
//! * the separation route ([`separation`]): if cover elements are far enough apart
//!   compared to the persistence of every cover-element intersection, the Mapper nerve
//!   is interleaved with the Vietoris-Rips complex of the data and a quantified bound is
//!   issued;
//! * the statistical route ([`nullmodel`], [`invariants`], [`testing`]): every nerve
//!   simplex's point set is compared against uniform samples from its unbiased bounding
//!   box, and a family-wise error controlled test decides whether any intersection
//!   carries significant homology.
//!
//! [`certify`] ties both together and emits a [`certify::Certificate`].
//! [`experiments`] holds the level/power simulation harness for the statistical methods.

// `!(a < b)` is used deliberately so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod datasets;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod invariants;
pub mod io;
pub mod mapper;
pub mod nullmodel;
pub mod persistence;
pub mod plot;
pub mod rng;
pub mod separation;
pub mod testing;

pub use error::{Error, Result};
pub use geometry::{euclidean_distance, unbiased_bounding_box, BoundingBox, PointCloud};
pub use rng::RngSpec;

/// Version string embedded in certificates.
pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
