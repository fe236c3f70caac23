//! Random geometric graphs on points with i.i.d. exponential coordinates.
//!
//! Two vertices are adjacent when their l∞ distance is at most the edge
//! distance `y`. The crate samples such graphs reproducibly, computes their
//! degree statistics, evaluates the closed-form quantities that govern the
//! minimum and maximum degree, and runs seeded Monte Carlo suites that
//! confront the two.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod cli;
pub mod error;
pub mod experiments;
pub mod model;
pub mod numfmt;
pub mod sampling;
pub mod spatial;
pub mod stats;
pub mod theory;
pub mod verify;

pub use error::{Error, Result};
pub use model::{
    DegreeSummary, EdgeDistanceFamily, FamilyRule, PointCloud, Provenance, RggConfig, TheoryBounds,
};
