//! Topological entropy of piecewise monotonic interval maps with holes.

pub mod config;
pub mod cylinder;
pub mod emit;
pub mod error;
pub mod hole;
pub mod kneading;
pub mod map;
pub mod markov;
pub mod par;
pub mod poly;
pub mod regularity;
pub mod scalar;

mod field;

pub use error::{Error, Result};
pub use hole::{hole_dist, Hole};
pub use map::{build_d_adic, build_scaled_farey, Branch, BranchKind, IntervalOpen, Moebius, Orientation, PiecewiseMap};
pub use par::Execution;
pub use scalar::{Mode, Scalar};
