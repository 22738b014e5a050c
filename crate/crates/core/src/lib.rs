//! Spacing statistics for finite point sets on the unit torus, together with
//! an interval-swap construction of a sequence whose nearest-neighbour gaps
//! are exponentially distributed although the sequence is not equidistributed.
//!
//! All points are exact rationals with a common denominator. Uniform variates
//! are 53-bit dyadic rationals, so even "real" samples are handled exactly and
//! gap multisets can be compared without touching floating point.

pub mod construction;
pub mod error;
pub mod gapstats;
pub mod io;
pub mod points;
pub mod rng;
pub mod structure;

#[cfg(any(test, feature = "oracle"))]
pub mod oracle;

pub use error::{Error, Result};
pub use points::{gaps, order_points, GapMultiset, GridPoint, PointSet, DYADIC_DEN};
pub use rng::SeededStream;
