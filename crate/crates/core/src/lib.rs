//! Numerical toolkit for complemented Brunn–Minkowski inequalities.
//!
//! Measures on `R^n` are represented through a polar disintegration: an
//! angular weight sampled on a [`DirectionGrid`](geometry::DirectionGrid) and a
//! one-dimensional radial law shared by every ray. Star bodies and co-stars are
//! described by their radial functions on the same grid, so masses reduce to
//! weighted sums of one-dimensional integrals.
//!
//! The crate is `no_std` with `alloc`; the default `std` feature only switches
//! floating point intrinsics to the platform implementation.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod exponents;
pub mod geometry;
pub mod linalg;
pub mod measures;
pub mod numeric;
pub mod onedim;
pub mod oracle;
pub mod report;
pub mod sobolev;
pub mod verifiers;

pub use error::{Error, Result};
pub use exponents::{dual_exponent, homogeneous_dual, power_mean, ExtNonneg, Exponent};
pub use report::{IneqReport, Orientation};
