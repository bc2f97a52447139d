//! Exact exterior critical series of persistence barcodes and of finite
//! persistence modules on integer grids.
//!
//! - [`series`]: sparse formal sums `Σ c x^a y^b z^k` with rational exponents
//! - [`barcode`]: bars, barcodes, their series and powers, and the forward map
//! - [`reconstruct`]: the inverse map from an exterior critical series back to
//!   its barcode
//! - [`gridmod`]: grid persistence modules with explicit linear maps, rank
//!   invariants, tensor and exterior powers, and module-level series

pub mod barcode;
pub mod gridmod;
pub mod reconstruct;
pub mod series;

pub use barcode::{ecs, Bar, Barcode, BarcodeError, DEFAULT_BUDGET};
pub use reconstruct::{reconstruct, ReconstructError};
pub use series::{ExpKey, FormalSum, Indeterminate, Rational, SeriesError};
