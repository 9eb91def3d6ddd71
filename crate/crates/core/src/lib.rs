//! Explicit kernel Minkowski weighted K-means.
//!
//! Histogram-like nonnegative data is lifted through an approximate,
//! finite-dimensional feature map of a homogeneous additive kernel
//! ([`featmap`]), then clustered in the mapped space with a Minkowski
//! K-means that can learn per-cluster feature weights ([`clustering`]).
//!
//! Supporting pieces:
//! - [`minkcore`]: Minkowski / fractional distances and center solvers.
//! - [`diagnostics`]: distance concentration measurements.
//! - [`evaluation`]: NMI, purity and semi-supervised exponent selection.
//! - [`cli_io`]: CSV ingestion, JSON reports and the command line front end.

pub mod cli_io;
pub mod clustering;
pub mod diagnostics;
pub mod error;
pub mod evaluation;
pub mod featmap;
pub mod minkcore;

pub use clustering::{ClusterModel, Dataset, Init, RunConfig};
pub use error::{Error, Result};
pub use featmap::{FeatureMap, KernelKind, KernelSpec, MapConfig, MappedDataset};
pub use minkcore::{Exponent, WeightMatrix};
