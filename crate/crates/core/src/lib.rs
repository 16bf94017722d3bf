//! Subspace face recognition: subclass partitioning, scatter analysis, eigen-spectrum
//! regularized whitening, subclass discriminant features, cosine 1-NN matching and the
//! evaluation protocols used to measure them.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below fix the
//! scalar to `f64`, which is what the command-line tool uses.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod matcher;
pub mod partition;
pub mod scalar;
pub mod scatter;
pub mod subspace;

mod digest;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Dataset = dataset::Dataset<f64>;
pub type FaceSample = dataset::FaceSample<f64>;
pub type GalleryProbeSplit = dataset::GalleryProbeSplit<f64>;
pub type Matrix = linalg::Mat<f64>;
pub type ScatterSet = scatter::ScatterSet<f64>;
pub type SubspaceModel = subspace::SubspaceModel<f64>;
pub type GalleryIndex = matcher::GalleryIndex<f64>;
pub type MatchResult = matcher::MatchResult<f64>;
pub type EvalReport = eval::EvalReport;

pub type Dataset32 = dataset::Dataset<f32>;
pub type SubspaceModel32 = subspace::SubspaceModel<f32>;
pub type GalleryIndex32 = matcher::GalleryIndex<f32>;
