//! Cascaded asymmetric local pattern (CALP) descriptor, classical LBP-family
//! baselines, χ² nearest-neighbor matching and the retrieval / recognition
//! measures used to benchmark them.
//!
//! The usual flow is [`dataset::scan_dataset`] to load a directory-per-class
//! corpus, [`descriptor::extract_features`] to describe every image, and the
//! [`eval`] functions to score the features.

pub mod cli;
pub mod dataset;
pub mod descriptor;
pub mod error;
pub mod eval;

pub use dataset::{load_image, make_splits, scan_dataset, ClassLabels, Dataset, GrayImage, Split};
pub use descriptor::{Descriptor, DescriptorKind, FeatureVector};
pub use error::{Error, Result};
