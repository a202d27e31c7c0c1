//! χ² matching and the retrieval / recognition measures.
//!
//! Everything here works on plain feature vectors plus class labels and is
//! independent of the descriptor that produced the features.

pub mod ranking;
pub mod recognition;
pub mod retrieval;

pub use ranking::{chi_square, rank_all, rank_gallery, RankedItem, RankedList};
pub use recognition::{
    cmc, cross_validated_recognition, first_match_rank, leave_one_out_cmc, recognition_rate,
    split_recognition_rate, FractionResult,
};
pub use retrieval::{
    anmrr, arp, arr, f_score, hits_at, nmrr, precision_at, recall_at, RetrievalEvaluator,
    RetrievalMetrics, RetrievalRow,
};

use crate::dataset::Dataset;
use crate::descriptor::{extract_features, Descriptor};
use crate::error::Result;

/// Extracts `descriptor` features for every dataset image, then runs
/// [`cross_validated_recognition`] on them.
pub fn cross_validated_recognition_on_dataset(
    dataset: &Dataset,
    descriptor: &Descriptor,
    probe_fractions: &[f64],
    folds: usize,
    seed: u64,
) -> Result<Vec<FractionResult>> {
    let features = extract_features(dataset, descriptor)?;
    cross_validated_recognition(&features, &dataset.labels(), probe_fractions, folds, seed)
}
