use rayon::prelude::*;

use crate::dataset::{make_splits, ClassLabels, Split};
use crate::error::{Error, Result};
use crate::eval::ranking::{rank_all, rank_gallery, RankedList};

fn check_lengths<F>(features: &[F], labels: &ClassLabels) -> Result<()> {
    if features.len() != labels.len() {
        return Err(Error::Evaluation(format!(
            "{} features but {} labels",
            features.len(),
            labels.len()
        )));
    }
    Ok(())
}

/// 1-based rank of the first gallery image sharing the query's class.
pub fn first_match_rank(ranked: &RankedList, labels: &ClassLabels, query: usize) -> Option<usize> {
    let class = labels.class_of(query);
    ranked
        .items
        .iter()
        .position(|it| labels.class_of(it.index) == class)
        .map(|p| p + 1)
}

/// Leave-one-out recognition rate in percent: each image is classified by
/// its χ² nearest neighbor among all the others.
pub fn recognition_rate<F: AsRef<[f64]> + Sync>(features: &[F], labels: &ClassLabels) -> Result<f64> {
    check_lengths(features, labels)?;
    if features.len() < 2 {
        return Err(Error::Evaluation(
            "recognition needs at least two images".into(),
        ));
    }
    let lists = rank_all(features)?;
    let matches = lists
        .iter()
        .enumerate()
        .filter(|(q, list)| labels.same_class(*q, list.items[0].index))
        .count();
    Ok(100.0 * matches as f64 / features.len() as f64)
}

/// Recognition rate in percent of the split's probes against its gallery.
pub fn split_recognition_rate<F: AsRef<[f64]> + Sync>(
    features: &[F],
    labels: &ClassLabels,
    split: &Split,
) -> Result<f64> {
    check_lengths(features, labels)?;
    if split.probe.is_empty() {
        return Err(Error::Evaluation(format!(
            "fold {} has an empty probe set",
            split.fold_index
        )));
    }
    let hits: Vec<bool> = split
        .probe
        .par_iter()
        .map(|&q| {
            let list = rank_gallery(features[q].as_ref(), Some(q), features, &split.gallery)?;
            Ok(labels.same_class(q, list.items[0].index))
        })
        .collect::<Result<_>>()?;
    let matches = hits.iter().filter(|&&h| h).count();
    Ok(100.0 * matches as f64 / split.probe.len() as f64)
}

fn cmc_from_ranks(first_ranks: &[usize], max_rank: usize) -> Vec<f64> {
    let n = first_ranks.len() as f64;
    (1..=max_rank)
        .map(|r| first_ranks.iter().filter(|&&fr| fr <= r).count() as f64 / n)
        .collect()
}

/// Cumulative match characteristic over ranks `1..=max_rank` for the split's
/// probes. Fails if a probe's class has no gallery image.
pub fn cmc<F: AsRef<[f64]> + Sync>(
    features: &[F],
    labels: &ClassLabels,
    split: &Split,
    max_rank: usize,
) -> Result<Vec<f64>> {
    check_lengths(features, labels)?;
    if split.probe.is_empty() {
        return Err(Error::Evaluation("CMC needs at least one probe".into()));
    }
    let ranks: Vec<usize> = split
        .probe
        .par_iter()
        .map(|&q| {
            let list = rank_gallery(features[q].as_ref(), Some(q), features, &split.gallery)?;
            first_match_rank(&list, labels, q).ok_or_else(|| {
                Error::Evaluation(format!(
                    "probe {q} of class '{}' has no gallery image of its class",
                    labels.name(labels.class_of(q))
                ))
            })
        })
        .collect::<Result<_>>()?;
    Ok(cmc_from_ranks(&ranks, max_rank))
}

/// CMC where every image in turn is the sole probe against all the others.
pub fn leave_one_out_cmc<F: AsRef<[f64]> + Sync>(
    features: &[F],
    labels: &ClassLabels,
    max_rank: usize,
) -> Result<Vec<f64>> {
    check_lengths(features, labels)?;
    let lists = rank_all(features)?;
    let ranks = lists
        .iter()
        .enumerate()
        .map(|(q, list)| {
            first_match_rank(list, labels, q).ok_or_else(|| {
                Error::Evaluation(format!(
                    "class '{}' has a single image; it cannot be matched",
                    labels.name(labels.class_of(q))
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(cmc_from_ranks(&ranks, max_rank))
}

/// Per-fold recognition rates at one probe fraction.
#[derive(Clone, Debug, PartialEq)]
pub struct FractionResult {
    pub probe_fraction: f64,
    pub fold_rates: Vec<f64>,
    pub mean: f64,
}

/// Stratified, repeated probe/gallery evaluation: for every fraction,
/// `folds` seeded splits are drawn and each probe is classified by its
/// nearest gallery image.
pub fn cross_validated_recognition<F: AsRef<[f64]> + Sync>(
    features: &[F],
    labels: &ClassLabels,
    probe_fractions: &[f64],
    folds: usize,
    seed: u64,
) -> Result<Vec<FractionResult>> {
    check_lengths(features, labels)?;
    probe_fractions
        .iter()
        .map(|&fraction| {
            let splits = make_splits(labels, fraction, folds, seed)?;
            let fold_rates = splits
                .par_iter()
                .map(|split| split_recognition_rate(features, labels, split))
                .collect::<Result<Vec<_>>>()?;
            let mean = fold_rates.iter().sum::<f64>() / fold_rates.len() as f64;
            Ok(FractionResult {
                probe_fraction: fraction,
                fold_rates,
                mean,
            })
        })
        .collect()
}
