use std::ops::RangeInclusive;

use crate::dataset::ClassLabels;
use crate::error::{Error, Result};
use crate::eval::ranking::{rank_all, RankedList};

fn query_class(ranked: &RankedList, labels: &ClassLabels) -> Result<usize> {
    let q = ranked
        .query
        .ok_or_else(|| Error::Evaluation("ranked list has no query index".into()))?;
    if q >= labels.len() {
        return Err(Error::Evaluation(format!("query index {q} has no label")));
    }
    Ok(labels.class_of(q))
}

fn check_lambda(ranked: &RankedList, lambda: usize) -> Result<()> {
    if lambda == 0 || lambda > ranked.len() {
        return Err(Error::Parameter(format!(
            "retrieval cutoff {lambda} is outside 1..={}",
            ranked.len()
        )));
    }
    Ok(())
}

/// Number of same-class images among the top `lambda` of `ranked`.
pub fn hits_at(ranked: &RankedList, labels: &ClassLabels, lambda: usize) -> Result<usize> {
    check_lambda(ranked, lambda)?;
    let class = query_class(ranked, labels)?;
    Ok(ranked.items[..lambda]
        .iter()
        .filter(|it| labels.class_of(it.index) == class)
        .count())
}

/// Fraction of the top `lambda` results that share the query's class.
pub fn precision_at(ranked: &RankedList, labels: &ClassLabels, lambda: usize) -> Result<f64> {
    Ok(hits_at(ranked, labels, lambda)? as f64 / lambda as f64)
}

/// Same-class hits in the top `lambda`, divided by the query's class size.
///
/// The class size counts the query itself, so with the query excluded from
/// its own ranking the best attainable recall is `(|C| - 1) / |C|`.
pub fn recall_at(ranked: &RankedList, labels: &ClassLabels, lambda: usize) -> Result<f64> {
    let class = query_class(ranked, labels)?;
    Ok(hits_at(ranked, labels, lambda)? as f64 / labels.class_size(class) as f64)
}

/// Harmonic mean of ARP and ARR; 0 when both are 0.
pub fn f_score(arp: f64, arr: f64) -> f64 {
    let sum = arp + arr;
    if sum > 0.0 {
        2.0 * arp * arr / sum
    } else {
        0.0
    }
}

/// Normalized modified retrieval rank of one query, given the 1-based ranks
/// of all of its ground-truth matches.
///
/// With `NG` matches the cutoff is `K = 2·NG`; ranks beyond `K` are replaced
/// by `1.25·K`. The result is 0 when the matches fill ranks `1..=NG` and 1
/// when every match falls beyond `K`.
pub fn nmrr(match_ranks: &[usize]) -> f64 {
    let ng = match_ranks.len() as f64;
    let k = 2.0 * ng;
    let penalty = 1.25 * k;
    let avr = match_ranks
        .iter()
        .map(|&r| if r as f64 <= k { r as f64 } else { penalty })
        .sum::<f64>()
        / ng;
    let mrr = avr - 0.5 - 0.5 * ng;
    mrr / (penalty - 0.5 - 0.5 * ng)
}

/// ARP/ARR/F-Score at one retrieval cutoff.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RetrievalRow {
    pub lambda: usize,
    pub arp: f64,
    pub arr: f64,
    pub f_score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RetrievalMetrics {
    pub rows: Vec<RetrievalRow>,
    pub anmrr: f64,
}

/// Leave-one-out retrieval over a labelled feature set. Every image is used
/// once as a query against all the others.
#[derive(Clone, Debug)]
pub struct RetrievalEvaluator<'a> {
    labels: &'a ClassLabels,
    lists: Vec<RankedList>,
}

impl<'a> RetrievalEvaluator<'a> {
    pub fn new<F: AsRef<[f64]> + Sync>(features: &[F], labels: &'a ClassLabels) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::Evaluation(format!(
                "{} features but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if features.len() < 2 {
            return Err(Error::Evaluation(
                "retrieval needs at least two images".into(),
            ));
        }
        Ok(Self {
            labels,
            lists: rank_all(features)?,
        })
    }

    pub fn ranked_lists(&self) -> &[RankedList] {
        &self.lists
    }

    /// Largest valid retrieval cutoff (`|DS| - 1`).
    pub fn max_lambda(&self) -> usize {
        self.lists.len() - 1
    }

    /// Mean over classes of the mean over each class's queries.
    fn class_balanced(&self, per_query: impl Fn(&RankedList) -> Result<f64>) -> Result<f64> {
        let mut total = 0.0;
        for class in 0..self.labels.num_classes() {
            let members = self.labels.members(class);
            let mut class_sum = 0.0;
            for &q in members {
                class_sum += per_query(&self.lists[q])?;
            }
            total += class_sum / members.len() as f64;
        }
        Ok(total / self.labels.num_classes() as f64)
    }

    /// Average retrieval precision at cutoff `lambda`.
    pub fn arp(&self, lambda: usize) -> Result<f64> {
        self.class_balanced(|r| precision_at(r, self.labels, lambda))
    }

    /// Average retrieval rate (recall) at cutoff `lambda`.
    pub fn arr(&self, lambda: usize) -> Result<f64> {
        self.class_balanced(|r| recall_at(r, self.labels, lambda))
    }

    /// ARR where each query retrieves as many images as its class holds.
    pub fn arr_at_class_size(&self) -> Result<f64> {
        self.class_balanced(|r| {
            let class = query_class(r, self.labels)?;
            let lambda = self.labels.class_size(class).min(r.len());
            recall_at(r, self.labels, lambda)
        })
    }

    pub fn f_score(&self, lambda: usize) -> Result<f64> {
        Ok(f_score(self.arp(lambda)?, self.arr(lambda)?))
    }

    /// Mean NMRR over every query. Fails on a singleton class, which has no
    /// ground truth to retrieve.
    pub fn anmrr(&self) -> Result<f64> {
        let mut sum = 0.0;
        for list in &self.lists {
            let class = query_class(list, self.labels)?;
            if self.labels.class_size(class) < 2 {
                return Err(Error::Evaluation(format!(
                    "class '{}' has a single image; ANMRR needs at least two per class",
                    self.labels.name(class)
                )));
            }
            let ranks: Vec<usize> = list
                .items
                .iter()
                .enumerate()
                .filter(|(_, it)| self.labels.class_of(it.index) == class)
                .map(|(pos, _)| pos + 1)
                .collect();
            sum += nmrr(&ranks);
        }
        Ok(sum / self.lists.len() as f64)
    }

    /// ARP/ARR/F-Score for each cutoff in `lambdas`, plus ANMRR.
    pub fn metrics(&self, lambdas: RangeInclusive<usize>) -> Result<RetrievalMetrics> {
        let rows = lambdas
            .map(|lambda| {
                let arp = self.arp(lambda)?;
                let arr = self.arr(lambda)?;
                Ok(RetrievalRow {
                    lambda,
                    arp,
                    arr,
                    f_score: f_score(arp, arr),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RetrievalMetrics {
            rows,
            anmrr: self.anmrr()?,
        })
    }
}

pub fn arp<F: AsRef<[f64]> + Sync>(features: &[F], labels: &ClassLabels, lambda: usize) -> Result<f64> {
    RetrievalEvaluator::new(features, labels)?.arp(lambda)
}

pub fn arr<F: AsRef<[f64]> + Sync>(features: &[F], labels: &ClassLabels, lambda: usize) -> Result<f64> {
    RetrievalEvaluator::new(features, labels)?.arr(lambda)
}

pub fn anmrr<F: AsRef<[f64]> + Sync>(features: &[F], labels: &ClassLabels) -> Result<f64> {
    RetrievalEvaluator::new(features, labels)?.anmrr()
}
