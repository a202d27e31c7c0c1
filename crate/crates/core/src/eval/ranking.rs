use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// χ² histogram distance, `½ Σ (x_i − y_i)² / (x_i + y_i)`.
///
/// Terms with a zero denominator contribute nothing.
pub fn chi_square(x: impl AsRef<[f64]>, y: impl AsRef<[f64]>) -> Result<f64> {
    let (x, y) = (x.as_ref(), y.as_ref());
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(chi_square_unchecked(x, y))
}

#[inline]
pub(crate) fn chi_square_unchecked(x: &[f64], y: &[f64]) -> f64 {
    let sum: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let s = a + b;
            if s > 0.0 {
                let d = a - b;
                d * d / s
            } else {
                0.0
            }
        })
        .sum();
    0.5 * sum
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankedItem {
    pub index: usize,
    pub distance: f64,
}

/// Gallery images ordered by ascending distance to a query, ties broken by
/// ascending index.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedList {
    pub query: Option<usize>,
    pub items: Vec<RankedItem>,
}

impl RankedList {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// 1-based rank of gallery image `index`.
    pub fn rank_of(&self, index: usize) -> Option<usize> {
        self.items.iter().position(|it| it.index == index).map(|p| p + 1)
    }

    pub fn top(&self, k: usize) -> &[RankedItem] {
        &self.items[..k.min(self.items.len())]
    }
}

fn by_distance_then_index(a: &RankedItem, b: &RankedItem) -> Ordering {
    a.distance
        .total_cmp(&b.distance)
        .then_with(|| a.index.cmp(&b.index))
}

/// Ranks the `gallery` entries of `features` against `query`.
///
/// `query_index`, when given, is dropped from the gallery so an image never
/// retrieves itself.
pub fn rank_gallery<F: AsRef<[f64]>>(
    query: &[f64],
    query_index: Option<usize>,
    features: &[F],
    gallery: &[usize],
) -> Result<RankedList> {
    let mut items = Vec::with_capacity(gallery.len());
    for &index in gallery {
        if Some(index) == query_index {
            continue;
        }
        let candidate = features
            .get(index)
            .ok_or_else(|| {
                Error::Evaluation(format!(
                    "gallery index {index} is out of range for {} features",
                    features.len()
                ))
            })?
            .as_ref();
        items.push(RankedItem {
            index,
            distance: chi_square(query, candidate)?,
        });
    }
    if items.is_empty() {
        return Err(Error::Evaluation("gallery is empty".into()));
    }
    items.sort_by(by_distance_then_index);
    Ok(RankedList {
        query: query_index,
        items,
    })
}

/// Leave-one-out ranked lists: entry `q` ranks every other image against image `q`.
pub fn rank_all<F: AsRef<[f64]> + Sync>(features: &[F]) -> Result<Vec<RankedList>> {
    let all: Vec<usize> = (0..features.len()).collect();
    (0..features.len())
        .into_par_iter()
        .map(|q| rank_gallery(features[q].as_ref(), Some(q), features, &all))
        .collect()
}
