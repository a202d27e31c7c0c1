//! Classical comparators: LBP, CSLBP and CSLTP over the 3x3 neighborhood.
//!
//! Neighbors are numbered clockwise from the top-left corner:
//!
//! ```text
//!   g0 g1 g2
//!   g7 gc g3
//!   g6 g5 g4
//! ```
//!
//! so `g_p` and `g_{p+4}` are center-symmetric.

use crate::dataset::GrayImage;
use crate::descriptor::{interior_codes_3x3, normalized_histogram, FeatureVector};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    Lbp,
    Cslbp,
    Csltp,
}

impl BaselineKind {
    pub fn bins(self) -> usize {
        match self {
            BaselineKind::Lbp => 256,
            BaselineKind::Cslbp => 16,
            BaselineKind::Csltp => 9,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Lbp => "lbp",
            BaselineKind::Cslbp => "cslbp",
            BaselineKind::Csltp => "csltp",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BaselineConfig {
    pub kind: BaselineKind,
    /// Intensity threshold; unused by LBP.
    pub threshold: u8,
}

impl BaselineConfig {
    pub fn lbp() -> Self {
        Self {
            kind: BaselineKind::Lbp,
            threshold: 0,
        }
    }

    pub fn cslbp(threshold: u8) -> Self {
        Self {
            kind: BaselineKind::Cslbp,
            threshold,
        }
    }

    pub fn csltp(threshold: u8) -> Self {
        Self {
            kind: BaselineKind::Csltp,
            threshold,
        }
    }

    /// Per-pixel codes over the interior, row-major.
    pub fn codes(&self, image: &GrayImage) -> Result<Vec<u8>> {
        let t = self.threshold as i16;
        match self.kind {
            BaselineKind::Lbp => interior_codes_3x3(image, lbp_kernel),
            BaselineKind::Cslbp => {
                interior_codes_3x3(image, |top, mid, bot, c| cslbp_kernel(top, mid, bot, c, t))
            }
            BaselineKind::Csltp => {
                interior_codes_3x3(image, |top, _mid, bot, c| csltp_kernel(top, bot, c, t))
            }
        }
    }

    pub fn extract(&self, image: &GrayImage) -> Result<FeatureVector> {
        let bins = self.kind.bins();
        let hist = normalized_histogram(&self.codes(image)?, bins)?;
        Ok(FeatureVector::new(self.kind.name(), hist, bins))
    }
}

#[inline]
fn neighbors(top: &[u8], mid: &[u8], bot: &[u8], c: usize) -> [u8; 8] {
    [
        top[c - 1],
        top[c],
        top[c + 1],
        mid[c + 1],
        bot[c + 1],
        bot[c],
        bot[c - 1],
        mid[c - 1],
    ]
}

fn lbp_kernel(top: &[u8], mid: &[u8], bot: &[u8], c: usize) -> u8 {
    let center = mid[c];
    neighbors(top, mid, bot, c)
        .iter()
        .enumerate()
        .fold(0u8, |acc, (p, &g)| acc | (((g >= center) as u8) << p))
}

fn cslbp_kernel(top: &[u8], mid: &[u8], bot: &[u8], c: usize, t: i16) -> u8 {
    let g = neighbors(top, mid, bot, c);
    (0..4).fold(0u8, |acc, p| {
        let diff = g[p] as i16 - g[p + 4] as i16;
        acc | (((diff - t >= 0) as u8) << p)
    })
}

#[inline]
fn ternary(diff: i16, t: i16) -> u8 {
    if diff > t {
        2
    } else if diff < -t {
        0
    } else {
        1
    }
}

fn csltp_kernel(top: &[u8], bot: &[u8], c: usize, t: i16) -> u8 {
    // diagonal pairs (g0, g4) and (g2, g6)
    let s1 = ternary(top[c - 1] as i16 - bot[c + 1] as i16, t);
    let s2 = ternary(top[c + 1] as i16 - bot[c - 1] as i16, t);
    3 * s1 + s2
}

/// 256-bin LBP histogram.
pub fn lbp_feature(image: &GrayImage) -> Result<FeatureVector> {
    BaselineConfig::lbp().extract(image)
}

/// 16-bin center-symmetric LBP histogram with threshold `t`.
pub fn cslbp_feature(image: &GrayImage, t: u8) -> Result<FeatureVector> {
    BaselineConfig::cslbp(t).extract(image)
}

/// 9-bin center-symmetric local ternary pattern histogram with threshold `t`.
pub fn csltp_feature(image: &GrayImage, t: u8) -> Result<FeatureVector> {
    BaselineConfig::csltp(t).extract(image)
}
