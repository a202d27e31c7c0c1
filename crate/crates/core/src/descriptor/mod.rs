//! Local pattern descriptors and the histogram feature vectors they produce.

pub mod baselines;
pub mod calp;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dataset::{Dataset, GrayImage};
use crate::error::{Error, Result};

pub use baselines::{cslbp_feature, csltp_feature, lbp_feature, BaselineConfig, BaselineKind};
pub use calp::{
    calp_code, calp_code_image, calp_feature, calp_histogram, encode_c, render_feature_image,
    CalpConfig, CodeImage,
};

/// Concatenated, per-segment L1-normalized histograms.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    descriptor: String,
    bins: Vec<f64>,
    segment_len: usize,
}

impl FeatureVector {
    pub fn new(descriptor: impl Into<String>, bins: Vec<f64>, segment_len: usize) -> Self {
        Self {
            descriptor: descriptor.into(),
            bins,
            segment_len,
        }
    }

    /// A single-segment vector, mostly useful for synthetic evaluation data.
    pub fn from_bins(bins: Vec<f64>) -> Self {
        let segment_len = bins.len();
        Self::new("raw", bins, segment_len)
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn segment_len(&self) -> usize {
        self.segment_len
    }

    pub fn segments(&self) -> std::slice::Chunks<'_, f64> {
        self.bins.chunks(self.segment_len.max(1))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            descriptor: self.descriptor.clone(),
            bins: self.bins.iter().map(|b| b * factor).collect(),
            segment_len: self.segment_len,
        }
    }
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.bins
    }
}

/// Normalized histogram of `codes` over `bins` bins. Codes must be `< bins`.
pub(crate) fn normalized_histogram(codes: &[u8], bins: usize) -> Result<Vec<f64>> {
    if codes.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let mut counts = vec![0u64; bins];
    for &c in codes {
        counts[c as usize] += 1;
    }
    let total = codes.len() as f64;
    Ok(counts.into_iter().map(|n| n as f64 / total).collect())
}

/// Applies a 3x3 neighborhood kernel to every interior pixel.
///
/// `kernel` receives the rows above, at and below the reference pixel plus
/// the column of the reference pixel.
pub(crate) fn interior_codes_3x3(
    image: &GrayImage,
    kernel: impl Fn(&[u8], &[u8], &[u8], usize) -> u8,
) -> Result<Vec<u8>> {
    let (w, h) = (image.width(), image.height());
    if w < 3 || h < 3 {
        return Err(Error::Dimension {
            width: w,
            height: h,
            distance: 1,
            needed: 3,
        });
    }
    let mut codes = Vec::with_capacity((w - 2) * (h - 2));
    for row in 1..h - 1 {
        let (top, mid, bot) = (image.row(row - 1), image.row(row), image.row(row + 1));
        codes.extend((1..w - 1).map(|col| kernel(top, mid, bot, col)));
    }
    Ok(codes)
}

/// A fully parameterized descriptor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Descriptor {
    Calp(CalpConfig),
    Baseline(BaselineConfig),
}

/// Descriptor family names accepted on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DescriptorKind {
    Calp,
    Lbp,
    Cslbp,
    Csltp,
}

impl DescriptorKind {
    pub fn name(self) -> &'static str {
        match self {
            DescriptorKind::Calp => "calp",
            DescriptorKind::Lbp => "lbp",
            DescriptorKind::Cslbp => "cslbp",
            DescriptorKind::Csltp => "csltp",
        }
    }

    /// Builds a descriptor; `radius` applies to CALP, `threshold` to CSLBP/CSLTP.
    pub fn configure(self, radius: usize, threshold: u8) -> Result<Descriptor> {
        Ok(match self {
            DescriptorKind::Calp => Descriptor::Calp(CalpConfig::new(radius)?),
            DescriptorKind::Lbp => Descriptor::Baseline(BaselineConfig::lbp()),
            DescriptorKind::Cslbp => Descriptor::Baseline(BaselineConfig::cslbp(threshold)),
            DescriptorKind::Csltp => Descriptor::Baseline(BaselineConfig::csltp(threshold)),
        })
    }

    /// The default threshold for the family (0 for CSLBP, 1 for CSLTP).
    pub fn default_threshold(self) -> u8 {
        match self {
            DescriptorKind::Csltp => 1,
            _ => 0,
        }
    }
}

impl fmt::Display for DescriptorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DescriptorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "calp" => Ok(DescriptorKind::Calp),
            "lbp" => Ok(DescriptorKind::Lbp),
            "cslbp" => Ok(DescriptorKind::Cslbp),
            "csltp" => Ok(DescriptorKind::Csltp),
            other => Err(Error::Parameter(format!(
                "unknown descriptor '{other}' (expected calp, lbp, cslbp or csltp)"
            ))),
        }
    }
}

impl Descriptor {
    pub fn kind(&self) -> DescriptorKind {
        match self {
            Descriptor::Calp(_) => DescriptorKind::Calp,
            Descriptor::Baseline(b) => match b.kind {
                BaselineKind::Lbp => DescriptorKind::Lbp,
                BaselineKind::Cslbp => DescriptorKind::Cslbp,
                BaselineKind::Csltp => DescriptorKind::Csltp,
            },
        }
    }

    pub fn name(&self) -> &'static str {
        self.kind().name()
    }

    /// Cascade depth for CALP, `None` otherwise.
    pub fn radius(&self) -> Option<usize> {
        match self {
            Descriptor::Calp(c) => Some(c.max_radius()),
            Descriptor::Baseline(_) => None,
        }
    }

    /// Threshold for CSLBP/CSLTP, `None` otherwise.
    pub fn threshold(&self) -> Option<u8> {
        match self {
            Descriptor::Baseline(b) if b.kind != BaselineKind::Lbp => Some(b.threshold),
            _ => None,
        }
    }

    /// Total feature length in bins.
    pub fn feature_len(&self) -> usize {
        match self {
            Descriptor::Calp(c) => calp::CALP_BINS * c.max_radius(),
            Descriptor::Baseline(b) => b.kind.bins(),
        }
    }

    pub fn extract(&self, image: &GrayImage) -> Result<FeatureVector> {
        match self {
            Descriptor::Calp(c) => calp_feature(image, *c),
            Descriptor::Baseline(b) => b.extract(image),
        }
    }
}

/// Extracts one feature vector per dataset image, in dataset index order.
pub fn extract_features(dataset: &Dataset, descriptor: &Descriptor) -> Result<Vec<FeatureVector>> {
    let images: Vec<&GrayImage> = dataset.images().map(|(_, r)| &r.image).collect();
    images.par_iter().map(|img| descriptor.extract(img)).collect()
}
