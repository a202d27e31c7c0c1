//! Cascaded asymmetric local pattern (CALP).
//!
//! Around a reference pixel, the eight pixels of the square ring at distance
//! `d` are compared pairwise:
//!
//! ```text
//!   a . b . c        horizontal bits (top row vs bottom row):
//!   .       .          bit 5: a > g   bit 4: b > h   bit 3: c > i
//!   d   x   f        vertical bits (left column vs right column):
//!   .       .          bit 2: a > c   bit 1: d > f   bit 0: g > i
//!   g . h . i
//! ```
//!
//! The reference pixel `x` itself is never read. One 64-bin histogram is
//! taken per ring distance and the histograms for `d = 1..=R` are
//! concatenated.

use crate::dataset::GrayImage;
use crate::descriptor::{normalized_histogram, FeatureVector};
use crate::error::{Error, Result};

/// Bins per ring histogram (6-bit codes).
pub const CALP_BINS: usize = 64;

/// Cascade depth of the CALP feature.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CalpConfig {
    max_radius: usize,
}

impl CalpConfig {
    pub fn new(max_radius: usize) -> Result<Self> {
        if max_radius == 0 {
            return Err(Error::Parameter("CALP radius must be at least 1".into()));
        }
        Ok(Self { max_radius })
    }

    pub fn max_radius(&self) -> usize {
        self.max_radius
    }
}

/// Binary comparison: 0 when `e <= f`, 1 otherwise.
#[inline]
pub fn encode_c(e: u8, f: u8) -> u8 {
    (e > f) as u8
}

fn check_size(image: &GrayImage, d: usize) -> Result<()> {
    let needed = 2 * d + 1;
    if d == 0 || image.width() < needed || image.height() < needed {
        return Err(Error::Dimension {
            width: image.width(),
            height: image.height(),
            distance: d,
            needed,
        });
    }
    Ok(())
}

/// CALP code of a single pixel. `row` and `col` are zero-indexed and must
/// lie in `d..height-d` and `d..width-d` respectively.
pub fn calp_code(image: &GrayImage, row: usize, col: usize, d: usize) -> Result<u8> {
    if d == 0
        || row < d
        || col < d
        || row + d >= image.height()
        || col + d >= image.width()
    {
        return Err(Error::Bounds {
            row,
            col,
            distance: d,
        });
    }
    let px = |r: usize, c: usize| image.get(r, c);
    let (up, down, left, right) = (row - d, row + d, col - d, col + d);

    let horizontal = (encode_c(px(up, left), px(down, left)) << 5)
        | (encode_c(px(up, col), px(down, col)) << 4)
        | (encode_c(px(up, right), px(down, right)) << 3);
    let vertical = (encode_c(px(up, left), px(up, right)) << 2)
        | (encode_c(px(row, left), px(row, right)) << 1)
        | encode_c(px(down, left), px(down, right));
    Ok(horizontal + vertical)
}

/// Per-pixel CALP codes over the valid interior of an image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeImage {
    width: usize,
    height: usize,
    distance: usize,
    codes: Vec<u8>,
}

impl CodeImage {
    pub fn new(width: usize, height: usize, distance: usize, codes: Vec<u8>) -> Result<Self> {
        if codes.len() != width * height {
            return Err(Error::Parameter(format!(
                "code buffer holds {} values, expected {}",
                codes.len(),
                width * height
            )));
        }
        if let Some(&bad) = codes.iter().find(|&&c| c as usize >= CALP_BINS) {
            return Err(Error::Parameter(format!("code {bad} is outside 0..64")));
        }
        Ok(Self {
            width,
            height,
            distance,
            codes,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn distance(&self) -> usize {
        self.distance
    }

    pub fn codes(&self) -> &[u8] {
        &self.codes
    }

    /// Code at interior position `(row, col)`; image pixel `(row + d, col + d)`.
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.codes[row * self.width + col]
    }
}

/// Encodes every interior pixel at ring distance `d`.
///
/// The output is `(width - 2d) x (height - 2d)`; border pixels within `d` of
/// the edge have no complete ring and are excluded.
pub fn calp_code_image(image: &GrayImage, d: usize) -> Result<CodeImage> {
    check_size(image, d)?;
    let out_w = image.width() - 2 * d;
    let out_h = image.height() - 2 * d;
    let mut codes = vec![0u8; out_w * out_h];

    for (out, row) in codes.chunks_exact_mut(out_w).zip(d..) {
        let (top, mid, bot) = (image.row(row - d), image.row(row), image.row(row + d));
        let (tl, tc, tr) = (&top[..out_w], &top[d..d + out_w], &top[2 * d..2 * d + out_w]);
        let (ml, mr) = (&mid[..out_w], &mid[2 * d..2 * d + out_w]);
        let (bl, bc, br) = (&bot[..out_w], &bot[d..d + out_w], &bot[2 * d..2 * d + out_w]);
        for k in 0..out_w {
            out[k] = ((tl[k] > bl[k]) as u8) << 5
                | ((tc[k] > bc[k]) as u8) << 4
                | ((tr[k] > br[k]) as u8) << 3
                | ((tl[k] > tr[k]) as u8) << 2
                | ((ml[k] > mr[k]) as u8) << 1
                | (bl[k] > br[k]) as u8;
        }
    }

    Ok(CodeImage {
        width: out_w,
        height: out_h,
        distance: d,
        codes,
    })
}

/// L1-normalized 64-bin histogram of a code image.
pub fn calp_histogram(code_image: &CodeImage) -> Result<Vec<f64>> {
    normalized_histogram(&code_image.codes, CALP_BINS)
}

/// Cascaded feature: ring histograms for `d = 1..=R`, ascending.
pub fn calp_feature(image: &GrayImage, config: CalpConfig) -> Result<FeatureVector> {
    check_size(image, config.max_radius)?;
    let mut bins = Vec::with_capacity(CALP_BINS * config.max_radius);
    for d in 1..=config.max_radius {
        bins.extend(calp_histogram(&calp_code_image(image, d)?)?);
    }
    Ok(FeatureVector::new("calp", bins, CALP_BINS))
}

/// Scales codes `0..=63` to display intensities `0..=255`.
pub fn render_feature_image(code_image: &CodeImage) -> Result<GrayImage> {
    if code_image.codes.is_empty() {
        return Err(Error::EmptyRegion);
    }
    // round(c * 255 / 63), half up, in integers
    let scale = |c: u8| ((c as u32 * 255 * 2 + 63) / 126) as u8;
    GrayImage::new(
        code_image.width,
        code_image.height,
        code_image.codes.iter().map(|&c| scale(c)).collect(),
    )
}
