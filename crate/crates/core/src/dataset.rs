//! Grayscale images, directory-per-class corpora and seeded probe/gallery splits.

use std::fs;
use std::path::{Path, PathBuf};

use image::DynamicImage;
use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// An 8-bit intensity image stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::Parameter(format!(
                "pixel buffer holds {} values, expected {}x{} = {}",
                pixels.len(),
                width,
                height,
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image from a `(row, col) -> intensity` function.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(row, col));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    /// Builds an image from nested rows. Panics if the rows are ragged.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        let mut pixels = Vec::with_capacity(width * height);
        for r in rows {
            assert_eq!(r.as_ref().len(), width, "ragged rows");
            pixels.extend_from_slice(r.as_ref());
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Zero-indexed pixel access.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[u8] {
        &self.pixels[row * self.width..(row + 1) * self.width]
    }

    /// Applies `f` to every intensity.
    pub fn map(&self, f: impl Fn(u8) -> u8) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
        }
    }

    /// Writes the image as an 8-bit grayscale file; the container follows the extension.
    pub fn save(&self, path: &Path) -> Result<()> {
        let buf = image::GrayImage::from_raw(self.width as u32, self.height as u32, self.pixels.clone())
            .expect("buffer length matches dimensions");
        buf.save(path).map_err(|e| match e {
            image::ImageError::IoError(source) => Error::Io {
                path: path.to_path_buf(),
                source,
            },
            other => Error::Format {
                path: path.to_path_buf(),
                reason: other.to_string(),
            },
        })
    }
}

/// Integer-rounded BT.601 luma.
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let weighted = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
    ((weighted + 500) / 1000) as u8
}

/// Loads a raster image and converts it to 8-bit grayscale.
///
/// Grayscale files pass through untouched; RGB files go through [`luma`].
/// Alpha channels are dropped. Images with more than 8 bits per channel are
/// rejected.
pub fn load_image(path: &Path) -> Result<GrayImage> {
    let decoded = image::ImageReader::open(path)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?
        .with_guessed_format()
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?
        .decode()
        .map_err(|e| match e {
            image::ImageError::IoError(source) => Error::Io {
                path: path.to_path_buf(),
                source,
            },
            other => Error::Format {
                path: path.to_path_buf(),
                reason: other.to_string(),
            },
        })?;

    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    let pixels = match decoded {
        DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0]).collect(),
        DynamicImage::ImageRgb8(buf) => buf.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect(),
        DynamicImage::ImageRgba8(buf) => buf.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect(),
        other => {
            return Err(Error::Format {
                path: path.to_path_buf(),
                reason: format!("pixel format {:?} is not 8-bit gray or RGB", other.color()),
            })
        }
    };
    GrayImage::new(width, height, pixels)
}

/// Class membership of a flat, indexed collection of images.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassLabels {
    names: Vec<String>,
    class_of: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl ClassLabels {
    /// Builds class membership from one label per image. Classes are numbered
    /// in order of first appearance.
    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Self {
        let mut names: Vec<String> = Vec::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut class_of = Vec::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            let label = label.as_ref();
            let class = match names.iter().position(|n| n == label) {
                Some(c) => c,
                None => {
                    names.push(label.to_string());
                    members.push(Vec::new());
                    names.len() - 1
                }
            };
            members[class].push(i);
            class_of.push(class);
        }
        Self {
            names,
            class_of,
            members,
        }
    }

    /// Contiguous classes of the given sizes, labelled `c0`, `c1`, ...
    pub fn from_class_sizes(sizes: &[usize]) -> Self {
        let labels: Vec<String> = sizes
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| std::iter::repeat_n(format!("c{c}"), n))
            .collect();
        Self::from_labels(&labels)
    }

    /// Number of labelled images.
    pub fn len(&self) -> usize {
        self.class_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_of.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.names.len()
    }

    #[inline]
    pub fn class_of(&self, index: usize) -> usize {
        self.class_of[index]
    }

    pub fn class_size(&self, class: usize) -> usize {
        self.members[class].len()
    }

    /// Image indices of `class`, ascending.
    pub fn members(&self, class: usize) -> &[usize] {
        &self.members[class]
    }

    pub fn name(&self, class: usize) -> &str {
        &self.names[class]
    }

    #[inline]
    pub fn same_class(&self, a: usize, b: usize) -> bool {
        self.class_of[a] == self.class_of[b]
    }
}

#[derive(Clone, Debug)]
pub struct ImageRecord {
    pub path: PathBuf,
    pub image: GrayImage,
}

#[derive(Clone, Debug)]
pub struct ClassRecord {
    pub label: String,
    pub images: Vec<ImageRecord>,
}

/// A labelled image corpus. Images are indexed class-major: all images of the
/// first class (in file-name order), then the second class, and so on.
#[derive(Clone, Debug)]
pub struct Dataset {
    root: PathBuf,
    classes: Vec<ClassRecord>,
    skipped: Vec<PathBuf>,
}

impl Dataset {
    /// Builds a dataset from in-memory classes. Labels must be unique and
    /// every class non-empty.
    pub fn from_classes(root: impl Into<PathBuf>, classes: Vec<ClassRecord>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::Dataset("no classes".into()));
        }
        for (i, class) in classes.iter().enumerate() {
            if class.images.is_empty() {
                return Err(Error::Dataset(format!("class '{}' has no images", class.label)));
            }
            if classes[..i].iter().any(|c| c.label == class.label) {
                return Err(Error::Dataset(format!("duplicate class label '{}'", class.label)));
            }
        }
        Ok(Self {
            root: root.into(),
            classes,
            skipped: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn classes(&self) -> &[ClassRecord] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// Total image count.
    pub fn len(&self) -> usize {
        self.classes.iter().map(|c| c.images.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Files that were present but could not be decoded.
    pub fn skipped(&self) -> &[PathBuf] {
        &self.skipped
    }

    /// `(label, record)` pairs in dataset index order.
    pub fn images(&self) -> impl Iterator<Item = (&str, &ImageRecord)> {
        self.classes
            .iter()
            .flat_map(|c| c.images.iter().map(move |img| (c.label.as_str(), img)))
    }

    pub fn labels(&self) -> ClassLabels {
        let labels: Vec<&str> = self.images().map(|(label, _)| label).collect();
        ClassLabels::from_labels(&labels)
    }
}

fn is_hidden(path: &Path) -> bool {
    path.file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n.starts_with('.'))
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let io_err = |source| Error::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut entries = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        if !is_hidden(&path) {
            entries.push(path);
        }
    }
    entries.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(entries)
}

/// Scans `<root>/<class-label>/<image files>` into a [`Dataset`].
///
/// Files that fail to decode are skipped with a warning and listed in
/// [`Dataset::skipped`]. Class directories left without any decodable image
/// are dropped with a warning.
pub fn scan_dataset(root: &Path) -> Result<Dataset> {
    let class_dirs: Vec<PathBuf> = sorted_entries(root)?
        .into_iter()
        .filter(|p| p.is_dir())
        .collect();
    if class_dirs.is_empty() {
        return Err(Error::Dataset(format!(
            "{} contains no class subdirectories",
            root.display()
        )));
    }

    let mut files: Vec<(usize, PathBuf)> = Vec::new();
    for (class, dir) in class_dirs.iter().enumerate() {
        for path in sorted_entries(dir)? {
            if path.is_file() {
                files.push((class, path));
            }
        }
    }

    let loaded: Vec<(usize, PathBuf, Result<GrayImage>)> = files
        .into_par_iter()
        .map(|(class, path)| {
            let image = load_image(&path);
            (class, path, image)
        })
        .collect();

    let mut classes: Vec<ClassRecord> = class_dirs
        .iter()
        .map(|dir| ClassRecord {
            label: dir
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            images: Vec::new(),
        })
        .collect();
    let mut skipped = Vec::new();
    for (class, path, image) in loaded {
        match image {
            Ok(image) => classes[class].images.push(ImageRecord { path, image }),
            Err(e) => {
                warn!("skipping {}: {e}", path.display());
                skipped.push(path);
            }
        }
    }

    classes.retain(|c| {
        if c.images.is_empty() {
            warn!("class '{}' has no decodable images; dropped", c.label);
        }
        !c.images.is_empty()
    });
    if classes.is_empty() {
        return Err(Error::Dataset(format!(
            "no decodable images under {}",
            root.display()
        )));
    }

    Ok(Dataset {
        root: root.to_path_buf(),
        classes,
        skipped,
    })
}

/// A disjoint probe/gallery partition of every dataset index.
#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    /// Probe indices, ascending.
    pub probe: Vec<usize>,
    /// Gallery indices, ascending.
    pub gallery: Vec<usize>,
    pub probe_fraction: f64,
    pub seed: u64,
    pub fold_index: usize,
}

impl Split {
    /// Leave-one-out split: `query` is the only probe.
    pub fn leave_one_out(len: usize, query: usize) -> Self {
        Self {
            probe: vec![query],
            gallery: (0..len).filter(|&i| i != query).collect(),
            probe_fraction: 1.0 / len as f64,
            seed: 0,
            fold_index: query,
        }
    }
}

/// Number of probe images drawn from a class of `class_size` images.
pub fn probe_count(probe_fraction: f64, class_size: usize) -> usize {
    if class_size == 0 {
        return 0;
    }
    // The epsilon keeps products such as 0.3 * 5 on the half-up side.
    let wanted = (probe_fraction * class_size as f64 + 0.5 + 1e-9).floor() as usize;
    wanted.min(class_size - 1)
}

/// Draws `folds` stratified probe/gallery splits.
///
/// Fold `k` is sampled from a ChaCha8 stream selected by `(seed, k)`, so any
/// fold can be reproduced on its own. Within each class the images are
/// shuffled and the first [`probe_count`] of them become probes.
pub fn make_splits(
    labels: &ClassLabels,
    probe_fraction: f64,
    folds: usize,
    seed: u64,
) -> Result<Vec<Split>> {
    if !(probe_fraction > 0.0 && probe_fraction < 1.0) {
        return Err(Error::Parameter(format!(
            "probe fraction {probe_fraction} is outside (0, 1)"
        )));
    }
    if folds == 0 {
        return Err(Error::Parameter("at least one fold is required".into()));
    }

    let splits = (0..folds)
        .map(|fold| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(fold as u64);
            let mut probe = Vec::new();
            let mut gallery = Vec::new();
            for class in 0..labels.num_classes() {
                let mut members = labels.members(class).to_vec();
                members.shuffle(&mut rng);
                let n = probe_count(probe_fraction, members.len());
                probe.extend_from_slice(&members[..n]);
                gallery.extend_from_slice(&members[n..]);
            }
            probe.sort_unstable();
            gallery.sort_unstable();
            Split {
                probe,
                gallery,
                probe_fraction,
                seed,
                fold_index: fold,
            }
        })
        .collect();
    Ok(splits)
}
