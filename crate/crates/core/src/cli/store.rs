//! Tab-separated feature store.
//!
//! ```text
//! # version=1
//! # descriptor=calp
//! # radius=3
//! # bins=192
//! # root=faces
//! # images=2
//! # skipped=0
//! alice/01.png<TAB>alice<TAB>0.015625<TAB>0<TAB>...
//! bob/01.png<TAB>bob<TAB>...
//! ```
//!
//! Header lines are `# key=value`. `radius` is written for CALP only and
//! `threshold` for CSLBP/CSLTP only. Bin values use Rust's shortest
//! round-trip float formatting, so a load after a save is lossless.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::dataset::{ClassLabels, Dataset};
use crate::descriptor::{extract_features, Descriptor, DescriptorKind};
use crate::error::{Error, Result};

pub const STORE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct StoreHeader {
    pub version: u32,
    pub descriptor: Descriptor,
    pub bins: usize,
    pub root: String,
    pub images: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StoreRecord {
    /// Path relative to the dataset root, `/`-separated.
    pub path: String,
    pub label: String,
    pub bins: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureStore {
    pub header: StoreHeader,
    pub records: Vec<StoreRecord>,
}

fn relative_path(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

fn check_field(what: &str, value: &str) -> Result<()> {
    if value.contains(['\t', '\n', '\r']) {
        return Err(Error::Dataset(format!(
            "{what} {value:?} contains a tab or line break and cannot be stored"
        )));
    }
    Ok(())
}

impl FeatureStore {
    /// Extracts features for every image of `dataset`, in dataset order.
    pub fn extract(dataset: &Dataset, descriptor: &Descriptor, root: &str) -> Result<Self> {
        let features = extract_features(dataset, descriptor)?;
        let records = dataset
            .images()
            .zip(features)
            .map(|((label, record), feature)| StoreRecord {
                path: relative_path(dataset.root(), &record.path),
                label: label.to_string(),
                bins: feature.bins().to_vec(),
            })
            .collect::<Vec<_>>();
        let store = Self {
            header: StoreHeader {
                version: STORE_VERSION,
                descriptor: *descriptor,
                bins: descriptor.feature_len(),
                root: root.to_string(),
                images: records.len(),
                skipped: dataset.skipped().len(),
            },
            records,
        };
        store.validate(Path::new("<memory>"))?;
        Ok(store)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn labels(&self) -> ClassLabels {
        let labels: Vec<&str> = self.records.iter().map(|r| r.label.as_str()).collect();
        ClassLabels::from_labels(&labels)
    }

    pub fn features(&self) -> Vec<&[f64]> {
        self.records.iter().map(|r| r.bins.as_slice()).collect()
    }

    pub fn position(&self, path: &str) -> Option<usize> {
        self.records.iter().position(|r| r.path == path)
    }

    fn validate(&self, path: &Path) -> Result<()> {
        let err = |line: usize, reason: String| Error::Store {
            path: path.to_path_buf(),
            line,
            reason,
        };
        check_field("root", &self.header.root)?;
        if self.header.images != self.records.len() {
            return Err(err(
                0,
                format!(
                    "header announces {} images but {} records are present",
                    self.header.images,
                    self.records.len()
                ),
            ));
        }
        let mut seen = HashSet::new();
        for (i, r) in self.records.iter().enumerate() {
            check_field("path", &r.path)?;
            check_field("label", &r.label)?;
            if r.bins.len() != self.header.bins {
                return Err(err(
                    i + 1,
                    format!("record has {} bins, header says {}", r.bins.len(), self.header.bins),
                ));
            }
            if !seen.insert(r.path.as_str()) {
                return Err(err(i + 1, format!("duplicate path '{}'", r.path)));
            }
        }
        Ok(())
    }

    pub fn write_to(&self, mut out: impl Write) -> std::io::Result<()> {
        let h = &self.header;
        let mut text = String::new();
        let _ = writeln!(text, "# version={}", h.version);
        let _ = writeln!(text, "# descriptor={}", h.descriptor.name());
        if let Some(r) = h.descriptor.radius() {
            let _ = writeln!(text, "# radius={r}");
        }
        if let Some(t) = h.descriptor.threshold() {
            let _ = writeln!(text, "# threshold={t}");
        }
        let _ = writeln!(text, "# bins={}", h.bins);
        let _ = writeln!(text, "# root={}", h.root);
        let _ = writeln!(text, "# images={}", h.images);
        let _ = writeln!(text, "# skipped={}", h.skipped);
        out.write_all(text.as_bytes())?;
        for r in &self.records {
            text.clear();
            text.push_str(&r.path);
            text.push('\t');
            text.push_str(&r.label);
            for b in &r.bins {
                let _ = write!(text, "\t{b}");
            }
            text.push('\n');
            out.write_all(text.as_bytes())?;
        }
        Ok(())
    }

    /// Writes the store atomically: a failed write leaves no file behind.
    pub fn save(&self, path: &Path) -> Result<()> {
        crate::cli::write_atomically(path, |w| self.write_to(w))
    }

    pub fn read_from(reader: impl BufRead, path: &Path) -> Result<Self> {
        let err = |line: usize, reason: String| Error::Store {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let mut fields: Vec<(String, String)> = Vec::new();
        let mut records = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let lineno = n + 1;
            let line = line.map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?;
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if !records.is_empty() {
                    return Err(err(lineno, "header line after records".into()));
                }
                let (k, v) = rest
                    .trim_start()
                    .split_once('=')
                    .ok_or_else(|| err(lineno, format!("malformed header line '{line}'")))?;
                fields.push((k.trim().to_string(), v.to_string()));
                continue;
            }
            let mut parts = line.split('\t');
            let rel = parts.next().unwrap_or_default().to_string();
            let label = parts
                .next()
                .ok_or_else(|| err(lineno, "record has no label".into()))?
                .to_string();
            let bins = parts
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| err(lineno, format!("bad bin value '{v}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            records.push(StoreRecord {
                path: rel,
                label,
                bins,
            });
        }

        let get = |key: &str| -> Result<&str> {
            fields
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| err(0, format!("missing header key '{key}'")))
        };
        let num = |key: &str| -> Result<usize> {
            get(key)?
                .trim()
                .parse::<usize>()
                .map_err(|_| err(0, format!("header key '{key}' is not a count")))
        };

        let version = num("version")? as u32;
        if version != STORE_VERSION {
            return Err(err(0, format!("unsupported store version {version}")));
        }
        let kind: DescriptorKind = get("descriptor")?
            .parse()
            .map_err(|e: Error| err(0, e.to_string()))?;
        let radius = if kind == DescriptorKind::Calp {
            num("radius")?
        } else {
            0
        };
        let threshold = match kind {
            DescriptorKind::Cslbp | DescriptorKind::Csltp => u8::try_from(num("threshold")?)
                .map_err(|_| err(0, "threshold exceeds 255".into()))?,
            _ => 0,
        };
        let descriptor = kind
            .configure(radius, threshold)
            .map_err(|e| err(0, e.to_string()))?;
        let bins = num("bins")?;
        if bins != descriptor.feature_len() {
            return Err(err(
                0,
                format!(
                    "{} produces {} bins, header says {bins}",
                    kind,
                    descriptor.feature_len()
                ),
            ));
        }

        let store = Self {
            header: StoreHeader {
                version,
                descriptor,
                bins,
                root: get("root")?.to_string(),
                images: num("images")?,
                skipped: num("skipped")?,
            },
            records,
        };
        store.validate(path)?;
        Ok(store)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_from(BufReader::new(file), path)
    }

    /// Resolves `query` to a stored record, either by its stored relative
    /// path or by a path that lies under the store root.
    pub fn find(&self, query: &str) -> Option<usize> {
        self.position(query).or_else(|| {
            let rel = Path::new(query).strip_prefix(&self.header.root).ok()?;
            self.position(&relative_path(Path::new(""), rel))
        })
    }

    pub fn root(&self) -> PathBuf {
        PathBuf::from(&self.header.root)
    }
}
