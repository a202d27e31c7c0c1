//! Benchmark settings: defaults, an optional `key = value` file, and flags.
//!
//! Flags override the file, which overrides the defaults.

use std::fs;
use std::path::Path;

use crate::descriptor::{Descriptor, DescriptorKind};
use crate::error::{Error, Result};

pub const DEFAULT_RADIUS: usize = 3;
pub const DEFAULT_LAMBDA_MAX: usize = 10;
pub const DEFAULT_FRACTIONS: [f64; 5] = [0.2, 0.3, 0.4, 0.5, 0.6];
pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_MAX_RANK: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkConfig {
    pub descriptor: DescriptorKind,
    pub radius: usize,
    /// `None` selects the descriptor family's default threshold.
    pub threshold: Option<u8>,
    pub lambda_max: usize,
    pub fractions: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    pub max_rank: usize,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            descriptor: DescriptorKind::Calp,
            radius: DEFAULT_RADIUS,
            threshold: None,
            lambda_max: DEFAULT_LAMBDA_MAX,
            fractions: DEFAULT_FRACTIONS.to_vec(),
            folds: DEFAULT_FOLDS,
            seed: DEFAULT_SEED,
            max_rank: DEFAULT_MAX_RANK,
        }
    }
}

/// Settings that may be given on the command line or in a config file.
/// Unset fields fall through to the next source.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigOverrides {
    pub descriptor: Option<DescriptorKind>,
    pub radius: Option<usize>,
    pub threshold: Option<u8>,
    pub lambda_max: Option<usize>,
    pub fractions: Option<Vec<f64>>,
    pub folds: Option<usize>,
    pub seed: Option<u64>,
    pub max_rank: Option<usize>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Parameter(format!("invalid value '{value}' for '{key}'")))
}

/// Parses a comma-separated list of probe fractions.
pub fn parse_fractions(value: &str) -> Result<Vec<f64>> {
    let fractions = value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_value::<f64>("fractions", s))
        .collect::<Result<Vec<_>>>()?;
    if fractions.is_empty() {
        return Err(Error::Parameter("no probe fractions given".into()));
    }
    Ok(fractions)
}

impl ConfigOverrides {
    /// Parses `key = value` lines; blank lines and `#` comments are ignored.
    /// Keys may use `-` or `_`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parameter(format!("config line {}: expected key = value", n + 1))
            })?;
            let key = key.trim().replace('-', "_");
            let value = value.trim().trim_matches('"');
            match key.as_str() {
                "descriptor" => out.descriptor = Some(value.parse()?),
                "radius" => out.radius = Some(parse_value(&key, value)?),
                "threshold" => out.threshold = Some(parse_value(&key, value)?),
                "lambda_max" => out.lambda_max = Some(parse_value(&key, value)?),
                "fractions" => out.fractions = Some(parse_fractions(value)?),
                "folds" => out.folds = Some(parse_value(&key, value)?),
                "seed" => out.seed = Some(parse_value(&key, value)?),
                "max_rank" => out.max_rank = Some(parse_value(&key, value)?),
                other => {
                    return Err(Error::Parameter(format!(
                        "config line {}: unknown key '{other}'",
                        n + 1
                    )))
                }
            }
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Fields set in `self` win over those in `fallback`.
    pub fn or(self, fallback: Self) -> Self {
        Self {
            descriptor: self.descriptor.or(fallback.descriptor),
            radius: self.radius.or(fallback.radius),
            threshold: self.threshold.or(fallback.threshold),
            lambda_max: self.lambda_max.or(fallback.lambda_max),
            fractions: self.fractions.or(fallback.fractions),
            folds: self.folds.or(fallback.folds),
            seed: self.seed.or(fallback.seed),
            max_rank: self.max_rank.or(fallback.max_rank),
        }
    }

    pub fn resolve(self) -> Result<BenchmarkConfig> {
        let d = BenchmarkConfig::default();
        let config = BenchmarkConfig {
            descriptor: self.descriptor.unwrap_or(d.descriptor),
            radius: self.radius.unwrap_or(d.radius),
            threshold: self.threshold.or(d.threshold),
            lambda_max: self.lambda_max.unwrap_or(d.lambda_max),
            fractions: self.fractions.unwrap_or(d.fractions),
            folds: self.folds.unwrap_or(d.folds),
            seed: self.seed.unwrap_or(d.seed),
            max_rank: self.max_rank.unwrap_or(d.max_rank),
        };
        config.validate()?;
        Ok(config)
    }
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.radius == 0 {
            return Err(Error::Parameter("radius must be at least 1".into()));
        }
        if self.lambda_max == 0 {
            return Err(Error::Parameter("lambda-max must be at least 1".into()));
        }
        if self.folds == 0 {
            return Err(Error::Parameter("folds must be at least 1".into()));
        }
        if self.max_rank == 0 {
            return Err(Error::Parameter("max-rank must be at least 1".into()));
        }
        if let Some(f) = self.fractions.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
            return Err(Error::Parameter(format!("probe fraction {f} is outside (0, 1)")));
        }
        Ok(())
    }

    pub fn descriptor(&self) -> Result<Descriptor> {
        let threshold = self
            .threshold
            .unwrap_or_else(|| self.descriptor.default_threshold());
        self.descriptor.configure(self.radius, threshold)
    }
}
