//! Batch command-line front end.
//!
//! ```text
//! calp extract <ROOT> --out features.tsv [--descriptor calp --radius 3]
//! calp retrieve --store features.tsv --query alice/01.png [-k 10]
//! calp eval-retrieval --store features.tsv [--lambda-max 10] [--out retrieval.csv]
//! calp eval-recognition --store features.tsv [--fractions 0.2,0.3] [--folds 10] [--seed 0]
//! ```
//!
//! Exit status is 0 on success, 1 for usage errors and 2 for data errors.

pub mod commands;
pub mod config;
pub mod store;

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tempfile::NamedTempFile;

pub use commands::{
    cmd_extract, recognition_report, retrieval_hits_csv, retrieval_report, retrieve,
    ExtractSummary, RetrievalHit,
};
pub use config::{BenchmarkConfig, ConfigOverrides};
pub use store::{FeatureStore, StoreHeader, StoreRecord};

use crate::descriptor::DescriptorKind;
use crate::error::{Error, Result};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter(msg) => CliError::Usage(msg),
            other => CliError::Data(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

/// Writes through a temporary file in the destination directory and renames
/// it into place, so a failure never leaves partial output.
pub(crate) fn write_atomically(
    path: &Path,
    write: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(io_err)?;
    {
        let mut buffered = io::BufWriter::new(tmp.as_file_mut());
        write(&mut buffered).map_err(io_err)?;
        buffered.flush().map_err(io_err)?;
    }
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

#[derive(Debug, Parser)]
#[command(name = "calp", version, about = "Local pattern descriptors and retrieval/recognition benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Key-value configuration file; flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Descriptor: calp, lbp, cslbp or csltp.
    #[arg(long, global = true)]
    pub descriptor: Option<String>,
    /// CALP cascade depth R.
    #[arg(long, global = true)]
    pub radius: Option<usize>,
    /// CSLBP/CSLTP intensity threshold.
    #[arg(long, global = true)]
    pub threshold: Option<u8>,
    /// Seed for the probe/gallery splits.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Splits per probe fraction.
    #[arg(long, global = true)]
    pub folds: Option<usize>,
    /// Comma-separated probe fractions, e.g. 0.2,0.3,0.4.
    #[arg(long, global = true)]
    pub fractions: Option<String>,
    /// Largest retrieval cutoff λ.
    #[arg(long, global = true)]
    pub lambda_max: Option<usize>,
    /// Largest rank of the CMC table.
    #[arg(long, global = true)]
    pub max_rank: Option<usize>,
    /// Output file; reports go to stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract features for a directory-per-class corpus into a store.
    Extract {
        /// Corpus root holding one subdirectory per class.
        root: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// List the stored images closest to a query image.
    Retrieve {
        /// Feature store written by `extract`.
        #[arg(long)]
        store: PathBuf,
        /// Stored relative path, or an image file.
        #[arg(long)]
        query: String,
        /// Number of matches to list.
        #[arg(short = 'k', long = "top", default_value_t = 10)]
        k: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// ARP / ARR / F-Score per λ and ANMRR, as CSV.
    EvalRetrieval {
        /// Feature store written by `extract`.
        #[arg(long)]
        store: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Recognition rate, CMC and cross-validated recognition, as CSV.
    EvalRecognition {
        /// Feature store written by `extract`.
        #[arg(long)]
        store: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
}

impl CommonArgs {
    fn overrides(&self) -> Result<ConfigOverrides> {
        Ok(ConfigOverrides {
            descriptor: self
                .descriptor
                .as_deref()
                .map(str::parse::<DescriptorKind>)
                .transpose()?,
            radius: self.radius,
            threshold: self.threshold,
            lambda_max: self.lambda_max,
            fractions: self.fractions.as_deref().map(config::parse_fractions).transpose()?,
            folds: self.folds,
            seed: self.seed,
            max_rank: self.max_rank,
        })
    }

    /// Flags, then the config file, then defaults.
    pub fn resolve(&self) -> Result<BenchmarkConfig> {
        let file = match &self.config {
            Some(path) => ConfigOverrides::load(path)?,
            None => ConfigOverrides::default(),
        };
        self.overrides()?.or(file).resolve()
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_atomically(path, |w| w.write_all(text.as_bytes())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

pub fn execute(command: &Command) -> std::result::Result<(), CliError> {
    match command {
        Command::Extract { root, common } => {
            let config = common.resolve()?;
            let out = common
                .out
                .as_deref()
                .ok_or_else(|| CliError::Usage("extract requires --out <store>".into()))?;
            let summary = cmd_extract(root, &config, out)?;
            eprintln!(
                "extracted {} record(s) of {} bins ({} skipped) into {}",
                summary.records,
                summary.bins,
                summary.skipped,
                out.display()
            );
            Ok(())
        }
        Command::Retrieve {
            store,
            query,
            k,
            common,
        } => {
            let store = FeatureStore::load(store)?;
            let hits = retrieve(&store, query, *k)?;
            emit(common.out.as_deref(), &retrieval_hits_csv(&hits))?;
            Ok(())
        }
        Command::EvalRetrieval { store, common } => {
            let config = common.resolve()?;
            let store = FeatureStore::load(store)?;
            emit(common.out.as_deref(), &retrieval_report(&store, &config)?)?;
            Ok(())
        }
        Command::EvalRecognition { store, common } => {
            let config = common.resolve()?;
            let store = FeatureStore::load(store)?;
            emit(common.out.as_deref(), &recognition_report(&store, &config)?)?;
            Ok(())
        }
    }
}

/// Parses `args` and runs the command, mapping failures to exit codes.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
