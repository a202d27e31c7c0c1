use std::fmt::Write as _;
use std::path::Path;

use log::warn;

use crate::cli::config::BenchmarkConfig;
use crate::cli::store::FeatureStore;
use crate::cli::CliError;
use crate::dataset::{load_image, scan_dataset};
use crate::error::Error;
use crate::eval::{
    cross_validated_recognition, leave_one_out_cmc, rank_gallery, recognition_rate,
    RetrievalEvaluator,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractSummary {
    pub records: usize,
    pub skipped: usize,
    pub bins: usize,
}

/// Scans `root`, extracts the configured descriptor for every decodable
/// image and saves the store to `out`.
pub fn cmd_extract(root: &Path, config: &BenchmarkConfig, out: &Path) -> Result<ExtractSummary, CliError> {
    let descriptor = config.descriptor()?;
    let dataset = scan_dataset(root)?;
    if !dataset.skipped().is_empty() {
        warn!(
            "{} file(s) under {} could not be decoded and were skipped",
            dataset.skipped().len(),
            root.display()
        );
    }
    let store = FeatureStore::extract(&dataset, &descriptor, &root.to_string_lossy())?;
    store.save(out)?;
    Ok(ExtractSummary {
        records: store.len(),
        skipped: store.header.skipped,
        bins: store.header.bins,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RetrievalHit {
    pub rank: usize,
    pub index: usize,
    pub path: String,
    pub label: String,
    pub distance: f64,
}

/// Top-`k` stored images closest to `query`.
///
/// `query` is first looked up among the stored records; a stored query is
/// excluded from its own results. Otherwise it is loaded as an image file
/// and described with the store's descriptor.
pub fn retrieve(store: &FeatureStore, query: &str, k: usize) -> Result<Vec<RetrievalHit>, CliError> {
    let features = store.features();
    let (query_bins, query_index) = match store.find(query) {
        Some(i) => (store.records[i].bins.clone(), Some(i)),
        None => {
            let image = load_image(Path::new(query))?;
            let feature = store.header.descriptor.extract(&image)?;
            (feature.bins().to_vec(), None)
        }
    };
    let available = store.len() - usize::from(query_index.is_some());
    if k == 0 || k > available {
        return Err(CliError::Usage(format!(
            "k = {k} is outside 1..={available} for this store"
        )));
    }
    let gallery: Vec<usize> = (0..store.len()).collect();
    let ranked = rank_gallery(&query_bins, query_index, &features, &gallery)?;
    Ok(ranked
        .top(k)
        .iter()
        .enumerate()
        .map(|(pos, item)| RetrievalHit {
            rank: pos + 1,
            index: item.index,
            path: store.records[item.index].path.clone(),
            label: store.records[item.index].label.clone(),
            distance: item.distance,
        })
        .collect())
}

/// Quotes a CSV field when it contains a delimiter, quote or line break.
fn csv_field(value: &str) -> String {
    if value.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

pub fn retrieval_hits_csv(hits: &[RetrievalHit]) -> String {
    let mut out = String::from("rank,path,class,distance\n");
    for h in hits {
        let _ = writeln!(
            out,
            "{},{},{},{:.6}",
            h.rank,
            csv_field(&h.path),
            csv_field(&h.label),
            h.distance
        );
    }
    out
}

/// ARP, ARR and F-Score for `λ = 1..=lambda_max`, then a closing `anmrr` row.
pub fn retrieval_report(store: &FeatureStore, config: &BenchmarkConfig) -> Result<String, CliError> {
    let labels = store.labels();
    let features = store.features();
    if store.len() < 2 {
        return Err(Error::Evaluation("retrieval needs at least two stored images".into()).into());
    }
    if let Some(c) = (0..labels.num_classes()).find(|&c| labels.class_size(c) < 2) {
        return Err(Error::Evaluation(format!(
            "class '{}' has a single image; retrieval evaluation needs at least two per class",
            labels.name(c)
        ))
        .into());
    }
    if config.lambda_max > store.len() - 1 {
        return Err(CliError::Usage(format!(
            "lambda-max {} exceeds the {} images retrievable from this store",
            config.lambda_max,
            store.len() - 1
        )));
    }
    let eval = RetrievalEvaluator::new(&features, &labels)?;
    let metrics = eval.metrics(1..=config.lambda_max)?;

    let mut out = String::from("lambda,arp,arr,f_score\n");
    for row in &metrics.rows {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6}",
            row.lambda, row.arp, row.arr, row.f_score
        );
    }
    let _ = writeln!(out, "anmrr,{:.6},,", metrics.anmrr);
    Ok(out)
}

/// Long-format recognition report with columns `section,key,fold,value`:
///
/// * `recognition_rate,leave_one_out,,<percent>`
/// * `cmc,<rank>,,<score>` for ranks `1..=max_rank`
/// * `cross_validation,<fraction>,<fold>,<percent>` for every fold
/// * `cross_validation_mean,<fraction>,,<percent>`
pub fn recognition_report(store: &FeatureStore, config: &BenchmarkConfig) -> Result<String, CliError> {
    config.validate()?;
    let labels = store.labels();
    let features = store.features();

    let rate = recognition_rate(&features, &labels)?;
    let cmc = leave_one_out_cmc(&features, &labels, config.max_rank)?;
    let cv = cross_validated_recognition(
        &features,
        &labels,
        &config.fractions,
        config.folds,
        config.seed,
    )?;

    let mut out = String::from("section,key,fold,value\n");
    let _ = writeln!(out, "recognition_rate,leave_one_out,,{rate:.6}");
    for (r, score) in cmc.iter().enumerate() {
        let _ = writeln!(out, "cmc,{},,{score:.6}", r + 1);
    }
    for fraction in &cv {
        for (fold, rate) in fraction.fold_rates.iter().enumerate() {
            let _ = writeln!(
                out,
                "cross_validation,{},{fold},{rate:.6}",
                fraction.probe_fraction
            );
        }
        let _ = writeln!(
            out,
            "cross_validation_mean,{},,{:.6}",
            fraction.probe_fraction, fraction.mean
        );
    }
    Ok(out)
}
