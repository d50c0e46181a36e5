//! Dataset-level evaluation reports.
//!
//! A [`DatasetReport`] holds every per-sample, per-class result together with
//! distribution summaries, worst-case rankings and lint findings. Aggregates
//! are a pure function of the per-sample values and the echoed
//! configuration, so a report read back from JSON recomputes to the same
//! aggregates ([`DatasetReport::recompute`]).
//!
//! Samples that cannot be loaded or compared are kept in the report with
//! status `failed` and a flag; only a dataset in which every sample fails is
//! an error.

pub mod format;
pub mod lint;
pub mod scenario;
pub mod stats;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregate::{
    macro_average, micro_average, per_class_report, report_classes, AveragingPolicy, Averaged,
    ClassResult, EvalOptions,
};
use crate::error::{Error, Result};
use crate::mask::{load_grid, load_mask, spacing_matches, ClassCatalog, ClassId, GridData, LabelMask};
use crate::overlap::{auc_trapezoid, default_thresholds, roc_curve, Metric};
use crate::score::{Score, UndefinedReason};

use format::{format_score, to_json};
use lint::{lint_report, Finding};
use scenario::SCENARIO_PRNG;
use stats::{describe, histogram, Histogram, Stats};

/// Report schema version.
pub const REPORT_VERSION: &str = "1.0";

/// Settings that change report contents; echoed verbatim into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportOptions {
    #[serde(flatten)]
    pub eval: EvalOptions,
    /// Metrics summarized in aggregates and rankings, in presentation order.
    pub metrics: Vec<Metric>,
    pub macro_policy: AveragingPolicy,
    pub micro_policy: AveragingPolicy,
    pub histogram_bins: usize,
    pub worst_k: usize,
    pub best_k: usize,
    /// Probability maps are binarized with `p >= probability_threshold`.
    pub probability_threshold: f64,
    /// Threshold sweep for ROC curves of probability maps.
    pub roc_thresholds: Vec<f64>,
    /// Seed of any random scenario the run used.
    pub seed: Option<u64>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            eval: EvalOptions::default(),
            metrics: Metric::ALL.to_vec(),
            macro_policy: AveragingPolicy::macro_default(),
            micro_policy: AveragingPolicy::micro_default(),
            histogram_bins: 10,
            worst_k: 5,
            best_k: 0,
            probability_threshold: 0.5,
            roc_thresholds: default_thresholds(101),
            seed: None,
        }
    }
}

impl ReportOptions {
    /// Evaluation options with background reported whenever an average
    /// needs it.
    pub fn effective_eval(&self) -> EvalOptions {
        EvalOptions {
            report_background: self.eval.report_background
                || self.macro_policy.include_background
                || self.micro_policy.include_background,
            ..self.eval
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.histogram_bins == 0 {
            return Err(Error::InvalidHistogram("bins must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.probability_threshold) {
            return Err(Error::InvalidThresholds(format!(
                "probability threshold {} is outside [0, 1]",
                self.probability_threshold
            )));
        }
        // Mode checks happen here so evaluation cannot fail half-way.
        macro_average(&BTreeMap::new(), None, &self.macro_policy)?;
        micro_average(&BTreeMap::new(), None, Metric::Dsc, self.eval.empty_policy, &self.micro_policy)?;
        Ok(())
    }
}

/// Numerical conventions a reader needs to reproduce the aggregates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Conventions {
    pub quantiles: String,
    pub std: String,
    pub histogram_bins: String,
    pub ahd_histogram_range: String,
    pub reals: String,
    pub scenario_prng: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            quantiles: "linear interpolation at p*(n-1)".into(),
            std: "population".into(),
            histogram_bins: "half-open [lo, hi), last bin closed".into(),
            ahd_histogram_range: "[0, max observed]".into(),
            reals: "17 significant digits".into(),
            scenario_prng: SCENARIO_PRNG.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConfigEcho {
    pub software: String,
    #[serde(flatten)]
    pub options: ReportOptions,
    pub catalog: ClassCatalog,
    pub conventions: Conventions,
}

impl Default for ConfigEcho {
    fn default() -> Self {
        ConfigEcho {
            software: concat!("segscore ", env!("CARGO_PKG_VERSION")).into(),
            options: ReportOptions::default(),
            catalog: ClassCatalog::default(),
            conventions: Conventions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SampleFlag {
    LoadFailed,
    ShapeMismatch,
    SpacingMismatch,
    MissingPrediction,
    UnpairedPrediction,
    InvalidProbabilities,
    UnsupportedProbabilityMap,
    EmptyGt,
    EmptyPred,
    UncataloguedLabel,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleStatus {
    #[default]
    Ok,
    Failed,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleResult {
    pub sample_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gt_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pred_path: Option<String>,
    pub status: SampleStatus,
    pub flags: Vec<SampleFlag>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub per_class: BTreeMap<ClassId, ClassResult>,
    #[serde(rename = "macro")]
    pub macro_avg: BTreeMap<Metric, Averaged>,
    pub micro: BTreeMap<Metric, Averaged>,
}

impl SampleResult {
    pub fn failed(sample_id: impl Into<String>, flag: SampleFlag, error: impl Into<String>) -> Self {
        SampleResult {
            sample_id: sample_id.into(),
            status: SampleStatus::Failed,
            flags: vec![flag],
            error: Some(error.into()),
            ..SampleResult::default()
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == SampleStatus::Ok
    }

    /// Macro-averaged value of `metric` (for a binary catalog, the
    /// foreground value).
    pub fn macro_score(&self, metric: Metric) -> Score {
        if !self.is_ok() {
            return Score::Undefined(UndefinedReason::SampleFailed);
        }
        self.macro_avg
            .get(&metric)
            .map(|a| a.value)
            .unwrap_or(Score::Undefined(UndefinedReason::NoEligibleClasses))
    }

    pub fn micro_score(&self, metric: Metric) -> Score {
        if !self.is_ok() {
            return Score::Undefined(UndefinedReason::SampleFailed);
        }
        self.micro
            .get(&metric)
            .map(|a| a.value)
            .unwrap_or(Score::Undefined(UndefinedReason::NoEligibleClasses))
    }
}

/// Summary of one metric over samples.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Distribution {
    pub n_defined: usize,
    pub n_undefined: usize,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub undefined: BTreeMap<UndefinedReason, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<Stats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram: Option<Histogram>,
}

/// Histogram range for `metric`; AHD uses `[0, max]` of the values.
pub fn histogram_range(metric: Metric, defined: &[f64]) -> (f64, f64) {
    metric.natural_range().unwrap_or_else(|| {
        let max = defined.iter().copied().fold(0.0, f64::max);
        (0.0, if max > 0.0 { max } else { 1.0 })
    })
}

/// Distribution of `scores`, given in sample order.
pub fn distribution(scores: &[Score], metric: Metric, bins: usize) -> Result<Distribution> {
    let defined: Vec<f64> = scores.iter().filter_map(|s| s.value()).collect();
    let mut undefined = BTreeMap::new();
    for r in scores.iter().filter_map(|s| s.reason()) {
        *undefined.entry(r).or_insert(0) += 1;
    }
    let hist = if defined.is_empty() {
        None
    } else {
        Some(histogram(&defined, bins, histogram_range(metric, &defined))?)
    };
    Ok(Distribution {
        n_defined: defined.len(),
        n_undefined: scores.len() - defined.len(),
        undefined,
        stats: describe(&defined),
        histogram: hist,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Aggregates {
    pub n_samples: usize,
    pub n_failed: usize,
    pub per_class: BTreeMap<ClassId, BTreeMap<Metric, Distribution>>,
    #[serde(rename = "macro")]
    pub macro_avg: BTreeMap<Metric, Distribution>,
    pub micro: BTreeMap<Metric, Distribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedSample {
    pub sample_id: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetReport {
    pub version: String,
    pub config_echo: ConfigEcho,
    pub samples: Vec<SampleResult>,
    pub aggregates: Aggregates,
    /// Per metric, the worst samples by macro value, worst first.
    pub worst_k: BTreeMap<Metric, Vec<RankedSample>>,
    /// Per metric, the best samples by macro value, best first.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub best_k: BTreeMap<Metric, Vec<RankedSample>>,
    /// Relative paths of overlays and plots written for this report.
    pub visualizations: Vec<String>,
    pub lint: Vec<Finding>,
}

impl Default for DatasetReport {
    fn default() -> Self {
        DatasetReport {
            version: REPORT_VERSION.into(),
            config_echo: ConfigEcho::default(),
            samples: Vec::new(),
            aggregates: Aggregates::default(),
            worst_k: BTreeMap::new(),
            best_k: BTreeMap::new(),
            visualizations: Vec::new(),
            lint: Vec::new(),
        }
    }
}

/// Ground-truth and prediction files of one sample. A missing side marks an
/// unpaired file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplePair {
    pub sample_id: String,
    pub gt: Option<PathBuf>,
    pub pred: Option<PathBuf>,
}

/// An in-memory sample, or the reason it could not be loaded.
pub type LoadedSample = std::result::Result<(LabelMask, GridData), (SampleFlag, String)>;

/// Evaluates one loaded sample. Data problems become flags on the result;
/// only invalid options are errors.
pub fn evaluate_sample(
    sample_id: &str,
    gt: &LabelMask,
    pred: &GridData,
    catalog: &ClassCatalog,
    options: &ReportOptions,
) -> Result<SampleResult> {
    let failed = |flag, msg: String| Ok(SampleResult::failed(sample_id, flag, msg));
    let fg_ids = catalog.foreground_ids();
    let mut probabilities = None;
    let binarized;
    let pred_mask = match pred {
        GridData::Labels(m) => m,
        GridData::Probabilities(p) => {
            if fg_ids.len() != 1 {
                return failed(
                    SampleFlag::UnsupportedProbabilityMap,
                    "probability maps need a catalog with exactly one foreground class".into(),
                );
            }
            if let Some((i, v)) = p.first_out_of_range() {
                return failed(
                    SampleFlag::InvalidProbabilities,
                    Error::ProbabilityOutOfRange { index: i, value: v }.to_string(),
                );
            }
            let bg = catalog.background().unwrap_or(0);
            binarized = p.binarize(options.probability_threshold as f32, fg_ids[0], bg);
            probabilities = Some(p);
            &binarized
        }
    };
    if gt.shape() != pred_mask.shape() {
        return failed(
            SampleFlag::ShapeMismatch,
            Error::ShapeMismatch(gt.shape().to_vec(), pred_mask.shape().to_vec()).to_string(),
        );
    }

    let mut flags = Vec::new();
    if !spacing_matches(gt, pred_mask) {
        flags.push(SampleFlag::SpacingMismatch);
    }
    if fg_ids.iter().all(|&c| !gt.contains(c)) {
        flags.push(SampleFlag::EmptyGt);
    }
    if fg_ids.iter().all(|&c| !pred_mask.contains(c)) {
        flags.push(SampleFlag::EmptyPred);
    }
    let present: BTreeSet<ClassId> = gt.present_labels().union(&pred_mask.present_labels()).copied().collect();
    if present.iter().any(|&l| !catalog.contains(l)) {
        flags.push(SampleFlag::UncataloguedLabel);
    }

    let mut per_class = per_class_report(gt, pred_mask, catalog, &options.effective_eval())?;
    if let Some(p) = probabilities {
        let fg = fg_ids[0];
        let roc_auc = match roc_curve(gt, p, fg, &options.roc_thresholds) {
            Ok(points) => Score::Defined(auc_trapezoid(&points)),
            Err(Error::DegenerateRoc(_)) if gt.contains(fg) => Score::Undefined(UndefinedReason::NoNegativesInGt),
            Err(Error::DegenerateRoc(_)) => Score::Undefined(UndefinedReason::NoPositivesInGt),
            Err(e) => return Err(e),
        };
        per_class.get_mut(&fg).expect("foreground reported").roc_auc = Some(roc_auc);
    }

    let background = catalog.background();
    let mut macro_avg = BTreeMap::new();
    let mut micro = BTreeMap::new();
    let counts: BTreeMap<ClassId, _> = per_class.iter().map(|(&c, r)| (c, r.counts)).collect();
    for &metric in &options.metrics {
        let values: BTreeMap<ClassId, Score> = per_class.iter().map(|(&c, r)| (c, r.get(metric))).collect();
        macro_avg.insert(metric, macro_average(&values, background, &options.macro_policy)?);
        if metric != Metric::Ahd {
            micro.insert(
                metric,
                micro_average(&counts, background, metric, options.eval.empty_policy, &options.micro_policy)?,
            );
        }
    }

    Ok(SampleResult {
        sample_id: sample_id.to_string(),
        gt_path: None,
        pred_path: None,
        status: SampleStatus::Ok,
        flags,
        error: None,
        per_class,
        macro_avg,
        micro,
    })
}

/// Reads both sides of a pair.
pub fn load_pair(pair: &SamplePair) -> LoadedSample {
    let gt_path = match (&pair.gt, &pair.pred) {
        (Some(g), Some(_)) => g,
        (Some(_), None) => return Err((SampleFlag::MissingPrediction, "no prediction for this sample".into())),
        (None, _) => return Err((SampleFlag::UnpairedPrediction, "no ground truth for this prediction".into())),
    };
    let gt = load_mask(gt_path, None).map_err(|e| (SampleFlag::LoadFailed, e.to_string()))?;
    let pred = load_grid(pair.pred.as_ref().expect("checked above"), None)
        .map_err(|e| (SampleFlag::LoadFailed, e.to_string()))?;
    Ok((gt, pred))
}

fn check_ids<'a>(ids: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    let mut any = false;
    for id in ids {
        any = true;
        if !seen.insert(id) {
            return Err(Error::DuplicateSample(id.to_string()));
        }
    }
    if any {
        Ok(())
    } else {
        Err(Error::NoPairs)
    }
}

/// Catalog named after every label found in the loaded samples.
pub fn derive_catalog<'a>(samples: impl IntoIterator<Item = &'a LoadedSample>) -> ClassCatalog {
    let mut labels = BTreeSet::new();
    for (gt, pred) in samples.into_iter().flatten() {
        labels.extend(gt.present_labels());
        if let GridData::Labels(p) = pred {
            labels.extend(p.present_labels());
        }
    }
    ClassCatalog::from_labels(labels)
}

/// Loads and evaluates every pair in parallel and assembles the report.
///
/// Without a catalog one is derived from the labels found in the data.
pub fn evaluate_dataset(
    pairs: &[SamplePair],
    catalog: Option<&ClassCatalog>,
    options: &ReportOptions,
) -> Result<DatasetReport> {
    check_ids(pairs.iter().map(|p| p.sample_id.as_str()))?;
    options.validate()?;
    let loaded: Vec<LoadedSample> = pairs.par_iter().map(load_pair).collect();
    let samples: Vec<(String, LoadedSample)> = pairs
        .iter()
        .map(|p| p.sample_id.clone())
        .zip(loaded)
        .collect();
    let mut report = evaluate_loaded(samples, catalog, options)?;
    let paths: BTreeMap<&str, &SamplePair> = pairs.iter().map(|p| (p.sample_id.as_str(), p)).collect();
    for s in &mut report.samples {
        let pair = paths[s.sample_id.as_str()];
        s.gt_path = pair.gt.as_ref().map(|p| p.display().to_string());
        s.pred_path = pair.pred.as_ref().map(|p| p.display().to_string());
    }
    Ok(report)
}

/// Evaluates in-memory samples and assembles the report.
pub fn evaluate_loaded(
    samples: Vec<(String, LoadedSample)>,
    catalog: Option<&ClassCatalog>,
    options: &ReportOptions,
) -> Result<DatasetReport> {
    check_ids(samples.iter().map(|(id, _)| id.as_str()))?;
    options.validate()?;
    let catalog = match catalog {
        Some(c) => c.clone(),
        None => derive_catalog(samples.iter().map(|(_, s)| s)),
    };
    if catalog.entries().is_empty() {
        return Err(Error::EmptyClassList);
    }
    let results = samples
        .par_iter()
        .map(|(id, loaded)| match loaded {
            Ok((gt, pred)) => evaluate_sample(id, gt, pred, &catalog, options),
            Err((flag, msg)) => Ok(SampleResult::failed(id.as_str(), *flag, msg.as_str())),
        })
        .collect::<Result<Vec<_>>>()?;
    if results.iter().all(|s| !s.is_ok()) {
        return Err(Error::AllSamplesFailed);
    }
    DatasetReport::assemble(results, catalog, options.clone())
}

impl DatasetReport {
    /// Builds aggregates, rankings and lint for evaluated samples.
    pub fn assemble(
        mut samples: Vec<SampleResult>,
        catalog: ClassCatalog,
        options: ReportOptions,
    ) -> Result<Self> {
        samples.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
        let mut report = DatasetReport {
            config_echo: ConfigEcho {
                options,
                catalog,
                ..ConfigEcho::default()
            },
            samples,
            ..DatasetReport::default()
        };
        report.recompute()?;
        Ok(report)
    }

    /// Recomputes aggregates, rankings and lint from the samples and the
    /// echoed configuration.
    pub fn recompute(&mut self) -> Result<()> {
        self.aggregates = compute_aggregates(&self.samples, &self.config_echo)?;
        let (worst, best) = rankings(&self.samples, &self.config_echo.options);
        self.worst_k = worst;
        self.best_k = best;
        self.refresh_lint();
        Ok(())
    }

    pub fn refresh_lint(&mut self) {
        self.lint = lint_report(self);
    }

    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// One row per sample and reported class.
    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(CSV_COLUMNS)?;
        let catalog = &self.config_echo.catalog;
        for s in &self.samples {
            let flags = s
                .flags
                .iter()
                .map(|f| serde_json::to_value(f).expect("flag serializes"))
                .map(|v| v.as_str().unwrap_or_default().to_string())
                .collect::<Vec<_>>()
                .join(";");
            if !s.is_ok() {
                let failed = format_score(Score::Undefined(UndefinedReason::SampleFailed));
                let mut row = vec![s.sample_id.clone(), String::new(), String::new()];
                row.extend(CSV_METRICS.iter().map(|_| failed.clone()));
                row.push(flags);
                csv.write_record(&row)?;
                continue;
            }
            for (&class, result) in &s.per_class {
                let mut row = vec![
                    s.sample_id.clone(),
                    class.to_string(),
                    catalog.name(class).unwrap_or_default().to_string(),
                ];
                row.extend(CSV_METRICS.iter().map(|&m| format_score(result.get(m))));
                row.push(flags.clone());
                csv.write_record(&row)?;
            }
        }
        csv.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

pub const CSV_COLUMNS: [&str; 12] = [
    "sample_id",
    "class_id",
    "class_name",
    "iou",
    "dsc",
    "sensitivity",
    "specificity",
    "accuracy",
    "auc",
    "kappa",
    "ahd",
    "flags",
];

const CSV_METRICS: [Metric; 8] = [
    Metric::Iou,
    Metric::Dsc,
    Metric::Sensitivity,
    Metric::Specificity,
    Metric::Accuracy,
    Metric::Auc,
    Metric::Kappa,
    Metric::Ahd,
];

/// Distribution summaries over successfully evaluated samples.
pub fn compute_aggregates(samples: &[SampleResult], config: &ConfigEcho) -> Result<Aggregates> {
    let options = &config.options;
    let bins = options.histogram_bins;
    let ok: Vec<&SampleResult> = samples.iter().filter(|s| s.is_ok()).collect();
    let mut agg = Aggregates {
        n_samples: samples.len(),
        n_failed: samples.len() - ok.len(),
        ..Aggregates::default()
    };
    for class in report_classes(&config.catalog, &options.effective_eval()) {
        let mut per_metric = BTreeMap::new();
        for &metric in &options.metrics {
            let scores: Vec<Score> = ok
                .iter()
                .filter_map(|s| s.per_class.get(&class).map(|r| r.get(metric)))
                .collect();
            per_metric.insert(metric, distribution(&scores, metric, bins)?);
        }
        agg.per_class.insert(class, per_metric);
    }
    for &metric in &options.metrics {
        let scores: Vec<Score> = ok.iter().map(|s| s.macro_score(metric)).collect();
        agg.macro_avg.insert(metric, distribution(&scores, metric, bins)?);
        if metric != Metric::Ahd {
            let scores: Vec<Score> = ok.iter().map(|s| s.micro_score(metric)).collect();
            agg.micro.insert(metric, distribution(&scores, metric, bins)?);
        }
    }
    Ok(agg)
}

type Rankings = BTreeMap<Metric, Vec<RankedSample>>;

/// Worst-first and best-first samples per metric by macro value; ties break
/// by sample id.
pub fn rankings(samples: &[SampleResult], options: &ReportOptions) -> (Rankings, Rankings) {
    let mut worst = BTreeMap::new();
    let mut best = BTreeMap::new();
    for &metric in &options.metrics {
        let mut ranked: Vec<RankedSample> = samples
            .iter()
            .filter_map(|s| {
                s.macro_score(metric).value().map(|value| RankedSample {
                    sample_id: s.sample_id.clone(),
                    value,
                })
            })
            .collect();
        ranked.sort_by(|a, b| {
            let by_value = a.value.total_cmp(&b.value);
            let by_value = if metric.higher_is_better() { by_value } else { by_value.reverse() };
            by_value.then_with(|| a.sample_id.cmp(&b.sample_id))
        });
        worst.insert(metric, ranked.iter().take(options.worst_k).cloned().collect());
        if options.best_k > 0 {
            let mut top: Vec<RankedSample> = ranked.iter().rev().take(options.best_k).cloned().collect();
            top.sort_by(|a, b| {
                let by_value = b.value.total_cmp(&a.value);
                let by_value = if metric.higher_is_better() { by_value } else { by_value.reverse() };
                by_value.then_with(|| a.sample_id.cmp(&b.sample_id))
            });
            best.insert(metric, top);
        }
    }
    (worst, best)
}

#[cfg(test)]
mod tests;
