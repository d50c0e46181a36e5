//! Command-line flags and the equivalent JSON run configuration.
//!
//! Every flag has a config-file key of the same name (dashes become
//! underscores). A `--config` file is read first and flags given on the
//! command line override it.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use segscore::aggregate::UndefinedHandling;
use segscore::overlap::{default_thresholds, EmptyPolicy, Metric};
use segscore::report::ReportOptions;

#[derive(Debug, Parser)]
#[command(name = "segscore", version, about = "Evaluate segmentation masks against ground truth")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a dataset of ground-truth/prediction pairs.
    Evaluate(RunArgs),
    /// Metric panel of no/full/random predictions against one ground truth.
    Scenarios(RunArgs),
    /// Check a report.json against the reporting guideline.
    Lint {
        /// Path to report.json.
        report: PathBuf,
    },
    /// Overlays, binary panels and disagreement maps for one pair.
    Visualize(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Csv,
    Json,
    Overlays,
    Plots,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UndefinedArg {
    Skip,
    Propagate,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Ground-truth directory (evaluate) or file (scenarios, visualize).
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Prediction directory (evaluate) or file (visualize).
    #[arg(long)]
    pub pred: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV with columns gt_path,pred_path,sample_id; replaces filename pairing.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// JSON class catalog: [{"class_id": 0, "name": "background", "is_background": true}, ...].
    #[arg(long)]
    pub classes: Option<PathBuf>,
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for random scenarios.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Measure AHD between class surfaces instead of full regions.
    #[arg(long)]
    pub surface_only: bool,
    /// Include the background class in averages (and report it per class).
    #[arg(long)]
    pub include_background: bool,
    /// Value of DSC/IoU when ground truth and prediction are both empty.
    #[arg(long, value_parser = clap::value_parser!(EmptyPolicy))]
    pub empty_policy: Option<EmptyPolicy>,
    /// Number of thresholds in ROC sweeps of probability maps.
    #[arg(long)]
    pub thresholds: Option<usize>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Artifacts to write (default: json,csv).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub emit: Option<Vec<Emit>>,
    /// Metrics summarized in aggregates (default: all, DSC first).
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(Metric))]
    pub metrics: Option<Vec<Metric>>,
    /// Undefined per-class values in macro averages.
    #[arg(long, value_enum)]
    pub undefined: Option<UndefinedArg>,
    /// Number of worst samples listed per metric.
    #[arg(long)]
    pub worst_k: Option<usize>,
    /// Number of best samples listed per metric.
    #[arg(long)]
    pub best_k: Option<usize>,
    /// Histogram bins.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Binarization threshold for probability-map predictions.
    #[arg(long)]
    pub probability_threshold: Option<f64>,
    /// Overlay opacity in (0, 1].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Grayscale PNG drawn under overlays (visualize).
    #[arg(long)]
    pub base: Option<PathBuf>,
    /// Slice index along the first axis for 3D masks (default: middle).
    #[arg(long)]
    pub slice: Option<usize>,
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub gt: Option<PathBuf>,
    pub pred: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub classes: Option<PathBuf>,
    pub seed: Option<u64>,
    pub surface_only: bool,
    pub include_background: bool,
    pub empty_policy: EmptyPolicy,
    pub thresholds: usize,
    pub workers: Option<usize>,
    pub emit: Vec<Emit>,
    pub metrics: Vec<Metric>,
    pub undefined: UndefinedHandling,
    pub worst_k: usize,
    pub best_k: usize,
    pub bins: usize,
    pub probability_threshold: f64,
    pub alpha: f64,
    pub base: Option<PathBuf>,
    pub slice: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let report = ReportOptions::default();
        RunConfig {
            gt: None,
            pred: None,
            out: None,
            manifest: None,
            classes: None,
            seed: None,
            surface_only: false,
            include_background: false,
            empty_policy: EmptyPolicy::default(),
            thresholds: report.roc_thresholds.len(),
            workers: None,
            emit: vec![Emit::Json, Emit::Csv],
            metrics: report.metrics,
            undefined: UndefinedHandling::default(),
            worst_k: report.worst_k,
            best_k: report.best_k,
            bins: report.histogram_bins,
            probability_threshold: report.probability_threshold,
            alpha: 0.5,
            base: None,
            slice: None,
        }
    }
}

impl RunConfig {
    /// Reads a JSON config; relative paths in it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut config: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut config.gt,
            &mut config.pred,
            &mut config.out,
            &mut config.manifest,
            &mut config.classes,
            &mut config.base,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(config)
    }

    /// Config file (if any) overridden by the given flags.
    pub fn from_args(args: &RunArgs) -> Result<Self> {
        let mut c = match &args.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = &args.$field {
                    c.$field = v.clone().into();
                }
            )*};
        }
        take!(gt, pred, out, manifest, classes, seed, workers, base, slice);
        take!(empty_policy, thresholds, emit, metrics, worst_k, best_k, bins, probability_threshold, alpha);
        if let Some(u) = args.undefined {
            c.undefined = match u {
                UndefinedArg::Skip => UndefinedHandling::Skip,
                UndefinedArg::Propagate => UndefinedHandling::Propagate,
            };
        }
        c.surface_only |= args.surface_only;
        c.include_background |= args.include_background;
        Ok(c)
    }

    pub fn emits(&self, e: Emit) -> bool {
        self.emit.contains(&e)
    }

    pub fn report_options(&self) -> ReportOptions {
        let mut o = ReportOptions::default();
        o.eval.empty_policy = self.empty_policy;
        o.eval.surface_only = self.surface_only;
        o.macro_policy = o.macro_policy.with_background(self.include_background);
        o.micro_policy = o.micro_policy.with_background(self.include_background);
        o.macro_policy.undefined_handling = self.undefined;
        o.metrics = self.metrics.clone();
        o.histogram_bins = self.bins;
        o.worst_k = self.worst_k;
        o.best_k = self.best_k;
        o.probability_threshold = self.probability_threshold;
        o.roc_thresholds = default_thresholds(self.thresholds);
        o.seed = self.seed;
        o
    }
}
