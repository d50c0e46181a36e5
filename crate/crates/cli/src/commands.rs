//! The four subcommands. Each returns its exit code; `Err` is a fatal error.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use segscore::mask::{load_grid, load_mask, ClassCatalog, ClassId, GridData, LabelMask};
use segscore::overlap::Metric;
use segscore::report::format::{format_score, to_json};
use segscore::report::lint::{has_errors, lint_report, Severity};
use segscore::report::scenario::{scenario_foreground, scenario_panel, SCENARIO_PRNG};
use segscore::report::{evaluate_dataset, DatasetReport, Distribution, SampleFlag, SamplePair};
use segscore::score::Score;
use segscore::visualize::{
    default_palette, render_binary_panels, render_boxplot_svg, render_disagreement, render_histogram_svg,
    render_overlay, GrayImage, OverlaySpec, DEFAULT_PALETTE,
};
use segscore::Error;

use crate::config::{Emit, RunConfig};
use crate::pairing::{pair_by_filename, read_manifest};
use crate::Console;

/// Exit code when every sample evaluated cleanly.
pub const EXIT_OK: i32 = 0;
/// Exit code for fatal errors.
pub const EXIT_FATAL: i32 = 1;
/// Exit code when at least one sample carries a flag.
pub const EXIT_FLAGGED: i32 = 2;
/// Exit code when lint finds an error-severity violation.
pub const EXIT_LINT_ERROR: i32 = 3;

fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    value.as_deref().with_context(|| format!("--{flag} is required"))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()?)
}

fn load_catalog(config: &RunConfig) -> Result<Option<ClassCatalog>> {
    config
        .classes
        .as_deref()
        .map(|p| ClassCatalog::load_json(p).with_context(|| format!("loading class catalog {}", p.display())))
        .transpose()
}

/// 2D view of a mask: itself, or one slice along the first axis of a volume
/// (the middle one by default).
pub fn slice_2d(mask: &LabelMask, slice: Option<usize>) -> Result<LabelMask> {
    match mask.ndim() {
        2 => Ok(mask.clone()),
        3 => Ok(mask.slice(slice.unwrap_or(mask.shape()[0] / 2))?),
        n => bail!("cannot draw a mask with {n} axes"),
    }
}

/// Hard labels of a prediction; probability maps are binarized for a
/// single-foreground catalog.
fn hard_labels(pred: GridData, catalog: &ClassCatalog, threshold: f64) -> Result<LabelMask> {
    match pred {
        GridData::Labels(m) => Ok(m),
        GridData::Probabilities(p) => {
            let fg = catalog.foreground_ids();
            ensure!(fg.len() == 1, "probability maps need exactly one foreground class");
            Ok(p.binarize(threshold as f32, fg[0], catalog.background().unwrap_or(0)))
        }
    }
}

/// Palette over the catalog, extended in ascending order to labels the
/// catalog does not name.
fn overlay_spec(catalog: &ClassCatalog, masks: &[&LabelMask], alpha: f64) -> Result<OverlaySpec> {
    let mut palette = default_palette(catalog);
    let extra: BTreeSet<ClassId> = masks
        .iter()
        .flat_map(|m| m.present_labels())
        .filter(|&l| !catalog.contains(l))
        .collect();
    for label in extra {
        palette.insert(label, DEFAULT_PALETTE[palette.len() % DEFAULT_PALETTE.len()]);
    }
    Ok(OverlaySpec::new(palette, alpha, catalog.background())?)
}

/// PNG files for one 2D pair as `(file name, bytes)`.
fn pair_images(
    stem: &str,
    base: Option<&GrayImage>,
    gt: &LabelMask,
    pred: &LabelMask,
    catalog: &ClassCatalog,
    alpha: f64,
    binary_panels: bool,
) -> Result<Vec<(String, Vec<u8>)>> {
    ensure!(gt.shape() == pred.shape(), "shape mismatch: {:?} vs {:?}", gt.shape(), pred.shape());
    let spec = overlay_spec(catalog, &[gt, pred], alpha)?;
    let mut out = vec![
        (format!("{stem}_gt-overlay.png"), render_overlay(base, gt, &spec)?.to_png()?),
        (format!("{stem}_pred-overlay.png"), render_overlay(base, pred, &spec)?.to_png()?),
    ];
    for class in catalog.foreground_ids() {
        out.push((
            format!("{stem}_class{class}_disagreement.png"),
            render_disagreement(base, gt, pred, class)?.to_png()?,
        ));
    }
    if binary_panels {
        for (side, mask) in [("gt", gt), ("pred", pred)] {
            for (class, img) in render_binary_panels(mask, catalog)? {
                out.push((format!("{stem}_{side}_class{class}_binary.png"), img.to_png()?));
            }
        }
    }
    Ok(out)
}

/// Overlays for every successfully evaluated sample; returns paths relative
/// to `out_dir`.
fn write_overlays(out_dir: &Path, pairs: &[SamplePair], report: &DatasetReport, config: &RunConfig) -> Result<Vec<String>> {
    let ok: BTreeSet<&str> = report
        .samples
        .iter()
        .filter(|s| s.is_ok())
        .map(|s| s.sample_id.as_str())
        .collect();
    let catalog = &report.config_echo.catalog;
    let mut selected: Vec<&SamplePair> = pairs.iter().filter(|p| ok.contains(p.sample_id.as_str())).collect();
    selected.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    let images = selected
        .par_iter()
        .map(|pair| -> Result<Vec<(String, Vec<u8>)>> {
            let gt = load_mask(pair.gt.as_deref().expect("evaluated pair"), None)?;
            let pred = load_grid(pair.pred.as_deref().expect("evaluated pair"), None)?;
            let pred = hard_labels(pred, catalog, config.probability_threshold)?;
            let gt = slice_2d(&gt, config.slice)?;
            let pred = slice_2d(&pred, config.slice)?;
            pair_images(&pair.sample_id, None, &gt, &pred, catalog, config.alpha, false)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut written = Vec::new();
    for (name, bytes) in images.into_iter().flatten() {
        write_file(&out_dir.join("overlays").join(&name), &bytes)?;
        written.push(format!("overlays/{name}"));
    }
    Ok(written)
}

fn scope_label(scope: &str, catalog: &ClassCatalog) -> String {
    scope
        .strip_prefix("class")
        .and_then(|id| id.parse::<ClassId>().ok())
        .and_then(|id| catalog.name(id).map(|n| format!("class {id} ({n})")))
        .unwrap_or_else(|| format!("{scope} average"))
}

/// Histogram and box plot per metric for each class and each average.
fn write_plots(out_dir: &Path, report: &DatasetReport) -> Result<Vec<String>> {
    let agg = &report.aggregates;
    let catalog = &report.config_echo.catalog;
    let mut scopes: Vec<(String, &BTreeMap<Metric, Distribution>)> = agg
        .per_class
        .iter()
        .map(|(id, m)| (format!("class{id}"), m))
        .collect();
    scopes.push(("macro".into(), &agg.macro_avg));
    scopes.push(("micro".into(), &agg.micro));
    let mut written = Vec::new();
    for (scope, metrics) in scopes {
        let label = scope_label(&scope, catalog);
        for (metric, dist) in metrics {
            let title = format!("{}, {label}", metric.name().to_uppercase());
            if let Some(h) = &dist.histogram {
                let name = format!("dataset_{scope}_{metric}-histogram.svg");
                let svg = render_histogram_svg(h, &title, metric.name(), "samples")?;
                write_file(&out_dir.join("plots").join(&name), svg.as_bytes())?;
                written.push(format!("plots/{name}"));
            }
            if let Some(s) = &dist.stats {
                let name = format!("dataset_{scope}_{metric}-boxplot.svg");
                let svg = render_boxplot_svg(s, &title, metric.name())?;
                write_file(&out_dir.join("plots").join(&name), svg.as_bytes())?;
                written.push(format!("plots/{name}"));
            }
        }
    }
    Ok(written)
}

fn mean_std(dist: Option<&Distribution>) -> String {
    match dist.and_then(|d| d.stats.as_ref()) {
        Some(s) => format!("{:.4} ± {:.4}", s.mean, s.std),
        None => "undefined".into(),
    }
}

fn print_summary(console: &mut Console, report: &DatasetReport) -> Result<()> {
    let metrics = &report.config_echo.options.metrics;
    let catalog = &report.config_echo.catalog;
    let agg = &report.aggregates;
    let mut rows: Vec<(String, Vec<String>)> = agg
        .per_class
        .iter()
        .map(|(id, m)| {
            let name = catalog.name(*id).map(str::to_string).unwrap_or_else(|| id.to_string());
            (name, metrics.iter().map(|k| mean_std(m.get(k))).collect())
        })
        .collect();
    rows.push(("macro".into(), metrics.iter().map(|k| mean_std(agg.macro_avg.get(k))).collect()));
    rows.push((
        "micro".into(),
        metrics
            .iter()
            .map(|k| if *k == Metric::Ahd { "-".into() } else { mean_std(agg.micro.get(k)) })
            .collect(),
    ));
    let name_w = rows.iter().map(|r| r.0.chars().count()).max().unwrap_or(0).max(5);
    let mut header = format!("{:<name_w$}", "class");
    for m in metrics {
        header.push_str(&format!("  {:>17}", m.name().to_uppercase()));
    }
    writeln!(console.out, "{}", console.bold(&header))?;
    for (name, cells) in rows {
        let mut line = format!("{name:<name_w$}");
        for c in cells {
            line.push_str(&format!("  {c:>17}"));
        }
        writeln!(console.out, "{line}")?;
    }
    let flagged = report.samples.iter().filter(|s| !s.flags.is_empty()).count();
    writeln!(
        console.out,
        "samples: {} evaluated, {} failed, {} flagged",
        agg.n_samples - agg.n_failed,
        agg.n_failed,
        flagged
    )?;
    for s in report.samples.iter().filter(|s| !s.flags.is_empty()) {
        let flags: Vec<String> = s.flags.iter().map(flag_name).collect();
        let detail = s.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default();
        writeln!(console.out, "  {}: {}{detail}", s.sample_id, flags.join(", "))?;
    }
    Ok(())
}

fn flag_name(flag: &SampleFlag) -> String {
    serde_json::to_value(flag)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn print_findings(console: &mut Console, report: &DatasetReport) -> Result<()> {
    let findings = lint_report(report);
    for f in &findings {
        let tag = match f.severity {
            Severity::Error => console.red(&f.severity.to_string()),
            Severity::Warning => console.yellow(&f.severity.to_string()),
            Severity::Info => f.severity.to_string(),
        };
        writeln!(console.out, "{} [{tag}] {}", f.rule, f.message)?;
    }
    let n = findings.len();
    writeln!(console.out, "{n} finding{}", if n == 1 { "" } else { "s" })?;
    Ok(())
}

/// Resolves pairs from a manifest or by filename.
pub fn resolve_pairs(config: &RunConfig) -> Result<Vec<SamplePair>> {
    let pairs = match &config.manifest {
        Some(m) => read_manifest(m)?,
        None => pair_by_filename(required(&config.gt, "gt")?, required(&config.pred, "pred")?)?,
    };
    ensure!(
        pairs.iter().any(|p| p.gt.is_some() && p.pred.is_some()),
        "no pairs resolved"
    );
    Ok(pairs)
}

/// Evaluates a dataset and writes the requested artifacts.
pub fn cmd_evaluate(config: &RunConfig, console: &mut Console) -> Result<i32> {
    let out_dir = required(&config.out, "out")?;
    let pairs = resolve_pairs(config)?;
    let catalog = load_catalog(config)?;
    let options = config.report_options();
    let pool = thread_pool(config.workers)?;
    let mut report = pool.install(|| evaluate_dataset(&pairs, catalog.as_ref(), &options))?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let mut visuals = Vec::new();
    if config.emits(Emit::Overlays) {
        visuals.extend(pool.install(|| write_overlays(out_dir, &pairs, &report, config))?);
    }
    if config.emits(Emit::Plots) {
        visuals.extend(write_plots(out_dir, &report)?);
    }
    report.visualizations = visuals;
    report.refresh_lint();
    if config.emits(Emit::Json) {
        write_file(&out_dir.join("report.json"), report.to_json()?.as_bytes())?;
    }
    if config.emits(Emit::Csv) {
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        write_file(&out_dir.join("report.csv"), &buf)?;
    }

    print_summary(console, &report)?;
    print_findings(console, &report)?;
    Ok(if report.samples.iter().any(|s| !s.flags.is_empty()) {
        EXIT_FLAGGED
    } else {
        EXIT_OK
    })
}

#[derive(Serialize)]
struct ScenarioFile<'a> {
    gt: String,
    seed: u64,
    prng: &'a str,
    foreground_class: ClassId,
    foreground_fraction: f64,
    rows: Vec<segscore::report::scenario::ScenarioResult>,
}

const PANEL: [Metric; 8] = [
    Metric::Dsc,
    Metric::Iou,
    Metric::Sensitivity,
    Metric::Specificity,
    Metric::Accuracy,
    Metric::Auc,
    Metric::Kappa,
    Metric::Ahd,
];

/// Metric panel of the no/full/random scenarios against one ground truth.
pub fn cmd_scenarios(config: &RunConfig, console: &mut Console) -> Result<i32> {
    let gt_path = required(&config.gt, "gt")?;
    let seed = config.seed.ok_or(Error::MissingSeed)?;
    let gt = load_mask(gt_path, None).with_context(|| format!("loading {}", gt_path.display()))?;
    let options = config.report_options();
    let rows = scenario_panel(&gt, seed, &options.eval)?;
    let fg = scenario_foreground(&gt);

    let mut header = format!("{:<10}", "scenario");
    for m in PANEL {
        header.push_str(&format!("  {:>12}", m.name().to_uppercase()));
    }
    writeln!(console.out, "{}", console.bold(&header))?;
    let mut csv_rows = Vec::new();
    for row in &rows {
        let name = row.scenario.to_string();
        let label = name.split(':').next().unwrap_or(&name).to_string();
        let mut line = format!("{label:<10}");
        let mut record = vec![name.clone()];
        for m in PANEL {
            let score = row.result.get(m);
            line.push_str(&format!(
                "  {:>12}",
                match score {
                    Score::Defined(v) => format!("{v:.6}"),
                    Score::Undefined(r) => r.to_string(),
                }
            ));
            record.push(format_score(score));
        }
        writeln!(console.out, "{line}")?;
        csv_rows.push(record);
    }

    if let Some(out_dir) = &config.out {
        let file = ScenarioFile {
            gt: gt_path.display().to_string(),
            seed,
            prng: SCENARIO_PRNG,
            foreground_class: fg,
            foreground_fraction: gt.count(fg) as f64 / gt.len() as f64,
            rows,
        };
        write_file(&out_dir.join("scenarios.json"), to_json(&file)?.as_bytes())?;
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["scenario".to_string()];
        header.extend(PANEL.iter().map(|m| m.name().to_string()));
        w.write_record(&header)?;
        for r in csv_rows {
            w.write_record(&r)?;
        }
        write_file(&out_dir.join("scenarios.csv"), &w.into_inner()?)?;
    }
    Ok(EXIT_OK)
}

/// Lints a written report.
pub fn cmd_lint(report_path: &Path, console: &mut Console) -> Result<i32> {
    let text =
        fs::read_to_string(report_path).with_context(|| format!("reading {}", report_path.display()))?;
    let report = DatasetReport::from_json(&text).with_context(|| format!("parsing {}", report_path.display()))?;
    print_findings(console, &report)?;
    Ok(if has_errors(&lint_report(&report)) {
        EXIT_LINT_ERROR
    } else {
        EXIT_OK
    })
}

/// Overlays, disagreement maps and binary panels for one pair.
pub fn cmd_visualize(config: &RunConfig, console: &mut Console) -> Result<i32> {
    let gt_path = required(&config.gt, "gt")?;
    let pred_path = required(&config.pred, "pred")?;
    let out_dir = required(&config.out, "out")?;
    let gt = load_mask(gt_path, None).with_context(|| format!("loading {}", gt_path.display()))?;
    let pred = load_grid(pred_path, None).with_context(|| format!("loading {}", pred_path.display()))?;
    let catalog = match load_catalog(config)? {
        Some(c) => c,
        None => {
            let mut labels = gt.present_labels();
            if let GridData::Labels(p) = &pred {
                labels.extend(p.present_labels());
            }
            ClassCatalog::from_labels(labels)
        }
    };
    let pred = hard_labels(pred, &catalog, config.probability_threshold)?;
    let gt = slice_2d(&gt, config.slice)?;
    let pred = slice_2d(&pred, config.slice)?;
    let base = match &config.base {
        Some(p) => {
            let img = load_mask(p, None).with_context(|| format!("loading base image {}", p.display()))?;
            Some(GrayImage::from_intensities(&img)?)
        }
        None => None,
    };
    let stem = gt_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("sample")
        .to_string();
    for (name, bytes) in pair_images(&stem, base.as_ref(), &gt, &pred, &catalog, config.alpha, true)? {
        let path = out_dir.join(&name);
        write_file(&path, &bytes)?;
        writeln!(console.out, "wrote {}", path.display())?;
    }
    Ok(EXIT_OK)
}
