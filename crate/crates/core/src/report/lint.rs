//! Reporting-guideline checks on a finished dataset report.
//!
//! | rule | severity | fires when |
//! |------|----------|------------|
//! | G1 | error | DSC is not among the reported metrics |
//! | G2 | error | accuracy is reported and DSC is absent or listed after it |
//! | G3 | warning | DSC is reported but IoU, sensitivity or specificity is not |
//! | G4 | error | multi-class catalog and an evaluated sample lacks a per-class entry for some foreground class |
//! | G5 | warning | the macro average includes the background class |
//! | G6 | warning | the aggregates carry no histogram |
//! | G7 | warning | no worst-case sample is listed |
//! | G8 | info | no visualization is referenced |

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{DatasetReport, SampleStatus};
use crate::overlap::Metric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleId {
    G1,
    G2,
    G3,
    G4,
    G5,
    G6,
    G7,
    G8,
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub rule: RuleId,
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}] {}", self.rule, self.severity, self.message)
    }
}

/// Runs every rule; findings come out in rule order.
pub fn lint_report(report: &DatasetReport) -> Vec<Finding> {
    let mut out = Vec::new();
    let mut push = |rule, severity, message: String| out.push(Finding { rule, severity, message });
    let metrics = &report.config_echo.options.metrics;
    let has = |m: Metric| metrics.contains(&m);

    if !has(Metric::Dsc) {
        push(RuleId::G1, Severity::Error, "DSC is not reported; report DSC as the primary metric".into());
    }
    let position = |m: Metric| metrics.iter().position(|&x| x == m);
    if let Some(acc) = position(Metric::Accuracy) {
        if position(Metric::Dsc).is_none_or(|dsc| dsc > acc) {
            push(
                RuleId::G2,
                Severity::Error,
                "accuracy is presented without or ahead of DSC; accuracy is dominated by true negatives".into(),
            );
        }
    }
    if has(Metric::Dsc) {
        let missing: Vec<&str> = [Metric::Iou, Metric::Sensitivity, Metric::Specificity]
            .into_iter()
            .filter(|&m| !has(m))
            .map(Metric::name)
            .collect();
        if !missing.is_empty() {
            push(
                RuleId::G3,
                Severity::Warning,
                format!("DSC is reported without {}", missing.join(", ")),
            );
        }
    }
    let catalog = &report.config_echo.catalog;
    if catalog.is_multiclass() {
        let fg = catalog.foreground_ids();
        let incomplete: Vec<&str> = report
            .samples
            .iter()
            .filter(|s| s.status == SampleStatus::Ok)
            .filter(|s| fg.iter().any(|c| !s.per_class.contains_key(c)))
            .map(|s| s.sample_id.as_str())
            .collect();
        if !incomplete.is_empty() {
            push(
                RuleId::G4,
                Severity::Error,
                format!(
                    "multi-class samples without per-class results: {}",
                    incomplete.join(", ")
                ),
            );
        }
    }
    if report.config_echo.options.macro_policy.include_background {
        push(
            RuleId::G5,
            Severity::Warning,
            "the macro average includes the background class".into(),
        );
    }
    let agg = &report.aggregates;
    let has_histogram = agg
        .per_class
        .values()
        .flat_map(|m| m.values())
        .chain(agg.macro_avg.values())
        .chain(agg.micro.values())
        .any(|d| d.histogram.is_some());
    if !has_histogram {
        push(
            RuleId::G6,
            Severity::Warning,
            "no metric distribution (histogram) is reported".into(),
        );
    }
    if report.worst_k.values().all(Vec::is_empty) {
        push(RuleId::G7, Severity::Warning, "no worst-case samples are listed".into());
    }
    if report.visualizations.is_empty() {
        push(RuleId::G8, Severity::Info, "no overlay or plot is referenced".into());
    }
    out
}

/// Whether any finding is an error.
pub fn has_errors(findings: &[Finding]) -> bool {
    findings.iter().any(|f| f.severity == Severity::Error)
}
