//! Micro and macro averaging over classes, and the per-class report of one
//! sample.
//!
//! Macro averaging takes the mean of per-class scores. Micro averaging sums
//! the one-vs-rest confusion cells over classes and applies the metric once.
//! The background class is excluded from both unless the policy says
//! otherwise.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::confusion::{confuse, ConfusionCounts};
use crate::distance::distance_summary;
use crate::error::{Error, Result};
use crate::mask::{shape_compatible, ClassCatalog, ClassId, LabelMask};
use crate::overlap::{metric_set, EmptyPolicy, Metric, MetricSet};
use crate::score::{Score, UndefinedReason};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AveragingMode {
    Micro,
    Macro,
}

impl AveragingMode {
    fn name(self) -> &'static str {
        match self {
            AveragingMode::Micro => "micro",
            AveragingMode::Macro => "macro",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UndefinedHandling {
    /// Leave undefined classes out of the mean and record them.
    #[default]
    Skip,
    /// Any undefined class makes the average undefined.
    Propagate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AveragingPolicy {
    pub mode: AveragingMode,
    pub include_background: bool,
    pub undefined_handling: UndefinedHandling,
}

impl AveragingPolicy {
    pub fn macro_default() -> Self {
        AveragingPolicy {
            mode: AveragingMode::Macro,
            include_background: false,
            undefined_handling: UndefinedHandling::Skip,
        }
    }

    pub fn micro_default() -> Self {
        AveragingPolicy {
            mode: AveragingMode::Micro,
            ..Self::macro_default()
        }
    }

    pub fn with_background(mut self, include: bool) -> Self {
        self.include_background = include;
        self
    }

    fn require(&self, mode: AveragingMode) -> Result<()> {
        if self.mode != mode {
            return Err(Error::WrongAveragingMode {
                required: mode.name(),
                found: self.mode.name(),
            });
        }
        Ok(())
    }

    fn eligible(&self, class: ClassId, background: Option<ClassId>) -> bool {
        self.include_background || Some(class) != background
    }
}

/// An averaged value with the classes that went into it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Averaged {
    pub value: Score,
    pub classes_used: Vec<ClassId>,
    /// Classes left out because their value was undefined.
    pub skipped: Vec<(ClassId, UndefinedReason)>,
    /// Set for micro averages of metrics that read pooled TN cells.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub pooled_one_vs_rest: bool,
}

/// Arithmetic mean of per-class values over eligible classes.
///
/// The mean is accumulated incrementally, so equal inputs average to exactly
/// that value.
pub fn macro_average(
    per_class: &BTreeMap<ClassId, Score>,
    background: Option<ClassId>,
    policy: &AveragingPolicy,
) -> Result<Averaged> {
    policy.require(AveragingMode::Macro)?;
    let mut used = Vec::new();
    let mut skipped = Vec::new();
    let mut mean = 0.0;
    for (&class, &score) in per_class {
        if !policy.eligible(class, background) {
            continue;
        }
        match score {
            Score::Defined(v) => {
                used.push(class);
                mean += (v - mean) / used.len() as f64;
            }
            Score::Undefined(r) => skipped.push((class, r)),
        }
    }
    let value = if policy.undefined_handling == UndefinedHandling::Propagate && !skipped.is_empty() {
        Score::Undefined(UndefinedReason::PropagatedUndefined)
    } else if used.is_empty() {
        Score::Undefined(UndefinedReason::NoEligibleClasses)
    } else {
        Score::Defined(mean)
    };
    Ok(Averaged {
        value,
        classes_used: used,
        skipped,
        pooled_one_vs_rest: false,
    })
}

/// Pools the confusion cells of eligible classes, then applies `metric` once.
/// AHD has no confusion form and yields `NO_ELIGIBLE_CLASSES`.
pub fn micro_average(
    per_class_counts: &BTreeMap<ClassId, ConfusionCounts>,
    background: Option<ClassId>,
    metric: Metric,
    empty_policy: EmptyPolicy,
    policy: &AveragingPolicy,
) -> Result<Averaged> {
    policy.require(AveragingMode::Micro)?;
    let used: Vec<ClassId> = per_class_counts
        .keys()
        .copied()
        .filter(|&c| policy.eligible(c, background))
        .collect();
    let pooled: ConfusionCounts = used.iter().map(|c| per_class_counts[c]).sum();
    let value = match metric.from_counts(&pooled, empty_policy) {
        Some(v) if !used.is_empty() => v,
        _ => Score::Undefined(UndefinedReason::NoEligibleClasses),
    };
    Ok(Averaged {
        value,
        classes_used: used,
        skipped: Vec::new(),
        pooled_one_vs_rest: metric.uses_true_negatives(),
    })
}

/// Options that change numbers in a per-class report.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub empty_policy: EmptyPolicy,
    /// Measure AHD on class surfaces instead of full regions.
    pub surface_only: bool,
    /// Also report the background class.
    pub report_background: bool,
}

/// Full metric panel of one class on one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassResult {
    pub counts: ConfusionCounts,
    pub metrics: MetricSet,
    pub ahd: Score,
    /// Area under the threshold-sweep ROC curve; only for probability maps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roc_auc: Option<Score>,
}

impl ClassResult {
    pub fn get(&self, metric: Metric) -> Score {
        match metric {
            Metric::Ahd => self.ahd,
            m => self.metrics.get(m).expect("confusion metric"),
        }
    }
}

/// Classes a report covers: foreground classes, plus background on request.
pub fn report_classes(catalog: &ClassCatalog, options: &EvalOptions) -> Vec<ClassId> {
    catalog
        .entries()
        .iter()
        .filter(|e| options.report_background || !e.is_background)
        .map(|e| e.class_id)
        .collect()
}

/// Per-class metrics and AHD for one ground-truth/prediction pair.
///
/// Spacing mismatches are not an error here; distances use the ground
/// truth's spacing. Callers flag the mismatch via
/// [`spacing_matches`](crate::mask::spacing_matches).
pub fn per_class_report(
    gt: &LabelMask,
    pred: &LabelMask,
    catalog: &ClassCatalog,
    options: &EvalOptions,
) -> Result<BTreeMap<ClassId, ClassResult>> {
    if !shape_compatible(gt, pred) {
        return Err(Error::ShapeMismatch(gt.shape().to_vec(), pred.shape().to_vec()));
    }
    let classes = report_classes(catalog, options);
    if classes.is_empty() {
        return Err(Error::EmptyClassList);
    }
    let table = confuse(gt, pred, &classes)?;
    classes
        .iter()
        .map(|&class| {
            let counts = table.per_class[&class];
            let ahd = match distance_summary(gt, pred, class, options.surface_only)? {
                Ok(s) => Score::Defined(s.ahd()),
                Err(r) => Score::Undefined(r),
            };
            Ok((
                class,
                ClassResult {
                    counts,
                    metrics: metric_set(&counts, options.empty_policy),
                    ahd,
                    roc_auc: None,
                },
            ))
        })
        .collect()
}
