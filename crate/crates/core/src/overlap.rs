//! Confusion-matrix metrics: IoU, DSC, sensitivity, specificity, accuracy,
//! single-threshold AUC and Cohen's kappa, plus a threshold-sweep ROC curve
//! for probability maps.
//!
//! All arithmetic runs in `f64`; counts are converted once.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::confusion::ConfusionCounts;
use crate::error::{Error, Result};
use crate::mask::{ClassId, LabelMask, ProbabilityGrid};
use crate::score::{Score, UndefinedReason};

/// What IoU and DSC return when ground truth and prediction are both empty.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptyPolicy {
    /// Both empty counts as perfect agreement (1.0).
    #[default]
    ScoreOne,
    /// Both empty is `UNDEFINED(EMPTY_BOTH)`.
    Undefined,
}

impl EmptyPolicy {
    fn empty_both(self) -> Score {
        match self {
            EmptyPolicy::ScoreOne => Score::Defined(1.0),
            EmptyPolicy::Undefined => Score::Undefined(UndefinedReason::EmptyBoth),
        }
    }
}

impl FromStr for EmptyPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "score_one" => Ok(EmptyPolicy::ScoreOne),
            "undefined" => Ok(EmptyPolicy::Undefined),
            other => Err(format!("unknown empty policy `{other}` (score_one|undefined)")),
        }
    }
}

fn cells(c: &ConfusionCounts) -> (f64, f64, f64, f64) {
    (c.tp as f64, c.fp as f64, c.tn as f64, c.fn_ as f64)
}

/// `TP / (TP + FP + FN)`
pub fn iou(c: &ConfusionCounts, policy: EmptyPolicy) -> Score {
    let (tp, fp, _, fn_) = cells(c);
    let den = tp + fp + fn_;
    if den == 0.0 {
        return policy.empty_both();
    }
    Score::Defined(tp / den)
}

/// `2TP / (2TP + FP + FN)`
pub fn dsc(c: &ConfusionCounts, policy: EmptyPolicy) -> Score {
    let (tp, fp, _, fn_) = cells(c);
    let den = 2.0 * tp + fp + fn_;
    if den == 0.0 {
        return policy.empty_both();
    }
    Score::Defined(2.0 * tp / den)
}

/// `TP / (TP + FN)`, the true positive rate.
pub fn sensitivity(c: &ConfusionCounts) -> Score {
    let (tp, _, _, fn_) = cells(c);
    Score::ratio(tp, tp + fn_, UndefinedReason::NoPositivesInGt)
}

/// `TN / (TN + FP)`, the true negative rate.
pub fn specificity(c: &ConfusionCounts) -> Score {
    let (_, fp, tn, _) = cells(c);
    Score::ratio(tn, tn + fp, UndefinedReason::NoNegativesInGt)
}

/// `(TP + TN) / N`. Counts from a mask pair always have `N > 0`.
pub fn accuracy(c: &ConfusionCounts) -> f64 {
    let (tp, fp, tn, fn_) = cells(c);
    debug_assert!(c.total() > 0, "accuracy of an empty confusion table");
    (tp + tn) / (tp + tn + fn_ + fp)
}

/// Area of the single-point ROC trapezoid:
/// `1 - (FP/(FP+TN) + FN/(FN+TP)) / 2`.
pub fn auc_single(c: &ConfusionCounts) -> Score {
    let (tp, fp, tn, fn_) = cells(c);
    if fp + tn == 0.0 {
        return Score::Undefined(UndefinedReason::NoNegativesInGt);
    }
    if fn_ + tp == 0.0 {
        return Score::Undefined(UndefinedReason::NoPositivesInGt);
    }
    Score::Defined(1.0 - 0.5 * (fp / (fp + tn) + fn_ / (fn_ + tp)))
}

/// Expected agreement by chance, in elements:
/// `((TN+FN)(TN+FP) + (FP+TP)(FN+TP)) / N`.
pub fn chance_agreement(c: &ConfusionCounts) -> f64 {
    let (tp, fp, tn, fn_) = cells(c);
    let n = tp + tn + fn_ + fp;
    ((tn + fn_) * (tn + fp) + (fp + tp) * (fn_ + tp)) / n
}

/// Cohen's kappa: `((TP + TN) - fc) / (N - fc)`.
///
/// Numerator and denominator are multiplied through by `N` and formed in
/// exact integer arithmetic, so the degenerate case `N - fc = 0` is detected
/// exactly and scaling every cell by the same factor leaves the result
/// bit-identical.
pub fn kappa(c: &ConfusionCounts) -> Score {
    let [tp, fp, tn, fn_] = [c.tp, c.fp, c.tn, c.fn_].map(|v| v as i128);
    let n = tp + fp + tn + fn_;
    let chance = (tn + fn_) * (tn + fp) + (fp + tp) * (fn_ + tp);
    let den = n * n - chance;
    if den == 0 {
        return Score::Undefined(UndefinedReason::DegenerateMarginals);
    }
    let num = n * (tp + tn) - chance;
    Score::Defined(num as f64 / den as f64)
}

/// The confusion-derived metric panel of one class on one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub iou: Score,
    pub dsc: Score,
    pub sensitivity: Score,
    pub specificity: Score,
    pub accuracy: Score,
    pub auc: Score,
    pub kappa: Score,
}

impl MetricSet {
    pub fn get(&self, metric: Metric) -> Option<Score> {
        match metric {
            Metric::Iou => Some(self.iou),
            Metric::Dsc => Some(self.dsc),
            Metric::Sensitivity => Some(self.sensitivity),
            Metric::Specificity => Some(self.specificity),
            Metric::Accuracy => Some(self.accuracy),
            Metric::Auc => Some(self.auc),
            Metric::Kappa => Some(self.kappa),
            Metric::Ahd => None,
        }
    }
}

pub fn metric_set(c: &ConfusionCounts, policy: EmptyPolicy) -> MetricSet {
    MetricSet {
        iou: iou(c, policy),
        dsc: dsc(c, policy),
        sensitivity: sensitivity(c),
        specificity: specificity(c),
        accuracy: if c.total() == 0 {
            Score::Undefined(UndefinedReason::EmptyBoth)
        } else {
            Score::Defined(accuracy(c))
        },
        auc: auc_single(c),
        kappa: kappa(c),
    }
}

/// Metric selector. DSC comes first: it is the primary metric everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Dsc,
    Iou,
    Sensitivity,
    Specificity,
    Accuracy,
    Auc,
    Kappa,
    Ahd,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::Dsc,
        Metric::Iou,
        Metric::Sensitivity,
        Metric::Specificity,
        Metric::Accuracy,
        Metric::Auc,
        Metric::Kappa,
        Metric::Ahd,
    ];

    pub const CONFUSION: [Metric; 7] = [
        Metric::Dsc,
        Metric::Iou,
        Metric::Sensitivity,
        Metric::Specificity,
        Metric::Accuracy,
        Metric::Auc,
        Metric::Kappa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Dsc => "dsc",
            Metric::Iou => "iou",
            Metric::Sensitivity => "sensitivity",
            Metric::Specificity => "specificity",
            Metric::Accuracy => "accuracy",
            Metric::Auc => "auc",
            Metric::Kappa => "kappa",
            Metric::Ahd => "ahd",
        }
    }

    /// Whether larger values mean better agreement.
    pub fn higher_is_better(self) -> bool {
        !matches!(self, Metric::Ahd)
    }

    /// Whether the formula reads the TN cell. Pooling TN over one-vs-rest
    /// classes counts each element once per class.
    pub fn uses_true_negatives(self) -> bool {
        matches!(
            self,
            Metric::Specificity | Metric::Accuracy | Metric::Auc | Metric::Kappa
        )
    }

    /// Value range used for histograms; AHD is unbounded above.
    pub fn natural_range(self) -> Option<(f64, f64)> {
        match self {
            Metric::Kappa => Some((-1.0, 1.0)),
            Metric::Ahd => None,
            _ => Some((0.0, 1.0)),
        }
    }

    /// Evaluates a confusion metric; `None` for AHD.
    pub fn from_counts(self, c: &ConfusionCounts, policy: EmptyPolicy) -> Option<Score> {
        metric_set(c, policy).get(self)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

// ---------------------------------------------------------------------------
// ROC
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
}

/// `n` evenly spaced thresholds from 1 down to 0 (`n = 1` gives `[0.5]`).
pub fn default_thresholds(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..n).rev().map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

/// ROC points of a probability map against one ground-truth class.
///
/// Each threshold `t` binarizes `prob >= t`. Points come out in descending
/// threshold order; exact duplicate thresholds are collapsed.
pub fn roc_curve(
    gt: &LabelMask,
    prob: &ProbabilityGrid,
    positive_class: ClassId,
    thresholds: &[f64],
) -> Result<Vec<RocPoint>> {
    if gt.shape() != prob.shape() {
        return Err(Error::ShapeMismatch(gt.shape().to_vec(), prob.shape().to_vec()));
    }
    if thresholds.is_empty() {
        return Err(Error::InvalidThresholds("no thresholds".into()));
    }
    if let Some(t) = thresholds.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::InvalidThresholds(format!("{t} is outside [0, 1]")));
    }
    if let Some((index, value)) = prob.first_out_of_range() {
        return Err(Error::ProbabilityOutOfRange { index, value });
    }

    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (&label, &p) in gt.labels().iter().zip(prob.values()) {
        if label == positive_class {
            pos.push(p as f64);
        } else {
            neg.push(p as f64);
        }
    }
    if pos.is_empty() {
        return Err(Error::DegenerateRoc("positives"));
    }
    if neg.is_empty() {
        return Err(Error::DegenerateRoc("negatives"));
    }
    pos.sort_by(f64::total_cmp);
    neg.sort_by(f64::total_cmp);

    let mut ts = thresholds.to_vec();
    ts.sort_by(|a, b| b.total_cmp(a));
    ts.dedup();

    // Elements with p >= t are the tail after the partition point.
    let at_or_above = |sorted: &[f64], t: f64| sorted.len() - sorted.partition_point(|&p| p < t);
    Ok(ts
        .into_iter()
        .map(|t| {
            let tp = at_or_above(&pos, t) as f64;
            let fp = at_or_above(&neg, t) as f64;
            RocPoint {
                threshold: t,
                tpr: tp / pos.len() as f64,
                fpr: fp / neg.len() as f64,
            }
        })
        .collect())
}

/// Trapezoidal area under ROC points, anchored at (0,0) and (1,1).
pub fn auc_trapezoid(points: &[RocPoint]) -> f64 {
    let mut xy: Vec<(f64, f64)> = Vec::with_capacity(points.len() + 2);
    xy.push((0.0, 0.0));
    xy.extend(points.iter().map(|p| (p.fpr, p.tpr)));
    xy.push((1.0, 1.0));
    xy.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    xy.windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) * 0.5)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FIXTURE: ConfusionCounts = ConfusionCounts::new(2, 2, 10, 2);
    const TOL: f64 = 1e-12;

    fn close(a: Score, b: f64) -> bool {
        (a.unwrap() - b).abs() < TOL
    }

    #[test]
    fn fixture_panel() {
        let m = metric_set(&FIXTURE, EmptyPolicy::ScoreOne);
        assert!(close(m.iou, 1.0 / 3.0));
        assert!(close(m.dsc, 0.5));
        assert!(close(m.sensitivity, 0.5));
        assert!(close(m.specificity, 5.0 / 6.0));
        assert!(close(m.accuracy, 0.75));
        assert!(close(m.auc, 2.0 / 3.0));
        assert!(close(m.kappa, 1.0 / 3.0));
        assert_eq!(chance_agreement(&FIXTURE), 10.0);
    }

    #[test]
    fn empty_both_policy() {
        let c = ConfusionCounts::new(0, 0, 9, 0);
        assert_eq!(iou(&c, EmptyPolicy::ScoreOne), Score::Defined(1.0));
        assert_eq!(dsc(&c, EmptyPolicy::ScoreOne), Score::Defined(1.0));
        let u = Score::Undefined(UndefinedReason::EmptyBoth);
        assert_eq!(iou(&c, EmptyPolicy::Undefined), u);
        assert_eq!(dsc(&c, EmptyPolicy::Undefined), u);

        let m = metric_set(&c, EmptyPolicy::ScoreOne);
        assert_eq!(m.sensitivity, Score::Undefined(UndefinedReason::NoPositivesInGt));
        assert_eq!(m.specificity, Score::Defined(1.0));
        assert_eq!(m.kappa, Score::Undefined(UndefinedReason::DegenerateMarginals));
    }

    #[test]
    fn simple_values() {
        assert_eq!(iou(&ConfusionCounts::new(7, 0, 3, 0), EmptyPolicy::Undefined), Score::Defined(1.0));
        assert_eq!(dsc(&ConfusionCounts::new(0, 3, 3, 2), EmptyPolicy::ScoreOne), Score::Defined(0.0));
        assert_eq!(sensitivity(&ConfusionCounts::new(4, 1, 0, 0)), Score::Defined(1.0));
        assert_eq!(specificity(&ConfusionCounts::new(3, 0, 5, 2)), Score::Defined(1.0));
        assert_eq!(specificity(&ConfusionCounts::new(3, 5, 0, 0)), Score::Defined(0.0));
        assert_eq!(
            specificity(&ConfusionCounts::new(3, 0, 0, 0)),
            Score::Undefined(UndefinedReason::NoNegativesInGt)
        );
    }

    #[test]
    fn accuracy_inflation() {
        // 5% foreground, empty prediction.
        let c = ConfusionCounts::new(0, 0, 95, 5);
        assert_eq!(accuracy(&c), 0.95);
    }

    #[test]
    fn auc_single_cases() {
        assert_eq!(auc_single(&ConfusionCounts::new(3, 0, 4, 0)), Score::Defined(1.0));
        assert_eq!(auc_single(&ConfusionCounts::new(5, 5, 5, 5)), Score::Defined(0.5));
        assert!(close(auc_single(&FIXTURE), 2.0 / 3.0));
        assert!(!auc_single(&ConfusionCounts::new(0, 2, 2, 0)).is_defined());
    }

    #[test]
    fn kappa_cases() {
        let c = ConfusionCounts::new(40, 10, 40, 10);
        assert_eq!(chance_agreement(&c), 50.0);
        assert!(close(kappa(&c), 0.6));
        assert_eq!(
            kappa(&ConfusionCounts::new(9, 0, 0, 0)),
            Score::Undefined(UndefinedReason::DegenerateMarginals)
        );
        let identical = ConfusionCounts::new(3, 0, 6, 0);
        assert!(close(kappa(&identical), 1.0));
    }

    fn grid(values: &[f32]) -> ProbabilityGrid {
        ProbabilityGrid::new(vec![1, values.len()], values.to_vec()).unwrap()
    }

    #[test]
    fn roc_examples() {
        let gt = LabelMask::new(vec![1, 4], vec![0, 0, 1, 1]).unwrap();

        let perfect = roc_curve(&gt, &grid(&[0.0, 0.0, 1.0, 1.0]), 1, &[0.5]).unwrap();
        assert_eq!((perfect[0].tpr, perfect[0].fpr), (1.0, 0.0));

        let flat = roc_curve(&gt, &grid(&[0.5; 4]), 1, &[0.4, 0.6]).unwrap();
        assert_eq!(flat.len(), 2);
        assert_eq!((flat[0].threshold, flat[0].tpr, flat[0].fpr), (0.6, 0.0, 0.0));
        assert_eq!((flat[1].threshold, flat[1].tpr, flat[1].fpr), (0.4, 1.0, 1.0));

        let mixed = roc_curve(&gt, &grid(&[0.1, 0.6, 0.4, 0.9]), 1, &[0.5]).unwrap();
        assert_eq!((mixed[0].tpr, mixed[0].fpr), (0.5, 0.5));
    }

    #[test]
    fn roc_errors() {
        let gt = LabelMask::new(vec![1, 2], vec![0, 1]).unwrap();
        assert!(matches!(
            roc_curve(&gt, &grid(&[0.2, 1.5]), 1, &[0.5]),
            Err(Error::ProbabilityOutOfRange { index: 1, .. })
        ));
        assert!(matches!(
            roc_curve(&gt, &grid(&[0.2, 0.5, 0.1]), 1, &[0.5]),
            Err(Error::ShapeMismatch(..))
        ));
        assert!(roc_curve(&gt, &grid(&[0.2, 0.5]), 1, &[]).is_err());
        assert!(roc_curve(&gt, &grid(&[0.2, 0.5]), 1, &[1.2]).is_err());
        let all_bg = LabelMask::new(vec![1, 2], vec![0, 0]).unwrap();
        assert!(matches!(
            roc_curve(&all_bg, &grid(&[0.2, 0.5]), 1, &[0.5]),
            Err(Error::DegenerateRoc("positives"))
        ));
    }

    #[test]
    fn trapezoid_examples() {
        let p = |tpr, fpr| RocPoint { threshold: 0.5, tpr, fpr };
        assert_eq!(auc_trapezoid(&[p(1.0, 0.0)]), 1.0);
        assert_eq!(auc_trapezoid(&[p(0.5, 0.5)]), 0.5);
        assert!((auc_trapezoid(&[p(0.2, 0.2), p(0.7, 0.7), p(0.4, 0.4)]) - 0.5).abs() < TOL);
    }

    #[test]
    fn default_threshold_grid() {
        let t = default_thresholds(101);
        assert_eq!(t.len(), 101);
        assert_eq!(t[0], 1.0);
        assert_eq!(t[100], 0.0);
        assert_eq!(t[50], 0.5);
    }

    fn arb_counts() -> impl Strategy<Value = ConfusionCounts> {
        (0u64..500, 0u64..500, 0u64..500, 0u64..500)
            .prop_filter("non-empty", |(a, b, c, d)| a + b + c + d > 0)
            .prop_map(|(tp, fp, tn, fn_)| ConfusionCounts::new(tp, fp, tn, fn_))
    }

    proptest! {
        #[test]
        fn ranges_hold(c in arb_counts()) {
            let m = metric_set(&c, EmptyPolicy::ScoreOne);
            for s in [m.iou, m.dsc, m.sensitivity, m.specificity, m.accuracy, m.auc] {
                if let Score::Defined(v) = s {
                    prop_assert!((0.0..=1.0).contains(&v), "{v}");
                }
            }
            if let Score::Defined(k) = m.kappa {
                prop_assert!((-1.0..=1.0).contains(&k), "{k}");
            }
        }

        #[test]
        fn iou_not_above_dsc(c in arb_counts()) {
            let (i, d) = (iou(&c, EmptyPolicy::ScoreOne).unwrap(), dsc(&c, EmptyPolicy::ScoreOne).unwrap());
            prop_assert!(i <= d);
            if i == d {
                prop_assert!(d == 0.0 || d == 1.0);
            }
        }

        #[test]
        fn more_tp_never_hurts(c in arb_counts(), extra in 1u64..100) {
            let bumped = ConfusionCounts::new(c.tp + extra, c.fp, c.tn, c.fn_);
            let p = EmptyPolicy::ScoreOne;
            prop_assert!(dsc(&bumped, p).unwrap() >= dsc(&c, p).unwrap());
            prop_assert!(iou(&bumped, p).unwrap() >= iou(&c, p).unwrap());
            prop_assert!(accuracy(&bumped) >= accuracy(&c));
            if let Score::Defined(s) = sensitivity(&c) {
                prop_assert!(sensitivity(&bumped).unwrap() >= s);
            }
        }

        #[test]
        fn sensitivity_is_complement_specificity(c in arb_counts()) {
            prop_assert_eq!(sensitivity(&c), specificity(&c.complemented()));
        }

        #[test]
        fn single_threshold_curve_matches_auc_single(
            labels in proptest::collection::vec(0u16..2, 2..60),
            probs in proptest::collection::vec(0.0f32..=1.0, 60),
            t32 in 0.0f32..=1.0,
        ) {
            let t = t32 as f64;
            prop_assume!(labels.contains(&0) && labels.contains(&1));
            let n = labels.len();
            let gt = LabelMask::new(vec![1, n], labels).unwrap();
            let prob = ProbabilityGrid::new(vec![1, n], probs[..n].to_vec()).unwrap();
            let pts = roc_curve(&gt, &prob, 1, &[t]).unwrap();
            let hard = prob.binarize(t32, 1, 0);
            let c = crate::confusion::confuse_binary(&gt, &hard, 1).unwrap();
            prop_assert!((auc_trapezoid(&pts) - auc_single(&c).unwrap()).abs() < 1e-12);
        }
    }
}
