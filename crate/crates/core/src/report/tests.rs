use super::lint::{RuleId, Severity};
use super::*;
use crate::mask::ProbabilityGrid;

fn mask(fg: &[usize]) -> LabelMask {
    let mut labels = vec![0; 16];
    for &i in fg {
        labels[i] = 1;
    }
    LabelMask::new(vec![4, 4], labels).unwrap()
}

fn sample(id: &str, gt: LabelMask, pred: LabelMask) -> (String, LoadedSample) {
    (id.to_string(), Ok((gt, GridData::Labels(pred))))
}

fn two_pair_report() -> DatasetReport {
    let samples = vec![
        sample("b", mask(&[0, 1]), mask(&[1, 2])),
        sample("a", mask(&[0, 1]), mask(&[0, 1])),
    ];
    evaluate_loaded(samples, None, &ReportOptions::default()).unwrap()
}

#[test]
fn two_pair_distribution() {
    let r = two_pair_report();
    assert_eq!(r.samples[0].sample_id, "a");
    assert_eq!(r.samples[0].macro_score(Metric::Dsc), Score::Defined(1.0));
    assert_eq!(r.samples[1].macro_score(Metric::Dsc), Score::Defined(0.5));
    let stats = r.aggregates.macro_avg[&Metric::Dsc].stats.unwrap();
    assert_eq!((stats.mean, stats.median, stats.min, stats.max), (0.75, 0.75, 0.5, 1.0));
    let per_class = r.aggregates.per_class[&1][&Metric::Dsc].stats.unwrap();
    assert_eq!(per_class, stats);
    assert_eq!(r.worst_k[&Metric::Dsc][0].sample_id, "b");
    assert_eq!(r.worst_k[&Metric::Ahd][0].sample_id, "b");
    assert_eq!(r.aggregates.per_class.keys().copied().collect::<Vec<_>>(), vec![1]);
}

#[test]
fn json_round_trip_recomputes_identically() {
    let r = two_pair_report();
    let text = r.to_json().unwrap();
    let mut back = DatasetReport::from_json(&text).unwrap();
    assert_eq!(back, r);
    back.aggregates = Aggregates::default();
    back.worst_k.clear();
    back.recompute().unwrap();
    assert_eq!(back.to_json().unwrap(), text);
}

#[test]
fn input_order_does_not_matter() {
    let a = two_pair_report().to_json().unwrap();
    let samples = vec![
        sample("a", mask(&[0, 1]), mask(&[0, 1])),
        sample("b", mask(&[0, 1]), mask(&[1, 2])),
    ];
    let b = evaluate_loaded(samples, None, &ReportOptions::default())
        .unwrap()
        .to_json()
        .unwrap();
    assert_eq!(a, b);
}

#[test]
fn failures_are_flagged_not_fatal() {
    let samples = vec![
        sample("ok", mask(&[0]), mask(&[0])),
        ("missing".to_string(), Err((SampleFlag::MissingPrediction, "none".to_string()))),
        (
            "shape".to_string(),
            Ok((mask(&[0]), GridData::Labels(LabelMask::filled(vec![2, 2], 0).unwrap()))),
        ),
        sample("empty", mask(&[]), mask(&[])),
    ];
    let r = evaluate_loaded(samples, None, &ReportOptions::default()).unwrap();
    let by_id: BTreeMap<&str, &SampleResult> = r.samples.iter().map(|s| (s.sample_id.as_str(), s)).collect();
    assert_eq!(by_id["missing"].flags, vec![SampleFlag::MissingPrediction]);
    assert_eq!(by_id["shape"].flags, vec![SampleFlag::ShapeMismatch]);
    assert_eq!(by_id["shape"].status, SampleStatus::Failed);
    assert_eq!(by_id["empty"].flags, vec![SampleFlag::EmptyGt, SampleFlag::EmptyPred]);
    assert_eq!(by_id["empty"].macro_score(Metric::Dsc), Score::Defined(1.0));
    assert_eq!(
        by_id["empty"].macro_score(Metric::Sensitivity),
        Score::Undefined(UndefinedReason::NoEligibleClasses)
    );
    assert_eq!((r.aggregates.n_samples, r.aggregates.n_failed), (4, 2));
    let sens = &r.aggregates.macro_avg[&Metric::Sensitivity];
    assert_eq!((sens.n_defined, sens.n_undefined), (1, 1));
    assert_eq!(sens.undefined[&UndefinedReason::NoEligibleClasses], 1);
}

#[test]
fn dataset_level_errors() {
    let opts = ReportOptions::default();
    assert!(matches!(evaluate_loaded(vec![], None, &opts), Err(Error::NoPairs)));
    let dup = vec![sample("x", mask(&[0]), mask(&[0])), sample("x", mask(&[1]), mask(&[1]))];
    assert!(matches!(evaluate_loaded(dup, None, &opts), Err(Error::DuplicateSample(_))));
    let all_bad = vec![("x".to_string(), Err((SampleFlag::LoadFailed, "bad".to_string())))];
    assert!(matches!(evaluate_loaded(all_bad, None, &opts), Err(Error::AllSamplesFailed)));
    let wrong = ReportOptions { macro_policy: AveragingPolicy::micro_default(), ..Default::default() };
    let one = vec![sample("x", mask(&[0]), mask(&[0]))];
    assert!(matches!(
        evaluate_loaded(one, None, &wrong),
        Err(Error::WrongAveragingMode { .. })
    ));
}

#[test]
fn probability_predictions_get_roc_auc() {
    let gt = mask(&[0, 1, 2]);
    let mut probs = vec![0.1f32; 16];
    probs[0] = 0.9;
    probs[1] = 0.8;
    probs[2] = 0.3;
    probs[5] = 0.6;
    let grid = ProbabilityGrid::new(vec![4, 4], probs).unwrap();
    let catalog = ClassCatalog::binary(1);
    let s = evaluate_sample("p", &gt, &GridData::Probabilities(grid), &catalog, &ReportOptions::default()).unwrap();
    let fg = &s.per_class[&1];
    assert_eq!(fg.counts.tp, 2);
    assert_eq!(fg.counts.fp, 1);
    // Positives score {0.9, 0.8, 0.3}; negatives {0.6, 0.1 x 12}. Of the 39
    // positive/negative pairs, 0.3 loses to 0.6: AUC = 38/39.
    let auc = fg.roc_auc.unwrap().unwrap();
    assert!((auc - 38.0 / 39.0).abs() < 1e-12, "{auc}");

    let multi = ClassCatalog::from_labels([1, 2]);
    let grid = ProbabilityGrid::new(vec![4, 4], vec![0.5; 16]).unwrap();
    let s = evaluate_sample("p", &gt, &GridData::Probabilities(grid), &multi, &ReportOptions::default()).unwrap();
    assert_eq!(s.flags, vec![SampleFlag::UnsupportedProbabilityMap]);
}

#[test]
fn spacing_mismatch_is_a_flag() {
    let gt = mask(&[0, 5]);
    let pred = mask(&[0, 5]).respaced(vec![1.0, 2.0]).unwrap();
    let s = evaluate_sample("s", &gt, &GridData::Labels(pred), &ClassCatalog::binary(1), &ReportOptions::default())
        .unwrap();
    assert_eq!(s.flags, vec![SampleFlag::SpacingMismatch]);
    assert!(s.is_ok());
}

#[test]
fn csv_layout() {
    let r = two_pair_report();
    let mut out = Vec::new();
    r.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
    assert_eq!(lines.next().unwrap(), "a,1,class_1,1.0,1.0,1.0,1.0,1.0,1.0,1.0,0.0,");
    assert!(lines.next().unwrap().starts_with("b,1,class_1,0.33333333333333331,0.5,"));
    assert!(lines.next().is_none());
}

#[test]
fn histogram_edges_follow_metric_range() {
    let r = two_pair_report();
    let dsc = r.aggregates.macro_avg[&Metric::Dsc].histogram.as_ref().unwrap();
    assert_eq!((dsc.lo(), dsc.hi(), dsc.counts.len()), (0.0, 1.0, 10));
    let kappa = r.aggregates.macro_avg[&Metric::Kappa].histogram.as_ref().unwrap();
    assert_eq!((kappa.lo(), kappa.hi()), (-1.0, 1.0));
    let ahd = r.aggregates.macro_avg[&Metric::Ahd].histogram.as_ref().unwrap();
    assert_eq!(ahd.lo(), 0.0);
    assert_eq!(ahd.hi(), r.aggregates.macro_avg[&Metric::Ahd].stats.unwrap().max);
}

#[test]
fn best_k_is_best_first() {
    let opts = ReportOptions { best_k: 2, worst_k: 1, ..Default::default() };
    let samples = vec![
        sample("a", mask(&[0, 1]), mask(&[0, 1])),
        sample("b", mask(&[0, 1]), mask(&[1, 2])),
        sample("c", mask(&[0, 1]), mask(&[0, 1])),
    ];
    let r = evaluate_loaded(samples, None, &opts).unwrap();
    let ids = |v: &Vec<RankedSample>| v.iter().map(|s| s.sample_id.clone()).collect::<Vec<_>>();
    assert_eq!(ids(&r.best_k[&Metric::Dsc]), vec!["a", "c"]);
    assert_eq!(ids(&r.worst_k[&Metric::Dsc]), vec!["b"]);
    assert_eq!(ids(&r.best_k[&Metric::Ahd]), vec!["a", "c"]);
}

fn rules(report: &DatasetReport) -> Vec<(RuleId, Severity)> {
    lint_report(report).into_iter().map(|f| (f.rule, f.severity)).collect()
}

#[test]
fn lint_accuracy_only() {
    let opts = ReportOptions { metrics: vec![Metric::Accuracy], ..Default::default() };
    let samples = vec![sample("a", mask(&[0, 1]), mask(&[0, 1]))];
    let mut r = evaluate_loaded(samples, None, &opts).unwrap();
    r.visualizations.push("x.png".into());
    assert_eq!(
        rules(&r),
        vec![(RuleId::G1, Severity::Error), (RuleId::G2, Severity::Error)]
    );
}

#[test]
fn lint_defaults_only_note_missing_visuals() {
    let mut r = two_pair_report();
    assert_eq!(rules(&r), vec![(RuleId::G8, Severity::Info)]);
    r.visualizations.push("x.png".into());
    assert!(rules(&r).is_empty());
}
