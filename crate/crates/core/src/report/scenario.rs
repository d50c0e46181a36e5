//! Synthetic baseline predictions for a ground truth.
//!
//! Three reference predictions expose how each metric treats trivial
//! segmenters: predict nothing, predict everything, or predict each element
//! as foreground with probability `p`. Random predictions use
//! `ChaCha8Rng::seed_from_u64(seed)` and draw one `f64` per element in
//! row-major order, so a seed reproduces the same mask on every platform.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aggregate::{per_class_report, ClassResult, EvalOptions};
use crate::error::{Error, Result};
use crate::mask::{ClassCatalog, ClassId, LabelMask};

/// Name of the random generator pinned for random scenarios.
pub const SCENARIO_PRNG: &str = "rand_chacha::ChaCha8Rng::seed_from_u64";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ScenarioKind {
    NoSegmentation,
    FullSegmentation,
    Random { seed: u64, p: f64 },
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioKind::NoSegmentation => f.write_str("none"),
            ScenarioKind::FullSegmentation => f.write_str("full"),
            ScenarioKind::Random { seed, p } => write!(f, "random:{seed}:{p}"),
        }
    }
}

/// Parses `none`, `full`, `random:SEED` or `random:SEED:P` (default `p = 0.5`).
impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let kind = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some("none"), None, ..) => ScenarioKind::NoSegmentation,
            (Some("full"), None, ..) => ScenarioKind::FullSegmentation,
            (Some("random"), None, ..) => return Err(Error::MissingSeed),
            (Some("random"), Some(seed), p, None) => {
                let seed = seed
                    .parse()
                    .map_err(|_| Error::InvalidScenario(format!("bad seed in `{s}`")))?;
                let p = match p {
                    Some(p) => p
                        .parse()
                        .map_err(|_| Error::InvalidScenario(format!("bad probability in `{s}`")))?,
                    None => 0.5,
                };
                ScenarioKind::Random { seed, p }
            }
            _ => return Err(Error::InvalidScenario(format!("unknown scenario `{s}`"))),
        };
        Ok(kind)
    }
}

/// Foreground class of a binary ground truth: its smallest nonzero label,
/// or 1 when the mask is all background.
pub fn scenario_foreground(gt: &LabelMask) -> ClassId {
    gt.present_labels().into_iter().find(|&l| l != 0).unwrap_or(1)
}

/// Builds the scenario prediction with the ground truth's shape and spacing.
pub fn make_scenario(gt: &LabelMask, kind: ScenarioKind) -> Result<LabelMask> {
    let fg = scenario_foreground(gt);
    let shape = gt.shape().to_vec();
    let spacing = gt.spacing().to_vec();
    let labels = match kind {
        ScenarioKind::NoSegmentation => vec![0; gt.len()],
        ScenarioKind::FullSegmentation => vec![fg; gt.len()],
        ScenarioKind::Random { seed, p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidScenario(format!("p = {p} is outside [0, 1]")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..gt.len())
                .map(|_| if rng.random::<f64>() < p { fg } else { 0 })
                .collect()
        }
    };
    LabelMask::with_spacing(shape, labels, spacing)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario: ScenarioKind,
    pub class_id: ClassId,
    pub result: ClassResult,
}

/// Metric panel of the three scenarios on a binary ground truth.
pub fn scenario_panel(gt: &LabelMask, seed: u64, options: &EvalOptions) -> Result<Vec<ScenarioResult>> {
    let fg = scenario_foreground(gt);
    let catalog = ClassCatalog::binary(fg);
    let options = EvalOptions {
        report_background: false,
        ..*options
    };
    [
        ScenarioKind::NoSegmentation,
        ScenarioKind::FullSegmentation,
        ScenarioKind::Random { seed, p: 0.5 },
    ]
    .into_iter()
    .map(|kind| {
        let pred = make_scenario(gt, kind)?;
        let mut report = per_class_report(gt, &pred, &catalog, &options)?;
        Ok(ScenarioResult {
            scenario: kind,
            class_id: fg,
            result: report.remove(&fg).expect("foreground is reported"),
        })
    })
    .collect()
}
