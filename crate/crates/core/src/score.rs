//! Metric values that may be undefined.
//!
//! A metric whose formula divides by zero is not reported as `NaN`; it carries
//! an [`UndefinedReason`] so that reports can explain every missing number.

use std::fmt;

use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

/// Why a metric could not be computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum UndefinedReason {
    /// Ground truth and prediction are both empty for the class (0/0 overlap).
    EmptyBoth,
    /// TP + FN = 0.
    NoPositivesInGt,
    /// TN + FP = 0.
    NoNegativesInGt,
    /// N - fc = 0 in the kappa denominator.
    DegenerateMarginals,
    /// Ground truth has no points of the class.
    EmptyGt,
    /// Prediction has no points of the class.
    EmptyPred,
    /// Averaging found no class to average over.
    NoEligibleClasses,
    /// Averaging ran in propagate mode and met an undefined class value.
    PropagatedUndefined,
    /// A distribution has no defined values.
    NoDefinedValues,
    /// The sample failed to load or evaluate.
    SampleFailed,
}

impl UndefinedReason {
    pub fn code(self) -> &'static str {
        match self {
            UndefinedReason::EmptyBoth => "EMPTY_BOTH",
            UndefinedReason::NoPositivesInGt => "NO_POSITIVES_IN_GT",
            UndefinedReason::NoNegativesInGt => "NO_NEGATIVES_IN_GT",
            UndefinedReason::DegenerateMarginals => "DEGENERATE_MARGINALS",
            UndefinedReason::EmptyGt => "EMPTY_GT",
            UndefinedReason::EmptyPred => "EMPTY_PRED",
            UndefinedReason::NoEligibleClasses => "NO_ELIGIBLE_CLASSES",
            UndefinedReason::PropagatedUndefined => "PROPAGATED_UNDEFINED",
            UndefinedReason::NoDefinedValues => "NO_DEFINED_VALUES",
            UndefinedReason::SampleFailed => "SAMPLE_FAILED",
        }
    }
}

impl fmt::Display for UndefinedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// A real metric value or an explicit undefined marker.
///
/// Serializes as a bare JSON number, or as `{"undefined": "<REASON>"}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Score {
    Defined(f64),
    Undefined(UndefinedReason),
}

impl Score {
    pub fn value(self) -> Option<f64> {
        match self {
            Score::Defined(v) => Some(v),
            Score::Undefined(_) => None,
        }
    }

    pub fn is_defined(self) -> bool {
        matches!(self, Score::Defined(_))
    }

    pub fn reason(self) -> Option<UndefinedReason> {
        match self {
            Score::Defined(_) => None,
            Score::Undefined(r) => Some(r),
        }
    }

    /// Panics if undefined. Test helper.
    pub fn unwrap(self) -> f64 {
        match self {
            Score::Defined(v) => v,
            Score::Undefined(r) => panic!("called Score::unwrap on undefined value ({r})"),
        }
    }

    /// `num / den`, or undefined with `reason` when `den` is zero.
    pub(crate) fn ratio(num: f64, den: f64, reason: UndefinedReason) -> Score {
        if den == 0.0 {
            Score::Undefined(reason)
        } else {
            Score::Defined(num / den)
        }
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Score::Defined(v) => write!(f, "{v}"),
            Score::Undefined(r) => write!(f, "undefined:{r}"),
        }
    }
}

impl From<f64> for Score {
    fn from(v: f64) -> Self {
        Score::Defined(v)
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Score::Defined(v) => serializer.serialize_f64(*v),
            Score::Undefined(r) => {
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry("undefined", r)?;
                map.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for Score {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ScoreVisitor;

        impl<'de> Visitor<'de> for ScoreVisitor {
            type Value = Score;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or {\"undefined\": reason}")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Score, E> {
                Ok(Score::Defined(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Score, E> {
                Ok(Score::Defined(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Score, E> {
                Ok(Score::Defined(v as f64))
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Score, A::Error> {
                let mut reason = None;
                while let Some(key) = map.next_key::<String>()? {
                    if key == "undefined" {
                        reason = Some(map.next_value::<UndefinedReason>()?);
                    } else {
                        return Err(de::Error::unknown_field(&key, &["undefined"]));
                    }
                }
                reason
                    .map(Score::Undefined)
                    .ok_or_else(|| de::Error::missing_field("undefined"))
            }
        }

        deserializer.deserialize_any(ScoreVisitor)
    }
}
