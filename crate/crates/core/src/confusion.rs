//! One-vs-rest confusion counts per class.
//!
//! For a class `c`, an element is positive in the ground truth when its label
//! equals `c`, and positive in the prediction likewise. Every other label,
//! background included, is "rest".

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Range};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{shape_compatible, ClassId, LabelMask};

/// Elements per tile when counting in parallel.
const TILE: usize = 1 << 16;

/// The four confusion cells of one class on one sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub const fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        ConfusionCounts { tp, fp, tn, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Elements labelled positive in the ground truth.
    pub fn gt_positives(&self) -> u64 {
        self.tp + self.fn_
    }

    /// Elements labelled positive in the prediction.
    pub fn pred_positives(&self) -> u64 {
        self.tp + self.fp
    }

    pub fn absent_in_gt(&self) -> bool {
        self.gt_positives() == 0
    }

    pub fn absent_in_pred(&self) -> bool {
        self.pred_positives() == 0
    }

    /// Exchange ground truth and prediction (fp ↔ fn).
    pub fn transposed(&self) -> Self {
        ConfusionCounts::new(self.tp, self.fn_, self.tn, self.fp)
    }

    /// Exchange positive and negative roles (tp ↔ tn, fp ↔ fn).
    pub fn complemented(&self) -> Self {
        ConfusionCounts::new(self.tn, self.fn_, self.tp, self.fp)
    }
}

impl Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        ConfusionCounts::new(self.tp + o.tp, self.fp + o.fp, self.tn + o.tn, self.fn_ + o.fn_)
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl std::iter::Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ConfusionCounts::default(), Add::add)
    }
}

/// Per-class confusion counts for one ground-truth/prediction pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionTable {
    pub per_class: BTreeMap<ClassId, ConfusionCounts>,
    pub total: u64,
}

impl ConfusionTable {
    pub fn get(&self, class: ClassId) -> Option<&ConfusionCounts> {
        self.per_class.get(&class)
    }
}

/// Streaming accumulator of tp/fp/fn per requested class.
///
/// `tn` is derived once at the end from the element total, so partial
/// accumulators over disjoint element ranges merge by plain addition.
#[derive(Debug, Clone)]
pub struct ConfusionAccumulator {
    classes: Vec<ClassId>,
    /// label -> slot in `classes`, or `usize::MAX` for untracked labels.
    slot: Vec<usize>,
    hits: Vec<[u64; 3]>,
    elements: u64,
}

impl ConfusionAccumulator {
    pub fn new(classes: &[ClassId]) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::EmptyClassList);
        }
        let max = *classes.iter().max().unwrap() as usize;
        let mut slot = vec![usize::MAX; max + 1];
        for (i, &c) in classes.iter().enumerate() {
            if slot[c as usize] != usize::MAX {
                return Err(Error::DuplicateClass(c));
            }
            slot[c as usize] = i;
        }
        Ok(ConfusionAccumulator {
            classes: classes.to_vec(),
            slot,
            hits: vec![[0; 3]; classes.len()],
            elements: 0,
        })
    }

    fn empty_like(&self) -> Self {
        ConfusionAccumulator {
            classes: self.classes.clone(),
            slot: self.slot.clone(),
            hits: vec![[0; 3]; self.classes.len()],
            elements: 0,
        }
    }

    #[inline]
    fn slot_of(&self, label: ClassId) -> Option<usize> {
        match self.slot.get(label as usize) {
            Some(&s) if s != usize::MAX => Some(s),
            _ => None,
        }
    }

    /// Counts the elements `range` of two equally long label slices.
    pub fn add_range(&mut self, gt: &[ClassId], pred: &[ClassId], range: Range<usize>) {
        const TP: usize = 0;
        const FP: usize = 1;
        const FN: usize = 2;
        for (&g, &p) in gt[range.clone()].iter().zip(&pred[range.clone()]) {
            if g == p {
                if let Some(s) = self.slot_of(g) {
                    self.hits[s][TP] += 1;
                }
            } else {
                if let Some(s) = self.slot_of(p) {
                    self.hits[s][FP] += 1;
                }
                if let Some(s) = self.slot_of(g) {
                    self.hits[s][FN] += 1;
                }
            }
        }
        self.elements += range.len() as u64;
    }

    pub fn merge(mut self, other: &ConfusionAccumulator) -> Self {
        debug_assert_eq!(self.classes, other.classes);
        for (a, b) in self.hits.iter_mut().zip(&other.hits) {
            for k in 0..3 {
                a[k] += b[k];
            }
        }
        self.elements += other.elements;
        self
    }

    pub fn finish(self) -> ConfusionTable {
        let total = self.elements;
        let per_class = self
            .classes
            .iter()
            .zip(&self.hits)
            .map(|(&c, &[tp, fp, fn_])| {
                (c, ConfusionCounts::new(tp, fp, total - tp - fp - fn_, fn_))
            })
            .collect();
        ConfusionTable { per_class, total }
    }
}

fn check_shapes(gt: &LabelMask, pred: &LabelMask) -> Result<()> {
    if !shape_compatible(gt, pred) {
        return Err(Error::ShapeMismatch(gt.shape().to_vec(), pred.shape().to_vec()));
    }
    Ok(())
}

/// One-vs-rest confusion counts for every class in `classes`.
///
/// Classes absent from both masks still get a row (`tn = total`). Large masks
/// are counted in parallel tiles; integer addition keeps the result identical
/// to a single pass.
pub fn confuse(gt: &LabelMask, pred: &LabelMask, classes: &[ClassId]) -> Result<ConfusionTable> {
    check_shapes(gt, pred)?;
    let seed = ConfusionAccumulator::new(classes)?;
    let n = gt.len();
    let (g, p) = (gt.labels(), pred.labels());
    if n <= TILE {
        let mut acc = seed;
        acc.add_range(g, p, 0..n);
        return Ok(acc.finish());
    }
    let tiles: Vec<ConfusionAccumulator> = (0..n.div_ceil(TILE))
        .into_par_iter()
        .map(|t| {
            let mut acc = seed.empty_like();
            acc.add_range(g, p, t * TILE..((t + 1) * TILE).min(n));
            acc
        })
        .collect();
    Ok(tiles.iter().fold(seed, |a, t| a.merge(t)).finish())
}

/// Confusion counts of a single positive class.
pub fn confuse_binary(gt: &LabelMask, pred: &LabelMask, positive_class: ClassId) -> Result<ConfusionCounts> {
    let table = confuse(gt, pred, &[positive_class])?;
    Ok(table.per_class[&positive_class])
}
