//! Average Hausdorff distance between the point sets of two masks.
//!
//! The directed distance `d(A, B)` is the mean over `a ∈ A` of the Euclidean
//! distance to the nearest `b ∈ B`; the symmetric AHD is the larger of the two
//! directions. The inner minimum is read from an exact Euclidean distance
//! transform of `B`, computed as one lower-envelope-of-parabolas pass per axis
//! with the axis spacing folded into the parabola positions. Every pass is
//! exact, so the result equals brute-force nearest-neighbour search up to
//! floating-point rounding.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mask::{coords_of, index_of, shape_compatible, ClassId, LabelMask};
use crate::score::{Score, UndefinedReason};

/// Foreground coordinates of one class, with the spacing of the source mask.
///
/// Points are stored as row-major linear indices; ascending index order is
/// lexicographic coordinate order.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    shape: Vec<usize>,
    spacing: Vec<f64>,
    indices: Vec<usize>,
}

impl PointSet {
    /// Builds a point set from coordinate tuples. Duplicates are merged.
    pub fn from_coords(shape: &[usize], spacing: &[f64], coords: &[Vec<usize>]) -> Result<Self> {
        if spacing.len() != shape.len() {
            return Err(Error::InvalidMask(format!(
                "{} spacing entries for {} axes",
                spacing.len(),
                shape.len()
            )));
        }
        let mut indices = coords
            .iter()
            .map(|c| {
                index_of(shape, c)
                    .ok_or_else(|| Error::InvalidMask(format!("point {c:?} outside {shape:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        indices.sort_unstable();
        indices.dedup();
        Ok(PointSet {
            shape: shape.to_vec(),
            spacing: spacing.to_vec(),
            indices,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn coords(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.indices.iter().map(|&i| coords_of(&self.shape, i))
    }

    /// Same points under a different spacing.
    pub fn with_spacing(mut self, spacing: &[f64]) -> Self {
        self.spacing = spacing.to_vec();
        self
    }
}

/// Elements of `class_id`, or only those on its surface.
///
/// A surface element has at least one face neighbour that is not of the class;
/// positions beyond the grid boundary count as not of the class.
pub fn extract_points(mask: &LabelMask, class_id: ClassId, surface_only: bool) -> PointSet {
    let shape = mask.shape();
    let labels = mask.labels();
    let strides = strides(shape);
    let indices = labels
        .iter()
        .enumerate()
        .filter(|&(_, &l)| l == class_id)
        .map(|(i, _)| i)
        .filter(|&i| {
            if !surface_only {
                return true;
            }
            let coords = coords_of(shape, i);
            (0..shape.len()).any(|axis| {
                let c = coords[axis];
                let s = strides[axis];
                c == 0
                    || c + 1 == shape[axis]
                    || labels[i - s] != class_id
                    || labels[i + s] != class_id
            })
        })
        .collect();
    PointSet {
        shape: shape.to_vec(),
        spacing: mask.spacing().to_vec(),
        indices,
    }
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for a in (0..shape.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * shape[a + 1];
    }
    s
}

/// Per-element Euclidean distance to the nearest point of a reference set.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl DistanceField {
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, coords: &[usize]) -> Option<f64> {
        index_of(&self.shape, coords).map(|i| self.values[i])
    }
}

/// Exact distance transform to the elements labelled `class_id`.
pub fn edt(mask: &LabelMask, class_id: ClassId) -> Result<DistanceField> {
    let points = extract_points(mask, class_id, false);
    if points.is_empty() {
        return Err(Error::EmptyReference(class_id));
    }
    edt_from_points(&points)
}

/// Exact distance transform to an arbitrary non-empty point set.
pub fn edt_from_points(points: &PointSet) -> Result<DistanceField> {
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    let squared = squared_edt(&points.shape, &points.spacing, &points.indices);
    Ok(DistanceField {
        shape: points.shape.clone(),
        values: squared.into_iter().map(f64::sqrt).collect(),
    })
}

fn squared_edt(shape: &[usize], spacing: &[f64], seeds: &[usize]) -> Vec<f64> {
    let len: usize = shape.iter().product();
    let mut field = vec![f64::INFINITY; len];
    for &i in seeds {
        field[i] = 0.0;
    }
    let strides = strides(shape);
    for axis in (0..shape.len()).rev() {
        let n = shape[axis];
        let inner = strides[axis];
        let step = spacing[axis];
        // Each block holds `inner` independent lines of length `n`.
        field.par_chunks_mut(n * inner).for_each(|block| {
            let mut line = vec![0.0; n];
            let mut out = vec![0.0; n];
            let mut envelope = Envelope::with_capacity(n);
            for offset in 0..inner {
                for (q, v) in line.iter_mut().enumerate() {
                    *v = block[offset + q * inner];
                }
                envelope.transform(&line, step, &mut out);
                for (q, v) in out.iter().enumerate() {
                    block[offset + q * inner] = *v;
                }
            }
        });
    }
    field
}

/// Scratch space for the 1D lower envelope of parabolas
/// `y = f(p) + (x - p·step)²`.
struct Envelope {
    sites: Vec<usize>,
    /// Left boundary of each site's region along the physical axis.
    bounds: Vec<f64>,
}

impl Envelope {
    fn with_capacity(n: usize) -> Self {
        Envelope {
            sites: Vec::with_capacity(n),
            bounds: Vec::with_capacity(n),
        }
    }

    fn transform(&mut self, f: &[f64], step: f64, out: &mut [f64]) {
        self.sites.clear();
        self.bounds.clear();
        for (q, &fq) in f.iter().enumerate() {
            if fq.is_infinite() {
                continue;
            }
            let xq = q as f64 * step;
            let mut boundary = f64::NEG_INFINITY;
            while let Some(&p) = self.sites.last() {
                let xp = p as f64 * step;
                let s = ((fq + xq * xq) - (f[p] + xp * xp)) / (2.0 * (xq - xp));
                if s <= *self.bounds.last().unwrap() {
                    self.sites.pop();
                    self.bounds.pop();
                } else {
                    boundary = s;
                    break;
                }
            }
            self.sites.push(q);
            self.bounds.push(boundary);
        }

        if self.sites.is_empty() {
            out.fill(f64::INFINITY);
            return;
        }
        let mut k = 0;
        for (q, o) in out.iter_mut().enumerate() {
            let x = q as f64 * step;
            while k + 1 < self.sites.len() && self.bounds[k + 1] < x {
                k += 1;
            }
            let p = self.sites[k];
            let d = x - p as f64 * step;
            *o = d * d + f[p];
        }
    }
}

fn check_field(a: &PointSet, field: &DistanceField) -> Result<()> {
    if a.shape != field.shape {
        return Err(Error::ShapeMismatch(a.shape.clone(), field.shape.clone()));
    }
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(())
}

/// Mean over the points of `a` of their distance to the field's reference set.
pub fn directed_ahd(a: &PointSet, b_field: &DistanceField) -> Result<f64> {
    check_field(a, b_field)?;
    let sum: f64 = a.indices.iter().map(|&i| b_field.values[i]).sum();
    Ok(sum / a.len() as f64)
}

/// Largest distance from a point of `a` to the field's reference set.
pub fn directed_hausdorff(a: &PointSet, b_field: &DistanceField) -> Result<f64> {
    check_field(a, b_field)?;
    Ok(a.indices
        .iter()
        .map(|&i| b_field.values[i])
        .fold(0.0, f64::max))
}

/// Both directed mean and max distances between two point sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceSummary {
    pub mean_gt_to_pred: f64,
    pub mean_pred_to_gt: f64,
    pub max_gt_to_pred: f64,
    pub max_pred_to_gt: f64,
}

impl DistanceSummary {
    /// Symmetric average Hausdorff distance.
    pub fn ahd(&self) -> f64 {
        self.mean_gt_to_pred.max(self.mean_pred_to_gt)
    }

    /// Classic max-min Hausdorff distance.
    pub fn hausdorff(&self) -> f64 {
        self.max_gt_to_pred.max(self.max_pred_to_gt)
    }

    pub fn between(gt: &PointSet, pred: &PointSet) -> std::result::Result<Self, UndefinedReason> {
        match (gt.is_empty(), pred.is_empty()) {
            (true, true) => return Err(UndefinedReason::EmptyBoth),
            (true, false) => return Err(UndefinedReason::EmptyGt),
            (false, true) => return Err(UndefinedReason::EmptyPred),
            _ => {}
        }
        // Both sets are non-empty and share a shape, so nothing below can fail.
        let gt_field = edt_from_points(gt).expect("non-empty");
        let pred_field = edt_from_points(pred).expect("non-empty");
        Ok(DistanceSummary {
            mean_gt_to_pred: directed_ahd(gt, &pred_field).expect("checked"),
            mean_pred_to_gt: directed_ahd(pred, &gt_field).expect("checked"),
            max_gt_to_pred: directed_hausdorff(gt, &pred_field).expect("checked"),
            max_pred_to_gt: directed_hausdorff(pred, &gt_field).expect("checked"),
        })
    }
}

/// Point sets of `class_id` in both masks, both measured under the ground
/// truth's spacing.
pub fn point_sets(
    gt: &LabelMask,
    pred: &LabelMask,
    class_id: ClassId,
    surface_only: bool,
) -> Result<(PointSet, PointSet)> {
    if !shape_compatible(gt, pred) {
        return Err(Error::ShapeMismatch(gt.shape().to_vec(), pred.shape().to_vec()));
    }
    let a = extract_points(gt, class_id, surface_only);
    let b = extract_points(pred, class_id, surface_only).with_spacing(gt.spacing());
    Ok((a, b))
}

/// Directed and symmetric distances for one class, or the reason they are
/// undefined.
pub fn distance_summary(
    gt: &LabelMask,
    pred: &LabelMask,
    class_id: ClassId,
    surface_only: bool,
) -> Result<std::result::Result<DistanceSummary, UndefinedReason>> {
    let (a, b) = point_sets(gt, pred, class_id, surface_only)?;
    Ok(DistanceSummary::between(&a, &b))
}

/// Symmetric average Hausdorff distance of one class.
pub fn ahd(gt: &LabelMask, pred: &LabelMask, class_id: ClassId, surface_only: bool) -> Result<Score> {
    Ok(match distance_summary(gt, pred, class_id, surface_only)? {
        Ok(s) => Score::Defined(s.ahd()),
        Err(r) => Score::Undefined(r),
    })
}

/// Classic (max-min) Hausdorff distance of one class.
pub fn hausdorff_max(
    gt: &LabelMask,
    pred: &LabelMask,
    class_id: ClassId,
    surface_only: bool,
) -> Result<Score> {
    Ok(match distance_summary(gt, pred, class_id, surface_only)? {
        Ok(s) => Score::Defined(s.hausdorff()),
        Err(r) => Score::Undefined(r),
    })
}
