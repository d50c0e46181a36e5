//! Segmentation evaluation on label masks.
//!
//! The crate computes overlap metrics (IoU, DSC, sensitivity, specificity,
//! accuracy), single-threshold and threshold-sweep AUC, Cohen's kappa and the
//! average Hausdorff distance for binary and multi-class label masks. On top
//! of that it provides micro/macro aggregation, dataset-level distribution
//! reports with a guideline lint, and overlay/plot rendering.
//!
//! Module map:
//!
//! * [`mask`]: label masks, probability grids, PNG and MGRID I/O.
//! * [`confusion`]: one-vs-rest confusion counts per class.
//! * [`overlap`]: confusion-based metrics and ROC.
//! * [`distance`]: exact distance transform and Hausdorff distances.
//! * [`aggregate`]: micro/macro averaging and per-class reports.
//! * [`report`]: dataset reports, statistics, scenarios, lint.
//! * [`visualize`]: overlays, binary panels, SVG plots.

pub mod aggregate;
pub mod confusion;
pub mod distance;
pub mod error;
pub mod mask;
pub mod overlap;
pub mod report;
pub mod score;
pub mod visualize;

pub use error::{Error, Result};
pub use mask::{ClassCatalog, ClassId, LabelMask};
pub use score::{Score, UndefinedReason};
