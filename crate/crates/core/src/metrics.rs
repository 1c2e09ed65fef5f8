//! Overlap scores between a predicted and a reference mask.

use crate::error::Result;
use crate::grid::SegMask;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricPair {
    /// Dice: `2 |A n B| / (|A| + |B|)`.
    pub dsc: f64,
    /// Jaccard: `|A n B| / |A u B|`.
    pub js: f64,
}

/// Both masks empty counts as perfect agreement.
pub fn evaluate(pred: &SegMask, truth: &SegMask) -> Result<MetricPair> {
    if pred.dims() != truth.dims() {
        return Err(crate::Error::DimensionMismatch {
            left: pred.dims(),
            right: truth.dims(),
        });
    }
    let (mut both, mut only_pred, mut only_truth) = (0usize, 0usize, 0usize);
    for (&p, &t) in pred.bits().iter().zip(truth.bits()) {
        match (p, t) {
            (true, true) => both += 1,
            (true, false) => only_pred += 1,
            (false, true) => only_truth += 1,
            (false, false) => {}
        }
    }
    Ok(from_counts(both, both + only_pred, both + only_truth))
}

/// Scores from `|A n B|`, `|A|` and `|B|`.
pub fn from_counts(intersection: usize, pred: usize, truth: usize) -> MetricPair {
    let union = pred + truth - intersection;
    if union == 0 {
        return MetricPair { dsc: 1.0, js: 1.0 };
    }
    MetricPair {
        dsc: 2.0 * intersection as f64 / (pred + truth) as f64,
        js: intersection as f64 / union as f64,
    }
}
