//! Pseudo-label quality metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{Connectivity, LabelMap, MaskRle, Taxonomy, VOID};
use crate::psa::class_counts;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// `None` for classes absent from both prediction and ground truth.
    pub per_class_iou: Vec<Option<f64>>,
    pub miou: f64,
    /// Correct pixels over non-void ground-truth pixels; void predictions count as wrong.
    pub pixel_accuracy: f64,
    /// Non-void fraction of the prediction.
    pub coverage: f64,
    /// Accuracy over pixels labeled in both prediction and ground truth.
    pub labeled_accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connectivity_label_accuracy: Option<f64>,
}

/// Compares `pred` with `gt` over the non-void ground-truth pixels.
///
/// Predictions falling on void ground truth are ignored except for coverage.
/// A class counts towards the mean IoU when it occurs in either map within
/// that region.
pub fn evaluate(pred: &LabelMap, gt: &LabelMap, tax: &Taxonomy) -> Result<Metrics> {
    if pred.dims() != gt.dims() {
        return Err(Error::dims(gt.dims(), pred.dims()));
    }
    let k = tax.num_classes();
    pred.validate(k)?;
    gt.validate(k)?;

    let mut tp = vec![0u64; k];
    let mut gt_count = vec![0u64; k];
    let mut pred_count = vec![0u64; k];
    let (mut gt_labeled, mut both_labeled, mut correct, mut pred_labeled) = (0u64, 0u64, 0u64, 0u64);
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        if p != VOID {
            pred_labeled += 1;
        }
        if g == VOID {
            continue;
        }
        gt_labeled += 1;
        gt_count[g as usize] += 1;
        if p == VOID {
            continue;
        }
        both_labeled += 1;
        pred_count[p as usize] += 1;
        if p == g {
            tp[g as usize] += 1;
            correct += 1;
        }
    }

    let per_class_iou: Vec<Option<f64>> = (0..k)
        .map(|c| {
            let union = gt_count[c] + pred_count[c] - tp[c];
            (union > 0).then(|| tp[c] as f64 / union as f64)
        })
        .collect();
    let present: Vec<f64> = per_class_iou.iter().flatten().copied().collect();
    let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(Metrics {
        miou: if present.is_empty() { 0.0 } else { present.iter().sum::<f64>() / present.len() as f64 },
        per_class_iou,
        pixel_accuracy: ratio(correct, gt_labeled),
        coverage: ratio(pred_labeled, pred.data().len() as u64),
        labeled_accuracy: ratio(correct, both_labeled),
        connectivity_label_accuracy: None,
    })
}

/// Most frequent non-void ground-truth class under a mask; ties go to the
/// lower class. `None` if the mask covers only void.
pub fn majority_class(gt: &LabelMap, mask: &MaskRle) -> Result<Option<u8>> {
    if mask.dims() != gt.dims() {
        return Err(Error::dims(gt.dims(), mask.dims()));
    }
    let counts = class_counts(gt, mask);
    let mut best: Option<u8> = None;
    for c in 0..VOID as usize {
        if counts[c] > 0 && best.is_none_or(|b| counts[c] > counts[b as usize]) {
            best = Some(c as u8);
        }
    }
    Ok(best)
}

/// Fraction of connectivities whose label equals the majority ground-truth
/// class under their mask. Connectivities over void ground truth only are
/// not counted; `None` if nothing is counted.
pub fn connectivity_label_accuracy<'a>(
    conns: impl IntoIterator<Item = &'a Connectivity>,
    gt: &LabelMap,
) -> Result<Option<f64>> {
    let (mut hit, mut total) = (0usize, 0usize);
    for c in conns {
        if let Some(m) = majority_class(gt, &c.mask)? {
            total += 1;
            hit += (m == c.label) as usize;
        }
    }
    Ok((total > 0).then(|| hit as f64 / total as f64))
}
