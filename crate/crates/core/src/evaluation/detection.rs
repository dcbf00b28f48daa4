//! Greedy confidence-ordered matching of predictions to ground truth at an
//! IoU threshold.

use serde::{Deserialize, Serialize};

use crate::geometry::{iou, BBox, ScoredBox};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionEvalResult {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when there were no predictions; precision is then reported as 1.
    pub precision_undefined: bool,
}

impl DetectionEvalResult {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision_undefined = tp + fp == 0;
        let precision = if precision_undefined {
            1.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let recall = if tp + fn_ == 0 {
            1.0
        } else {
            tp as f64 / (tp + fn_) as f64
        };
        DetectionEvalResult {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1: harmonic_mean(precision, recall),
            precision_undefined,
        }
    }
}

pub fn harmonic_mean(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// One matched pair: indices into the ground-truth and prediction lists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub gt: usize,
    pub pred: usize,
    pub iou: f64,
}

/// Order in which predictions claim ground truth: confidence descending,
/// then area descending, then reading order.
pub fn prediction_order(pred: &[ScoredBox]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pred.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&pred[a], &pred[b]);
        pb.confidence
            .total_cmp(&pa.confidence)
            .then(pb.bbox.area().total_cmp(&pa.bbox.area()))
            .then(pa.bbox.reading_cmp(&pb.bbox))
            .then(a.cmp(&b))
    });
    order
}

/// Runs the greedy matcher and returns the matched pairs.
pub fn greedy_matches(gt: &[BBox], pred: &[ScoredBox], iou_threshold: f64) -> Vec<Match> {
    let mut taken = vec![false; gt.len()];
    let mut matches = Vec::new();
    for p in prediction_order(pred) {
        let best = gt
            .iter()
            .enumerate()
            .filter(|(g, _)| !taken[*g])
            .map(|(g, b)| (g, iou(b, &pred[p].bbox)))
            .max_by(|(ga, ia), (gb, ib)| {
                // Highest IoU; ties go to the earlier box in reading order so
                // the result does not depend on the order of `gt`.
                ia.total_cmp(ib).then_with(|| gt[*gb].reading_cmp(&gt[*ga]))
            });
        if let Some((g, v)) = best {
            if v >= iou_threshold {
                taken[g] = true;
                matches.push(Match {
                    gt: g,
                    pred: p,
                    iou: v,
                });
            }
        }
    }
    matches
}

pub fn match_detections(
    gt: &[BBox],
    pred: &[ScoredBox],
    iou_threshold: f64,
) -> DetectionEvalResult {
    let tp = greedy_matches(gt, pred, iou_threshold).len();
    DetectionEvalResult::from_counts(tp, pred.len() - tp, gt.len() - tp)
}
