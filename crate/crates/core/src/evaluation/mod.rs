//! Recognition (CER) and detection (P/R/F1) scoring, per image and in
//! aggregate.

mod cer;
mod detection;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cer::{cer, edit_counts, Normalization, RecognitionEvalResult};
pub use detection::{
    greedy_matches, harmonic_mean, match_detections, prediction_order, DetectionEvalResult, Match,
    DEFAULT_IOU_THRESHOLD,
};

use crate::dataset::{ConditionMetadata, GroundTruthRegion, Lighting};
use crate::engines::TextRegion;
use crate::error::{Error, Result};
use crate::geometry::{BBox, ScoredBox};
use crate::photometry::LightingStats;

/// Precision/recall/F1 as stored in a record. Match counts are kept when
/// the record was produced by this crate; rows read back from CSV carry
/// only the rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionSummary {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    #[serde(default)]
    pub counts: Option<(usize, usize, usize)>,
}

impl From<&DetectionEvalResult> for DetectionSummary {
    fn from(r: &DetectionEvalResult) -> Self {
        DetectionSummary {
            precision: r.precision,
            recall: r.recall,
            f1: r.f1,
            counts: Some((r.tp, r.fp, r.fn_)),
        }
    }
}

/// Per-image evaluation joined with capture conditions and lighting metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub image_id: String,
    pub conditions: Option<ConditionMetadata>,
    pub lighting: LightingStats,
    pub detection: Option<DetectionSummary>,
    pub recognition: Option<RecognitionEvalResult>,
}

impl EvalRecord {
    pub fn new(
        image_id: impl Into<String>,
        conditions: Option<ConditionMetadata>,
        lighting: LightingStats,
        detection: Option<DetectionSummary>,
        recognition: Option<RecognitionEvalResult>,
    ) -> Result<Self> {
        if detection.is_none() && recognition.is_none() {
            return Err(Error::InvalidParameter(
                "an eval record needs a detection or a recognition result".into(),
            ));
        }
        Ok(EvalRecord {
            image_id: image_id.into(),
            conditions,
            lighting,
            detection,
            recognition,
        })
    }
}

/// Scores a set of predicted regions against ground truth.
///
/// Detection uses [`match_detections`]. Recognition pools the edit counts of
/// every matched pair (visited in ground-truth reading order) and charges
/// each unmatched ground-truth region as a full deletion.
pub fn score_regions(
    gt: &[GroundTruthRegion],
    predicted: &[TextRegion],
    iou_threshold: f64,
    norm: &Normalization,
) -> (DetectionEvalResult, RecognitionEvalResult) {
    let gt_boxes: Vec<BBox> = gt.iter().map(|g| g.bbox).collect();
    let pred_boxes: Vec<ScoredBox> = predicted
        .iter()
        .map(|p| ScoredBox {
            bbox: p.bbox,
            confidence: p.confidence.clamp(0.0, 1.0),
        })
        .collect();
    let matches = greedy_matches(&gt_boxes, &pred_boxes, iou_threshold);
    let tp = matches.len();
    let detection = DetectionEvalResult::from_counts(tp, predicted.len() - tp, gt.len() - tp);

    let mut pred_for_gt: Vec<Option<usize>> = vec![None; gt.len()];
    for m in &matches {
        pred_for_gt[m.gt] = Some(m.pred);
    }
    let mut order: Vec<usize> = (0..gt.len()).collect();
    order.sort_by(|&a, &b| gt[a].bbox.reading_cmp(&gt[b].bbox));
    let per_region: Vec<RecognitionEvalResult> = order
        .iter()
        .map(|&g| {
            let text = pred_for_gt[g].map_or("", |p| predicted[p].text.as_str());
            cer(&gt[g].text, text, norm)
        })
        .collect();
    (detection, RecognitionEvalResult::pooled(&per_region))
}

/// Columns that can be pulled out of an [`EvalRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    MeanBrightness,
    StdBrightness,
    GlobalLuminance,
    Contrast,
    Precision,
    Recall,
    F1,
    /// `1 - F1`.
    DetectionError,
    Cer,
    DistanceM,
    /// Capture width in pixels.
    Resolution,
}

impl Metric {
    pub const ALL: [Metric; 11] = [
        Metric::MeanBrightness,
        Metric::StdBrightness,
        Metric::GlobalLuminance,
        Metric::Contrast,
        Metric::Precision,
        Metric::Recall,
        Metric::F1,
        Metric::DetectionError,
        Metric::Cer,
        Metric::DistanceM,
        Metric::Resolution,
    ];

    pub const LIGHTING: [Metric; 4] = [
        Metric::MeanBrightness,
        Metric::StdBrightness,
        Metric::GlobalLuminance,
        Metric::Contrast,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::MeanBrightness => "mean_brightness",
            Metric::StdBrightness => "std_brightness",
            Metric::GlobalLuminance => "global_luminance",
            Metric::Contrast => "contrast",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::F1 => "f1",
            Metric::DetectionError => "detection_error",
            Metric::Cer => "cer",
            Metric::DistanceM => "distance_m",
            Metric::Resolution => "resolution",
        }
    }

    pub fn value(self, r: &EvalRecord) -> Option<f64> {
        match self {
            Metric::MeanBrightness => Some(r.lighting.mean_brightness),
            Metric::StdBrightness => Some(r.lighting.std_brightness),
            Metric::GlobalLuminance => Some(r.lighting.global_luminance),
            Metric::Contrast => Some(r.lighting.contrast),
            Metric::Precision => r.detection.map(|d| d.precision),
            Metric::Recall => r.detection.map(|d| d.recall),
            Metric::F1 => r.detection.map(|d| d.f1),
            Metric::DetectionError => r.detection.map(|d| 1.0 - d.f1),
            Metric::Cer => r.recognition.map(|c| c.cer),
            Metric::DistanceM => r.conditions.map(|c| c.distance_m),
            Metric::Resolution => r.conditions.map(|c| c.width as f64),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown metric `{s}`")))
    }
}

/// One cell of the lighting × distance × resolution design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConditionCell {
    pub lighting: Lighting,
    pub distance_mm: u32,
    pub width: u32,
    pub height: u32,
}

impl ConditionCell {
    pub fn of(c: &ConditionMetadata) -> Self {
        ConditionCell {
            lighting: c.lighting,
            distance_mm: (c.distance_m * 1000.0).round() as u32,
            width: c.width,
            height: c.height,
        }
    }

    pub fn distance_m(&self) -> f64 {
        self.distance_mm as f64 / 1000.0
    }
}

impl fmt::Display for ConditionCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} / {}m / {}x{}",
            self.lighting,
            self.distance_m(),
            self.width,
            self.height
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        };
        Some(Stat {
            n,
            mean: v.iter().sum::<f64>() / n as f64,
            median,
            min: v[0],
            max: v[n - 1],
        })
    }
}

/// Mean/median of every metric for one set of records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub count: usize,
    pub stats: BTreeMap<Metric, Stat>,
    /// Total edits over total ground-truth characters.
    pub pooled_cer: Option<f64>,
}

impl MetricSummary {
    pub fn of<'a>(records: impl IntoIterator<Item = &'a EvalRecord> + Clone) -> Self {
        let mut stats = BTreeMap::new();
        for m in Metric::ALL {
            let vals: Vec<f64> = records
                .clone()
                .into_iter()
                .filter_map(|r| m.value(r))
                .collect();
            if let Some(s) = Stat::of(&vals) {
                stats.insert(m, s);
            }
        }
        let recs: Vec<&RecognitionEvalResult> = records
            .clone()
            .into_iter()
            .filter_map(|r| r.recognition.as_ref())
            .filter(|r| r.n > 0 || r.edits() > 0)
            .collect();
        let pooled_cer = (!recs.is_empty()).then(|| RecognitionEvalResult::pooled(recs).cer);
        MetricSummary {
            count: records.into_iter().count(),
            stats,
            pooled_cer,
        }
    }

    pub fn mean(&self, m: Metric) -> Option<f64> {
        self.stats.get(&m).map(|s| s.mean)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub overall: MetricSummary,
    /// Per-cell summaries; records without conditions are grouped under `None`.
    pub groups: Vec<(Option<ConditionCell>, MetricSummary)>,
}

pub fn aggregate(records: &[EvalRecord]) -> Result<Aggregate> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no records to aggregate".into()));
    }
    let mut cells: BTreeMap<Option<ConditionCell>, Vec<&EvalRecord>> = BTreeMap::new();
    for r in records {
        cells
            .entry(r.conditions.as_ref().map(ConditionCell::of))
            .or_default()
            .push(r);
    }
    Ok(Aggregate {
        overall: MetricSummary::of(records.iter()),
        groups: cells
            .into_iter()
            .map(|(k, v)| (k, MetricSummary::of(v.iter().copied())))
            .collect(),
    })
}
