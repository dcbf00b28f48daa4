//! Output decoding for EAST-style detectors.
//!
//! The network itself is a black box behind [`EastModel`]; this module turns
//! its score and geometry maps into axis-aligned boxes and suppresses
//! duplicates.

use super::{Detector, FrameContext};
use crate::error::{Error, Result};
use crate::geometry::{iou, BBox, ScoredBox};
use crate::raster::Image;

/// Feature-map stride of the reference architecture.
pub const EAST_STRIDE: f64 = 4.0;

/// Raw network output for one image: a `rows × cols` score map and five
/// geometry channels (distances to top, right, bottom, left edges, then the
/// rotation angle in radians), all row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EastOutput {
    pub rows: usize,
    pub cols: usize,
    pub scores: Vec<f32>,
    pub geometry: [Vec<f32>; 5],
}

impl EastOutput {
    pub fn validate(&self) -> Result<()> {
        let n = self.rows * self.cols;
        if self.scores.len() != n || self.geometry.iter().any(|g| g.len() != n) {
            return Err(Error::InvalidParameter(format!(
                "EAST maps must hold {}x{} values",
                self.rows, self.cols
            )));
        }
        Ok(())
    }
}

pub trait EastModel: Send + Sync {
    fn name(&self) -> &str;
    fn infer(&self, image: &Image) -> Result<EastOutput>;
}

/// Decodes every cell scoring at least `score_threshold` into the
/// axis-aligned envelope of its rotated rectangle, in input pixels.
pub fn decode_east(out: &EastOutput, score_threshold: f64) -> Result<Vec<ScoredBox>> {
    out.validate()?;
    let mut boxes = Vec::new();
    for r in 0..out.rows {
        for c in 0..out.cols {
            let i = r * out.cols + c;
            let score = out.scores[i] as f64;
            if score < score_threshold {
                continue;
            }
            let [top, right, bottom, left, angle] = out.geometry.each_ref().map(|g| g[i] as f64);
            let (sin, cos) = angle.sin_cos();
            let h = top + bottom;
            let w = right + left;
            let ox = c as f64 * EAST_STRIDE + cos * right + sin * bottom;
            let oy = r as f64 * EAST_STRIDE - sin * right + cos * bottom;
            let p1 = (-sin * h + ox, -cos * h + oy);
            let p3 = (-cos * w + ox, sin * w + oy);
            let (cx, cy) = (0.5 * (p1.0 + p3.0), 0.5 * (p1.1 + p3.1));
            let ex = 0.5 * ((w * cos).abs() + (h * sin).abs());
            let ey = 0.5 * ((w * sin).abs() + (h * cos).abs());
            let bbox = BBox {
                x_min: cx - ex,
                y_min: cy - ey,
                x_max: cx + ex,
                y_max: cy + ey,
            };
            if bbox.is_valid() && bbox.area() > 0.0 {
                boxes.push(ScoredBox {
                    bbox,
                    confidence: score.clamp(0.0, 1.0),
                });
            }
        }
    }
    Ok(boxes)
}

/// Greedy non-maximum suppression: keeps the highest-scoring box and drops
/// every remaining box overlapping it with IoU above `threshold`.
pub fn nms(boxes: &[ScoredBox], threshold: f64) -> Vec<ScoredBox> {
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|&a, &b| {
        boxes[b]
            .confidence
            .total_cmp(&boxes[a].confidence)
            .then_with(|| boxes[a].bbox.reading_cmp(&boxes[b].bbox))
    });
    let mut kept: Vec<ScoredBox> = Vec::new();
    for i in order {
        if kept
            .iter()
            .all(|k| iou(&k.bbox, &boxes[i].bbox) <= threshold)
        {
            kept.push(boxes[i]);
        }
    }
    kept
}

/// Detector adapter around an [`EastModel`].
pub struct EastDetector<M> {
    model: M,
    pub score_threshold: f64,
    pub nms_threshold: f64,
}

impl<M: EastModel> EastDetector<M> {
    pub fn new(model: M, score_threshold: f64, nms_threshold: f64) -> Self {
        EastDetector {
            model,
            score_threshold,
            nms_threshold,
        }
    }
}

impl<M: EastModel> Detector for EastDetector<M> {
    fn name(&self) -> &str {
        self.model.name()
    }

    fn detect(&self, image: &Image, _ctx: &FrameContext) -> Result<Vec<ScoredBox>> {
        let raw = decode_east(&self.model.infer(image)?, self.score_threshold)?;
        let (w, h) = (image.width() as f64, image.height() as f64);
        Ok(nms(&raw, self.nms_threshold)
            .into_iter()
            .filter_map(|s| {
                s.bbox.clip(w, h).map(|bbox| ScoredBox {
                    bbox,
                    confidence: s.confidence,
                })
            })
            .collect())
    }
}
