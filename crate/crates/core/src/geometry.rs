//! Axis-aligned box algebra and the line/gap merge heuristic used to turn
//! detector fragments into text-line regions.
//!
//! Coordinates are continuous pixels in the image frame: origin top-left,
//! `y` grows downward.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned rectangle `(x_min, y_min, x_max, y_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BBox {
    /// Builds a box, rejecting non-finite coordinates and inverted extents.
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let b = BBox {
            x_min,
            y_min,
            x_max,
            y_max,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let coords = [self.x_min, self.y_min, self.x_max, self.y_max];
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidBox(format!(
                "non-finite coordinate in {self:?}"
            )));
        }
        if self.x_min > self.x_max || self.y_min > self.y_max {
            return Err(Error::InvalidBox(format!("inverted extents in {self:?}")));
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Closed containment: `other` lies inside `self`, edges included.
    pub fn contains(&self, other: &BBox) -> bool {
        self.x_min <= other.x_min
            && self.y_min <= other.y_min
            && self.x_max >= other.x_max
            && self.y_max >= other.y_max
    }

    /// Closed-extent intersection test (touching boxes intersect).
    pub fn touches(&self, other: &BBox) -> bool {
        self.x_min <= other.x_max
            && other.x_min <= self.x_max
            && self.y_min <= other.y_max
            && other.y_min <= self.y_max
    }

    pub fn intersection(&self, other: &BBox) -> Option<BBox> {
        let b = BBox {
            x_min: self.x_min.max(other.x_min),
            y_min: self.y_min.max(other.y_min),
            x_max: self.x_max.min(other.x_max),
            y_max: self.y_max.min(other.y_max),
        };
        (b.x_min <= b.x_max && b.y_min <= b.y_max).then_some(b)
    }

    pub fn union_with(&self, other: &BBox) -> BBox {
        BBox {
            x_min: self.x_min.min(other.x_min),
            y_min: self.y_min.min(other.y_min),
            x_max: self.x_max.max(other.x_max),
            y_max: self.y_max.max(other.y_max),
        }
    }

    pub fn translate(&self, dx: f64, dy: f64) -> BBox {
        BBox {
            x_min: self.x_min + dx,
            y_min: self.y_min + dy,
            x_max: self.x_max + dx,
            y_max: self.y_max + dy,
        }
    }

    pub fn scale(&self, factor: f64) -> BBox {
        BBox {
            x_min: self.x_min * factor,
            y_min: self.y_min * factor,
            x_max: self.x_max * factor,
            y_max: self.y_max * factor,
        }
    }

    /// Clips to `[0, width] × [0, height]`. Returns `None` when nothing of
    /// the box remains inside the frame.
    pub fn clip(&self, width: f64, height: f64) -> Option<BBox> {
        self.intersection(&BBox {
            x_min: 0.0,
            y_min: 0.0,
            x_max: width,
            y_max: height,
        })
    }

    /// Total order `(y_min, x_min, x_max, y_max)` used to make sorting
    /// deterministic.
    pub fn reading_cmp(&self, other: &BBox) -> Ordering {
        self.y_min
            .total_cmp(&other.y_min)
            .then(self.x_min.total_cmp(&other.x_min))
            .then(self.x_max.total_cmp(&other.x_max))
            .then(self.y_max.total_cmp(&other.y_max))
    }

    fn horizontal_cmp(&self, other: &BBox) -> Ordering {
        self.x_min
            .total_cmp(&other.x_min)
            .then(self.y_min.total_cmp(&other.y_min))
            .then(self.x_max.total_cmp(&other.x_max))
            .then(self.y_max.total_cmp(&other.y_max))
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x_min, self.y_min, self.x_max, self.y_max]
    }
}

/// Detector output: a box plus a confidence in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredBox {
    pub bbox: BBox,
    pub confidence: f64,
}

impl ScoredBox {
    pub fn new(bbox: BBox, confidence: f64) -> Result<Self> {
        bbox.validate()?;
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::InvalidParameter(format!(
                "confidence {confidence} outside [0, 1]"
            )));
        }
        Ok(ScoredBox { bbox, confidence })
    }
}

/// Intersection over union. Zero when the union has zero area.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection(b).map_or(0.0, |i| i.area());
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

/// Smallest box containing every box in the group.
pub fn envelope(boxes: &[BBox]) -> Result<BBox> {
    let (first, rest) = boxes.split_first().ok_or(Error::EmptyGroup)?;
    Ok(rest.iter().fold(*first, |acc, b| acc.union_with(b)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MergeMode {
    /// Thresholds are pixels.
    Absolute,
    /// Thresholds are multipliers of the median input box height.
    #[default]
    Relative,
}

/// Thresholds for [`merge_boxes`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeParams {
    /// Maximum difference between top edges (or bottom edges) for two boxes
    /// to share a line.
    pub epsilon_y: f64,
    /// Maximum horizontal gap between neighbours within a line.
    pub epsilon_x: f64,
    #[serde(default)]
    pub mode: MergeMode,
}

impl Default for MergeParams {
    fn default() -> Self {
        MergeParams {
            epsilon_y: 0.5,
            epsilon_x: 1.0,
            mode: MergeMode::Relative,
        }
    }
}

impl MergeParams {
    pub fn absolute(epsilon_y: f64, epsilon_x: f64) -> Self {
        MergeParams {
            epsilon_y,
            epsilon_x,
            mode: MergeMode::Absolute,
        }
    }

    pub fn relative(epsilon_y: f64, epsilon_x: f64) -> Self {
        MergeParams {
            epsilon_y,
            epsilon_x,
            mode: MergeMode::Relative,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("epsilon_y", self.epsilon_y), ("epsilon_x", self.epsilon_x)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Resolves relative multipliers against `boxes` and returns absolute
    /// pixel thresholds. Absolute params are returned unchanged.
    pub fn resolve(&self, boxes: &[BBox]) -> MergeParams {
        match self.mode {
            MergeMode::Absolute => *self,
            MergeMode::Relative => {
                let h = median(boxes.iter().map(BBox::height).collect());
                MergeParams::absolute(self.epsilon_y * h, self.epsilon_x * h)
            }
        }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Groups boxes into text lines and merges each group into its envelope.
///
/// One pass sorts by `(y_min, x_min, ...)` and assigns every box to the first
/// line whose envelope has a top or bottom edge within `epsilon_y`; each line
/// is then split wherever the gap to the running envelope exceeds
/// `epsilon_x`. Output boxes whose closed extents touch are fused. Passes
/// repeat until nothing changes; each productive pass removes at least one
/// box, so at most `boxes.len()` passes run.
///
/// The output is sorted in reading order and does not depend on the order of
/// `boxes`.
pub fn merge_boxes(boxes: &[BBox], params: &MergeParams) -> Result<Vec<BBox>> {
    params.validate()?;
    for b in boxes {
        b.validate()?;
    }
    let abs = params.resolve(boxes);
    let mut current: Vec<BBox> = boxes.to_vec();
    current.sort_by(BBox::reading_cmp);
    for _ in 0..=boxes.len() {
        let next = merge_pass(&current, abs.epsilon_y, abs.epsilon_x);
        if next == current {
            break;
        }
        current = next;
    }
    Ok(current)
}

fn merge_pass(sorted: &[BBox], eps_y: f64, eps_x: f64) -> Vec<BBox> {
    // Line grouping.
    let mut lines: Vec<(BBox, Vec<BBox>)> = Vec::new();
    for b in sorted {
        let slot = lines.iter_mut().find(|(env, _)| {
            (b.y_min - env.y_min).abs() <= eps_y || (b.y_max - env.y_max).abs() <= eps_y
        });
        match slot {
            Some((env, members)) => {
                *env = env.union_with(b);
                members.push(*b);
            }
            None => lines.push((*b, vec![*b])),
        }
    }

    // Gap splitting.
    let mut out = Vec::with_capacity(sorted.len());
    for (_, mut members) in lines {
        members.sort_by(BBox::horizontal_cmp);
        let mut run = members[0];
        for b in &members[1..] {
            let gap = (b.x_min - run.x_max).max(0.0);
            if gap > eps_x {
                out.push(run);
                run = *b;
            } else {
                run = run.union_with(b);
            }
        }
        out.push(run);
    }

    let mut fused = fuse_touching(out);
    fused.sort_by(BBox::reading_cmp);
    fused
}

/// Replaces every connected component of touching boxes by its envelope.
fn fuse_touching(boxes: Vec<BBox>) -> Vec<BBox> {
    let n = boxes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if boxes[i].touches(&boxes[j]) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut envs: Vec<Option<BBox>> = vec![None; n];
    for (i, b) in boxes.iter().enumerate() {
        let r = find(&mut parent, i);
        envs[r] = Some(envs[r].map_or(*b, |e| e.union_with(b)));
    }
    envs.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(x0: f64, y0: f64, x1: f64, y1: f64) -> BBox {
        BBox::new(x0, y0, x1, y1).unwrap()
    }

    #[test]
    fn iou_fixtures() {
        assert_eq!(iou(&bx(0., 0., 2., 2.), &bx(0., 0., 2., 2.)), 1.0);
        assert_eq!(iou(&bx(0., 0., 1., 1.), &bx(5., 5., 6., 6.)), 0.0);
        assert!((iou(&bx(0., 0., 2., 2.), &bx(1., 1., 3., 3.)) - 1.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn iou_degenerate_is_zero() {
        let p = bx(1., 1., 1., 1.);
        assert_eq!(iou(&p, &p), 0.0);
        assert_eq!(iou(&p, &bx(0., 0., 2., 2.)), 0.0);
    }

    #[test]
    fn rejects_invalid_boxes() {
        assert!(BBox::new(2., 0., 1., 1.).is_err());
        assert!(BBox::new(f64::NAN, 0., 1., 1.).is_err());
        assert!(ScoredBox::new(bx(0., 0., 1., 1.), 1.5).is_err());
    }

    #[test]
    fn envelope_fixtures() {
        assert_eq!(envelope(&[bx(0., 0., 1., 1.)]).unwrap(), bx(0., 0., 1., 1.));
        assert_eq!(
            envelope(&[bx(0., 0., 10., 10.), bx(12., 0., 22., 10.)]).unwrap(),
            bx(0., 0., 22., 10.)
        );
        assert_eq!(
            envelope(&[bx(0., 0., 1., 1.), bx(0., 5., 1., 6.)]).unwrap(),
            bx(0., 0., 1., 6.)
        );
        assert!(matches!(envelope(&[]), Err(Error::EmptyGroup)));
    }

    #[test]
    fn merge_fixtures() {
        let pair = [bx(0., 0., 10., 10.), bx(12., 0., 22., 10.)];
        assert_eq!(
            merge_boxes(&pair, &MergeParams::absolute(2., 5.)).unwrap(),
            vec![bx(0., 0., 22., 10.)]
        );
        assert_eq!(
            merge_boxes(&pair, &MergeParams::absolute(2., 1.)).unwrap(),
            pair.to_vec()
        );
        let stacked = [bx(0., 0., 10., 10.), bx(0., 30., 10., 40.)];
        assert_eq!(
            merge_boxes(&stacked, &MergeParams::absolute(2., 5.)).unwrap(),
            stacked.to_vec()
        );
    }

    #[test]
    fn merge_trivial_inputs() {
        let p = MergeParams::default();
        assert!(merge_boxes(&[], &p).unwrap().is_empty());
        let one = [bx(3., 4., 5., 9.)];
        assert_eq!(merge_boxes(&one, &p).unwrap(), one.to_vec());
    }

    #[test]
    fn nested_box_is_fused() {
        // Tall box and a small one inside it start in different line groups.
        let boxes = [bx(0., 0., 10., 100.), bx(2., 40., 4., 42.)];
        let out = merge_boxes(&boxes, &MergeParams::absolute(1., 1.)).unwrap();
        assert_eq!(out, vec![bx(0., 0., 10., 100.)]);
    }

    #[test]
    fn relative_mode_scales_with_median_height() {
        // Heights 10; gap 8 <= 1.0 * 10 merges, gap 12 does not.
        let near = [bx(0., 0., 10., 10.), bx(18., 0., 28., 10.)];
        let far = [bx(0., 0., 10., 10.), bx(22., 0., 32., 10.)];
        let p = MergeParams::default();
        assert_eq!(merge_boxes(&near, &p).unwrap().len(), 1);
        assert_eq!(merge_boxes(&far, &p).unwrap().len(), 2);
        // Same layout at 3× scale behaves identically.
        let far3: Vec<_> = far.iter().map(|b| b.scale(3.0)).collect();
        assert_eq!(merge_boxes(&far3, &p).unwrap().len(), 2);
        let resolved = p.resolve(&near);
        assert_eq!(resolved, MergeParams::absolute(5.0, 10.0));
    }

    #[test]
    fn characters_merge_into_lines() {
        let mut chars = Vec::new();
        for line in 0..3 {
            for c in 0..6 {
                let x = c as f64 * 9.0;
                let y = line as f64 * 20.0 + (c % 2) as f64;
                chars.push(bx(x, y, x + 8.0, y + 10.0));
            }
        }
        let out = merge_boxes(&chars, &MergeParams::default()).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(out[0], bx(0., 0., 53., 11.));
    }

    #[test]
    fn negative_thresholds_rejected() {
        assert!(merge_boxes(&[], &MergeParams::absolute(-1., 0.)).is_err());
    }
}
