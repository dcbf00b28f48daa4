//! Gaze-conditioned processing: pair frames with gaze samples, cut a square
//! window around the gaze point and run the pipeline only inside it.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engines::{
    run_pipeline, Detector, FrameContext, PipelineOptions, Recognizer, TextRegion,
};
use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::raster::Image;

/// One gaze point in full-frame pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeSample {
    #[serde(rename = "timestamp_ns")]
    pub timestamp_ns: i64,
    #[serde(rename = "gaze_x_px")]
    pub x: f64,
    #[serde(rename = "gaze_y_px")]
    pub y: f64,
}

impl GazeSample {
    pub fn validate(&self, width: u32, height: u32) -> Result<()> {
        let inside =
            (0.0..width as f64).contains(&self.x) && (0.0..height as f64).contains(&self.y);
        if !inside {
            return Err(Error::InvalidParameter(format!(
                "gaze ({}, {}) lies outside the {width}x{height} frame",
                self.x, self.y
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoiParams {
    /// Window side as a fraction of the frame width.
    pub fraction: f64,
}

impl Default for RoiParams {
    fn default() -> Self {
        RoiParams {
            fraction: 1.0 / 16.0,
        }
    }
}

impl RoiParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "window fraction must lie in (0, 1], got {}",
                self.fraction
            )));
        }
        Ok(())
    }

    /// Window side for a frame `width` pixels wide, at least one pixel.
    pub fn side(&self, width: u32) -> u32 {
        ((width as f64 * self.fraction).round() as u32).max(1)
    }
}

/// Pairs each frame with the gaze sample nearest in time, or `None` when
/// the nearest one is more than `tolerance_ns` away. Equidistant samples
/// resolve to the earlier one.
pub fn align_gaze<S: Clone>(
    frames: &[(S, i64)],
    track: &[GazeSample],
    tolerance_ns: u64,
) -> Result<Vec<(S, Option<GazeSample>)>> {
    if let Some(i) = track
        .windows(2)
        .position(|w| w[1].timestamp_ns <= w[0].timestamp_ns)
    {
        return Err(Error::UnsortedTrack { index: i + 1 });
    }
    Ok(frames
        .iter()
        .map(|(id, t)| {
            let after = track.partition_point(|s| s.timestamp_ns < *t);
            let candidates = [after.checked_sub(1), (after < track.len()).then_some(after)];
            let best = candidates
                .into_iter()
                .flatten()
                .min_by_key(|&i| (track[i].timestamp_ns.abs_diff(*t), i))
                .filter(|&i| track[i].timestamp_ns.abs_diff(*t) <= tolerance_ns)
                .map(|i| track[i]);
            (id.clone(), best)
        })
        .collect())
}

/// Square window of side `round(width × fraction)` centred on the gaze
/// point, shifted (never shrunk) to lie inside the frame. A side larger than
/// a frame dimension is clipped to that dimension.
pub fn gaze_window(gaze: &GazeSample, width: u32, height: u32, params: &RoiParams) -> BBox {
    let s = params.side(width);
    let place = |centre: f64, side: u32, extent: u32| -> (f64, f64) {
        let side = side.min(extent) as f64;
        let start = (centre - side / 2.0)
            .round()
            .clamp(0.0, extent as f64 - side);
        (start, start + side)
    };
    let (x_min, x_max) = place(gaze.x, s, width);
    let (y_min, y_max) = place(gaze.y, s, height);
    BBox {
        x_min,
        y_min,
        x_max,
        y_max,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GazeOutput {
    pub window: BBox,
    /// Regions in full-frame coordinates.
    pub regions: Vec<TextRegion>,
    pub detector_pixels: usize,
}

/// Runs the pipeline on the gaze window of `frame` and maps the regions back
/// to full-frame coordinates. Regions touching a window edge that lies inside
/// the frame are marked `truncated`.
#[allow(clippy::too_many_arguments)]
pub fn gaze_run(
    frame: &Image,
    frame_id: &str,
    gaze: &GazeSample,
    params: &RoiParams,
    detector: &dyn Detector,
    recognizer: &dyn Recognizer,
    opts: &PipelineOptions,
) -> Result<GazeOutput> {
    params.validate()?;
    gaze.validate(frame.width(), frame.height())?;
    let window = gaze_window(gaze, frame.width(), frame.height(), params);
    let (x0, y0) = (window.x_min as u32, window.y_min as u32);
    let crop = frame.crop(x0, y0, window.width() as u32, window.height() as u32)?;
    let ctx = FrameContext::new(frame_id).cropped(window.x_min, window.y_min);
    let out = run_pipeline(&crop, &ctx, detector, recognizer, opts)?;

    let (fw, fh) = (frame.width() as f64, frame.height() as f64);
    let (cw, ch) = (window.width(), window.height());
    let regions = out
        .regions
        .into_iter()
        .map(|mut r| {
            let b = r.bbox;
            r.truncated = (b.x_min <= 0.0 && window.x_min > 0.0)
                || (b.y_min <= 0.0 && window.y_min > 0.0)
                || (b.x_max >= cw && window.x_max < fw)
                || (b.y_max >= ch && window.y_max < fh);
            r.bbox = b.translate(window.x_min, window.y_min);
            r
        })
        .collect();
    Ok(GazeOutput {
        window,
        regions,
        detector_pixels: out.detector_pixels,
    })
}

/// Reads a gaze track CSV with header `timestamp_ns,gaze_x_px,gaze_y_px`.
pub fn load_gaze_csv(path: &Path) -> Result<Vec<GazeSample>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::schema(path, e.to_string()))?;
    rdr.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| Error::schema(path, format!("row {}: {e}", i + 1))))
        .collect()
}

/// One row of a frame index CSV (`frame_id,timestamp_ns,path`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub frame_id: String,
    pub timestamp_ns: i64,
    pub path: PathBuf,
}

/// Reads a frame index; relative paths resolve against the index's folder.
pub fn load_frame_index(path: &Path) -> Result<Vec<FrameEntry>> {
    let base = path.parent().unwrap_or(Path::new("."));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::schema(path, e.to_string()))?;
    rdr.deserialize::<FrameEntry>()
        .enumerate()
        .map(|(i, row)| {
            let mut f = row.map_err(|e| Error::schema(path, format!("row {}: {e}", i + 1)))?;
            f.path = base.join(&f.path);
            Ok(f)
        })
        .collect()
}
