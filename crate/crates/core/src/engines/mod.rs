//! Detector and recognizer contracts, the detect → merge → recognize
//! pipeline, deterministic mock engines and adapters for real engines.

mod batch;
pub mod east;
mod mock;
mod pipeline;
#[cfg(feature = "tesseract")]
pub mod tesseract;

use std::sync::Mutex;

use serde::{Deserialize, Serialize};

pub use batch::{run_batch, run_batch_seq, BatchItem, BatchOutcome, BatchSettings, ImageSource};
pub use mock::{mock_detect, mock_recognize, MockEngine, MockSpec, DEFAULT_MOCK_ALPHABET};
pub use pipeline::{run_pipeline, PipelineOptions, PipelineOutput};

use crate::error::Result;
use crate::geometry::{BBox, ScoredBox};
use crate::raster::Image;

/// Where an image sits relative to the source frame its ground truth is
/// annotated in: `source = offset + pixel / scale`.
///
/// Real engines ignore this. Mock engines use it to find their ground truth
/// after cropping and upscaling.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameContext {
    pub image_id: String,
    pub offset_x: f64,
    pub offset_y: f64,
    pub scale: f64,
}

impl FrameContext {
    pub fn new(image_id: impl Into<String>) -> Self {
        FrameContext {
            image_id: image_id.into(),
            offset_x: 0.0,
            offset_y: 0.0,
            scale: 1.0,
        }
    }

    /// Context of a crop whose top-left is at pixel `(x, y)` of this image.
    pub fn cropped(&self, x: f64, y: f64) -> Self {
        FrameContext {
            offset_x: self.offset_x + x / self.scale,
            offset_y: self.offset_y + y / self.scale,
            ..self.clone()
        }
    }

    /// Context after enlarging this image by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        FrameContext {
            scale: self.scale * factor,
            ..self.clone()
        }
    }

    pub fn to_source(&self, b: &BBox) -> BBox {
        b.scale(1.0 / self.scale)
            .translate(self.offset_x, self.offset_y)
    }

    pub fn from_source(&self, b: &BBox) -> BBox {
        b.translate(-self.offset_x, -self.offset_y)
            .scale(self.scale)
    }
}

/// Text read from one region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recognition {
    pub text: String,
    pub confidence: f64,
}

pub trait Detector: Send + Sync {
    fn name(&self) -> &str;

    /// Whether concurrent `detect` calls on one instance are allowed.
    fn reentrant(&self) -> bool {
        true
    }

    /// Returns boxes inside `image`'s bounds, in `image` pixel coordinates.
    fn detect(&self, image: &Image, ctx: &FrameContext) -> Result<Vec<ScoredBox>>;
}

pub trait Recognizer: Send + Sync {
    fn name(&self) -> &str;

    fn reentrant(&self) -> bool {
        true
    }

    /// Reads the text in a cropped region. An empty string means nothing
    /// was read.
    fn recognize(&self, region: &Image, ctx: &FrameContext) -> Result<Recognition>;
}

/// Serializes calls into a non-reentrant engine so it can be shared by a
/// worker pool.
pub struct Exclusive<E> {
    inner: E,
    lock: Mutex<()>,
}

impl<E> Exclusive<E> {
    pub fn new(inner: E) -> Self {
        Exclusive {
            inner,
            lock: Mutex::new(()),
        }
    }
}

impl<E: Detector> Detector for Exclusive<E> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn detect(&self, image: &Image, ctx: &FrameContext) -> Result<Vec<ScoredBox>> {
        let _guard = self.lock.lock().unwrap_or_else(|p| p.into_inner());
        self.inner.detect(image, ctx)
    }
}

impl<E: Recognizer> Recognizer for Exclusive<E> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn recognize(&self, region: &Image, ctx: &FrameContext) -> Result<Recognition> {
        let _guard = self.lock.lock().unwrap_or_else(|p| p.into_inner());
        self.inner.recognize(region, ctx)
    }
}

/// A merged, recognized text region in original-image coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextRegion {
    pub bbox: BBox,
    pub text: String,
    /// Detection confidence (maximum over the merged detector boxes).
    pub confidence: f64,
    pub text_confidence: f64,
    /// The recognizer failed on this region; `text` is empty.
    pub failed: bool,
    /// The region was cut by a processing window edge.
    pub truncated: bool,
}

impl TextRegion {
    pub fn new(bbox: BBox, text: impl Into<String>, confidence: f64) -> Self {
        TextRegion {
            bbox,
            text: text.into(),
            confidence,
            text_confidence: 1.0,
            failed: false,
            truncated: false,
        }
    }
}

/// Engine configuration block of a run config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    /// `mock`, `east`, `crnn` or `tesseract`.
    pub engine: String,
    pub model_path: Option<std::path::PathBuf>,
    pub score_threshold: f64,
    pub nms_threshold: f64,
    /// Passed through to the engine untouched.
    pub device: Option<String>,
    /// Noise knobs for the mock engine.
    pub drop_rate: f64,
    pub jitter_px: f64,
    pub char_error_rate: f64,
    pub alphabet: Option<String>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            engine: "mock".into(),
            model_path: None,
            score_threshold: 0.5,
            nms_threshold: 0.4,
            device: None,
            drop_rate: 0.0,
            jitter_px: 0.0,
            char_error_rate: 0.0,
            alphabet: None,
        }
    }
}
