//! Ground-truth and manifest ingestion, plus the synthetic poster generator.
//!
//! Ground truth uses one JSON layout everywhere:
//!
//! ```json
//! {"image": "images/a.png",
//!  "regions": [{"points": [[0,0],[10,0],[10,5],[0,5]], "text": "hi"},
//!              {"box": [0, 10, 40, 18], "text": "there"}],
//!  "conditions": {"lighting": "night", "distance_m": 1.0, "width": 1408, "height": 1408}}
//! ```
//!
//! A ground-truth file holds one such object or an array of them. A manifest
//! is `{"version": 1, "entries": [...]}` where each entry additionally may
//! carry an `"id"` (defaults to the image file stem). Paths are relative to
//! the file that names them.

mod ground_truth;
mod synth;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use ground_truth::{
    load_ground_truth, load_manifest, write_ground_truth, write_manifest, EntryError,
    GroundTruthImage, GroundTruthLoad, Manifest, ManifestEntry,
};
pub use synth::{
    apply_chain, generate_synthetic, render_poster, DegradationStep, DistanceLevel, LightingLevel,
    Resolution, SyntheticSpec, DEFAULT_POSTER_TEXT,
};

use crate::error::{Error, Result};
use crate::geometry::BBox;

/// The four lighting setups of the capture study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Lighting {
    #[serde(rename = "natural")]
    Natural,
    #[serde(rename = "natural+artificial")]
    NaturalArtificial,
    #[serde(rename = "natural+enhanced")]
    NaturalEnhanced,
    #[serde(rename = "night")]
    Night,
}

impl Lighting {
    pub const ALL: [Lighting; 4] = [
        Lighting::Natural,
        Lighting::NaturalArtificial,
        Lighting::NaturalEnhanced,
        Lighting::Night,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Lighting::Natural => "natural",
            Lighting::NaturalArtificial => "natural+artificial",
            Lighting::NaturalEnhanced => "natural+enhanced",
            Lighting::Night => "night",
        }
    }

    /// File-name friendly form.
    pub fn slug(self) -> &'static str {
        match self {
            Lighting::Natural => "natural",
            Lighting::NaturalArtificial => "natural-artificial",
            Lighting::NaturalEnhanced => "natural-enhanced",
            Lighting::Night => "night",
        }
    }
}

impl fmt::Display for Lighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Lighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Lighting::ALL
            .into_iter()
            .find(|l| l.as_str() == s || l.slug() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown lighting condition `{s}`")))
    }
}

/// Capture conditions of one image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionMetadata {
    pub lighting: Lighting,
    pub distance_m: f64,
    pub width: u32,
    pub height: u32,
}

impl ConditionMetadata {
    pub fn validate(&self) -> Result<()> {
        if !(self.distance_m > 0.0) || !self.distance_m.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "distance must be positive, got {}",
                self.distance_m
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParameter(
                "capture size must be non-zero".into(),
            ));
        }
        Ok(())
    }
}

/// Annotated text region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRegion {
    pub bbox: BBox,
    pub text: String,
}

impl GroundTruthRegion {
    pub fn new(bbox: BBox, text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        bbox.validate()?;
        if text.trim().is_empty() {
            return Err(Error::InvalidParameter(
                "ground-truth text must be non-empty".into(),
            ));
        }
        Ok(GroundTruthRegion { bbox, text })
    }
}
