//! Run configuration: one JSON document selecting engines, merge thresholds,
//! preprocessing, scoring policy and gaze settings.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::GroundTruthRegion;
use crate::engines::{
    BatchSettings, Detector, EngineConfig, MockEngine, MockSpec, PipelineOptions, Recognizer,
};
use crate::error::{Error, Result};
use crate::evaluation::{Normalization, DEFAULT_IOU_THRESHOLD};
use crate::gaze::RoiParams;
use crate::geometry::MergeParams;
use crate::preprocess::{BrightnessStep, PreprocessChain, UpscaleStep};

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreprocessMode {
    #[default]
    None,
    Upscale,
    Brightness,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub mode: PreprocessMode,
    pub upscale: UpscaleStep,
    pub brightness: BrightnessStep,
}

impl PreprocessConfig {
    pub fn chain(&self) -> PreprocessChain {
        let (b, u) = match self.mode {
            PreprocessMode::None => (false, false),
            PreprocessMode::Upscale => (false, true),
            PreprocessMode::Brightness => (true, false),
            PreprocessMode::Both => (true, true),
        };
        PreprocessChain {
            brightness: b.then_some(self.brightness),
            upscale: u.then_some(self.upscale),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GazeConfig {
    /// Window side as a fraction of frame width.
    pub fraction: f64,
    /// Maximum distance between a frame and its gaze sample.
    pub tolerance_ns: u64,
    /// Frame rate used to timestamp frames decoded from a video file.
    pub fps: f64,
    /// Ground truth in full-frame coordinates for mock engines.
    pub ground_truth: Option<PathBuf>,
}

impl Default for GazeConfig {
    fn default() -> Self {
        GazeConfig {
            fraction: 1.0 / 16.0,
            tolerance_ns: 25_000_000,
            fps: 20.0,
            ground_truth: None,
        }
    }
}

impl GazeConfig {
    pub fn roi(&self) -> RoiParams {
        RoiParams {
            fraction: self.fraction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub detector: EngineConfig,
    pub recognizer: EngineConfig,
    pub merge: MergeParams,
    pub preprocess: PreprocessConfig,
    pub normalization: Normalization,
    pub iou_threshold: f64,
    pub padding: f64,
    /// Worker count; `None` uses one per processor.
    pub jobs: Option<usize>,
    pub gaze: GazeConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            detector: EngineConfig::default(),
            recognizer: EngineConfig::default(),
            merge: MergeParams::default(),
            preprocess: PreprocessConfig::default(),
            normalization: Normalization::default(),
            iou_threshold: DEFAULT_IOU_THRESHOLD,
            padding: 0.0,
            jobs: None,
            gaze: GazeConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |e: Error| Error::Config(e.to_string());
        self.pipeline().validate().map_err(cfg_err)?;
        if !(self.iou_threshold > 0.0 && self.iou_threshold <= 1.0) {
            return Err(Error::Config(format!(
                "iou_threshold must lie in (0, 1], got {}",
                self.iou_threshold
            )));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        self.gaze.roi().validate().map_err(cfg_err)?;
        if !(self.gaze.fps > 0.0) {
            return Err(Error::Config("gaze.fps must be positive".into()));
        }
        for e in [&self.detector, &self.recognizer] {
            self.mock_spec(e, vec![]).validate().map_err(cfg_err)?;
        }
        Ok(())
    }

    pub fn pipeline(&self) -> PipelineOptions {
        PipelineOptions {
            merge: self.merge,
            preprocess: self.preprocess.chain(),
            padding: self.padding,
        }
    }

    pub fn batch_settings(&self) -> BatchSettings {
        BatchSettings {
            pipeline: self.pipeline(),
            iou_threshold: self.iou_threshold,
            normalization: self.normalization,
        }
    }

    fn mock_spec(&self, e: &EngineConfig, regions: Vec<GroundTruthRegion>) -> MockSpec {
        MockSpec {
            regions,
            drop_rate: e.drop_rate,
            jitter_px: e.jitter_px,
            char_error_rate: e.char_error_rate,
            seed: self.seed,
            alphabet: e
                .alphabet
                .clone()
                .unwrap_or_else(|| crate::engines::DEFAULT_MOCK_ALPHABET.to_owned()),
        }
    }

    fn mock(
        &self,
        e: &EngineConfig,
        gt: &HashMap<String, Vec<GroundTruthRegion>>,
    ) -> Result<MockEngine> {
        MockEngine::per_image(
            gt.iter()
                .map(|(id, regions)| (id.clone(), self.mock_spec(e, regions.clone())))
                .collect(),
        )
    }

    /// Builds the configured detector. Mock engines read their ground truth
    /// from `gt`, keyed by image id.
    pub fn build_detector(
        &self,
        gt: &HashMap<String, Vec<GroundTruthRegion>>,
    ) -> Result<Box<dyn Detector>> {
        match self.detector.engine.as_str() {
            "mock" => Ok(Box::new(self.mock(&self.detector, gt)?)),
            "east" => Err(Error::EngineUnavailable {
                name: "east".into(),
                reason: "no neural network runtime is bundled; implement engines::east::EastModel to plug one in"
                    .into(),
            }),
            other => Err(Error::Config(format!("unknown detector engine `{other}`"))),
        }
    }

    pub fn build_recognizer(
        &self,
        gt: &HashMap<String, Vec<GroundTruthRegion>>,
    ) -> Result<Box<dyn Recognizer>> {
        match self.recognizer.engine.as_str() {
            "mock" => Ok(Box::new(self.mock(&self.recognizer, gt)?)),
            "crnn" => Err(Error::EngineUnavailable {
                name: "crnn".into(),
                reason: "no neural network runtime is bundled".into(),
            }),
            "tesseract" => tesseract_recognizer(),
            other => Err(Error::Config(format!(
                "unknown recognizer engine `{other}`"
            ))),
        }
    }

    /// Engine identifiers for run metadata.
    pub fn engine_ids(&self) -> (String, String) {
        (self.detector.engine.clone(), self.recognizer.engine.clone())
    }
}

#[cfg(feature = "tesseract")]
fn tesseract_recognizer() -> Result<Box<dyn Recognizer>> {
    Ok(Box::new(
        crate::engines::tesseract::TesseractRecognizer::probe()?,
    ))
}

#[cfg(not(feature = "tesseract"))]
fn tesseract_recognizer() -> Result<Box<dyn Recognizer>> {
    Err(Error::EngineUnavailable {
        name: "tesseract".into(),
        reason: "built without the `tesseract` feature".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        let cfg: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.iou_threshold, 0.5);
        assert!(cfg.pipeline().preprocess.is_identity());
    }

    #[test]
    fn modes_select_steps() {
        let cfg: RunConfig = serde_json::from_str(r#"{"preprocess": {"mode": "both"}}"#).unwrap();
        let chain = cfg.pipeline().preprocess;
        assert!(chain.brightness.is_some() && chain.upscale.is_some());
        assert_eq!(chain.upscale.unwrap().factor, 2);
    }

    #[test]
    fn typos_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"iou_treshold": 0.5}"#).is_err());
    }

    #[test]
    fn bad_values() {
        let cfg = RunConfig {
            iou_threshold: 0.0,
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = RunConfig::default();
        cfg.detector.drop_rate = 2.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn real_engines_unavailable() {
        let mut cfg = RunConfig::default();
        cfg.detector.engine = "east".into();
        assert!(matches!(
            cfg.build_detector(&HashMap::new()),
            Err(Error::EngineUnavailable { .. })
        ));
        cfg.detector.engine = "yolo".into();
        assert!(matches!(
            cfg.build_detector(&HashMap::new()),
            Err(Error::Config(_))
        ));
    }
}
