use std::path::PathBuf;
use std::sync::Arc;

use super::{run_pipeline, Detector, FrameContext, PipelineOptions, Recognizer, TextRegion};
use crate::dataset::{ConditionMetadata, GroundTruthRegion};
use crate::error::Result;
use crate::evaluation::{
    score_regions, DetectionSummary, EvalRecord, Normalization, DEFAULT_IOU_THRESHOLD,
};
use crate::par;
use crate::photometry::lighting_stats;
use crate::raster::Image;

/// Where a batch item's pixels come from.
#[derive(Debug, Clone)]
pub enum ImageSource {
    Path(PathBuf),
    Memory(Arc<Image>),
}

/// One image to run and score.
#[derive(Debug, Clone)]
pub struct BatchItem {
    pub id: String,
    pub source: ImageSource,
    pub ground_truth: Vec<GroundTruthRegion>,
    pub conditions: Option<ConditionMetadata>,
}

#[derive(Debug, Clone)]
pub struct BatchSettings {
    pub pipeline: PipelineOptions,
    pub iou_threshold: f64,
    pub normalization: Normalization,
}

impl Default for BatchSettings {
    fn default() -> Self {
        BatchSettings {
            pipeline: PipelineOptions::default(),
            iou_threshold: DEFAULT_IOU_THRESHOLD,
            normalization: Normalization::default(),
        }
    }
}

/// Result for one item. `error` is set when the image could not be
/// processed at all; `record` is then `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome {
    pub id: String,
    pub record: Option<EvalRecord>,
    pub regions: Vec<TextRegion>,
    /// Regions whose recognition failed.
    pub failed_regions: usize,
    pub error: Option<String>,
}

fn process(
    item: &BatchItem,
    detector: &dyn Detector,
    recognizer: &dyn Recognizer,
    settings: &BatchSettings,
) -> Result<(EvalRecord, Vec<TextRegion>)> {
    let loaded;
    let img: &Image = match &item.source {
        ImageSource::Memory(img) => img,
        ImageSource::Path(p) => {
            loaded = Image::load(p)?;
            &loaded
        }
    };
    let lighting = lighting_stats(img)?;
    let out = run_pipeline(
        img,
        &FrameContext::new(item.id.clone()),
        detector,
        recognizer,
        &settings.pipeline,
    )?;
    let (det, rec) = score_regions(
        &item.ground_truth,
        &out.regions,
        settings.iou_threshold,
        &settings.normalization,
    );
    let record = EvalRecord::new(
        item.id.clone(),
        item.conditions,
        lighting,
        Some(DetectionSummary::from(&det)),
        Some(rec),
    )?;
    Ok((record, out.regions))
}

fn outcome(
    item: &BatchItem,
    detector: &dyn Detector,
    recognizer: &dyn Recognizer,
    settings: &BatchSettings,
) -> BatchOutcome {
    match process(item, detector, recognizer, settings) {
        Ok((record, regions)) => BatchOutcome {
            id: item.id.clone(),
            record: Some(record),
            failed_regions: regions.iter().filter(|r| r.failed).count(),
            regions,
            error: None,
        },
        Err(e) => BatchOutcome {
            id: item.id.clone(),
            record: None,
            regions: Vec::new(),
            failed_regions: 0,
            error: Some(e.to_string()),
        },
    }
}

/// Runs and scores every item, one worker per image. Outcomes come back in
/// input order. Non-reentrant engines force sequential processing.
pub fn run_batch(
    items: &[BatchItem],
    detector: &dyn Detector,
    recognizer: &dyn Recognizer,
    settings: &BatchSettings,
) -> Vec<BatchOutcome> {
    if detector.reentrant() && recognizer.reentrant() {
        par::map(items, |item| outcome(item, detector, recognizer, settings))
    } else {
        run_batch_seq(items, detector, recognizer, settings)
    }
}

/// Sequential reference for [`run_batch`].
pub fn run_batch_seq(
    items: &[BatchItem],
    detector: &dyn Detector,
    recognizer: &dyn Recognizer,
    settings: &BatchSettings,
) -> Vec<BatchOutcome> {
    par::map_seq(items, |item| outcome(item, detector, recognizer, settings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engines::{MockEngine, MockSpec};
    use crate::geometry::BBox;
    use crate::raster::Channels;
    use std::collections::HashMap;

    #[test]
    fn parallel_matches_sequential() {
        let mut specs = HashMap::new();
        let mut items = Vec::new();
        for i in 0..12 {
            let gt = vec![GroundTruthRegion::new(
                BBox::new(5., 5. + i as f64, 50., 15. + i as f64).unwrap(),
                format!("line {i}"),
            )
            .unwrap()];
            specs.insert(
                format!("img{i}"),
                MockSpec {
                    jitter_px: 2.0,
                    char_error_rate: 0.2,
                    seed: 3,
                    ..MockSpec::noiseless(gt.clone())
                },
            );
            items.push(BatchItem {
                id: format!("img{i}"),
                source: ImageSource::Memory(Arc::new(
                    Image::filled(64, 64, Channels::Gray, i * 10).unwrap(),
                )),
                ground_truth: gt,
                conditions: None,
            });
        }
        let e = MockEngine::per_image(specs).unwrap();
        let settings = BatchSettings::default();
        let a = run_batch(&items, &e, &e, &settings);
        let b = run_batch_seq(&items, &e, &e, &settings);
        assert_eq!(a, b);
        assert!(a.iter().all(|o| o.error.is_none()));
    }

    #[test]
    fn missing_file_is_an_item_error() {
        let item = BatchItem {
            id: "gone".into(),
            source: ImageSource::Path("/definitely/not/here.png".into()),
            ground_truth: vec![],
            conditions: None,
        };
        let e = MockEngine::default();
        let out = run_batch(&[item], &e, &e, &BatchSettings::default());
        assert!(out[0].error.is_some());
        assert!(out[0].record.is_none());
    }
}
