use serde::{Deserialize, Serialize};

use super::{Detector, FrameContext, Recognizer, TextRegion};
use crate::error::{Error, Result};
use crate::geometry::{merge_boxes, BBox, MergeParams};
use crate::par;
use crate::preprocess::PreprocessChain;
use crate::raster::Image;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineOptions {
    pub merge: MergeParams,
    pub preprocess: PreprocessChain,
    /// Margin in pixels added around each merged box before cropping.
    pub padding: f64,
}

impl PipelineOptions {
    pub fn validate(&self) -> Result<()> {
        self.merge.validate()?;
        self.preprocess.validate()?;
        if !(self.padding >= 0.0) || !self.padding.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "padding must be a finite value >= 0, got {}",
                self.padding
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    /// Regions in the coordinate frame of the input image, reading order.
    pub regions: Vec<TextRegion>,
    /// Pixels handed to the detector.
    pub detector_pixels: usize,
    /// Coordinate growth applied by preprocessing.
    pub scale: u32,
    pub brightened: bool,
}

/// Preprocess, detect, merge, crop and recognize.
///
/// `ctx` describes `img` (use [`FrameContext::new`] for a full frame). A
/// recognizer error on one region leaves that region with empty text and
/// `failed` set; a detector error aborts.
pub fn run_pipeline(
    img: &Image,
    ctx: &FrameContext,
    detector: &dyn Detector,
    recognizer: &dyn Recognizer,
    opts: &PipelineOptions,
) -> Result<PipelineOutput> {
    opts.validate()?;
    let pre = opts.preprocess.apply(img)?;
    let work = &pre.image;
    let k = pre.scale as f64;
    let work_ctx = ctx.scaled(k);
    let (ww, wh) = (work.width() as f64, work.height() as f64);

    let detections: Vec<_> = detector
        .detect(work, &work_ctx)?
        .into_iter()
        .filter_map(|d| d.bbox.clip(ww, wh).map(|b| (b, d.confidence)))
        .filter(|(b, _)| b.area() > 0.0)
        .collect();
    let boxes: Vec<BBox> = detections.iter().map(|(b, _)| *b).collect();
    let merged = merge_boxes(&boxes, &opts.merge)?;

    let recognize_one = |m: &BBox| -> TextRegion {
        let confidence = detections
            .iter()
            .filter(|(b, _)| m.contains(b))
            .map(|(_, c)| *c)
            .fold(0.0_f64, f64::max);
        let padded = BBox {
            x_min: m.x_min - opts.padding,
            y_min: m.y_min - opts.padding,
            x_max: m.x_max + opts.padding,
            y_max: m.y_max + opts.padding,
        };
        let (text, text_confidence, failed) =
            match padded.clip(ww, wh).and_then(|b| work.crop_box(&b)) {
                Some((crop, x, y)) => {
                    match recognizer.recognize(&crop, &work_ctx.cropped(x as f64, y as f64)) {
                        Ok(r) => (r.text, r.confidence.clamp(0.0, 1.0), false),
                        Err(_) => (String::new(), 0.0, true),
                    }
                }
                None => (String::new(), 0.0, true),
            };
        let bbox = m
            .scale(1.0 / k)
            .clip(img.width() as f64, img.height() as f64)
            .unwrap_or(*m);
        TextRegion {
            bbox,
            text,
            confidence,
            text_confidence,
            failed,
            truncated: false,
        }
    };
    let regions = if recognizer.reentrant() {
        par::map(&merged, recognize_one)
    } else {
        par::map_seq(&merged, recognize_one)
    };

    Ok(PipelineOutput {
        regions,
        detector_pixels: work.pixel_count(),
        scale: pre.scale,
        brightened: pre.brightened,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::GroundTruthRegion;
    use crate::engines::{MockEngine, MockSpec, Recognition};
    use crate::geometry::ScoredBox;
    use crate::preprocess::{Interpolation, UpscaleStep};
    use crate::raster::Channels;

    fn engine() -> MockEngine {
        MockEngine::new(MockSpec::noiseless(vec![
            GroundTruthRegion::new(BBox::new(10., 10., 60., 20.).unwrap(), "Hello").unwrap(),
            GroundTruthRegion::new(BBox::new(10., 40., 90., 50.).unwrap(), "world").unwrap(),
        ]))
        .unwrap()
    }

    #[test]
    fn noiseless_identity() {
        let img = Image::filled(100, 80, Channels::Gray, 200).unwrap();
        let e = engine();
        let out = run_pipeline(
            &img,
            &FrameContext::new("x"),
            &e,
            &e,
            &PipelineOptions::default(),
        )
        .unwrap();
        let texts: Vec<_> = out.regions.iter().map(|r| r.text.as_str()).collect();
        assert_eq!(texts, ["Hello", "world"]);
        assert_eq!(out.regions[1].bbox, BBox::new(10., 40., 90., 50.).unwrap());
        assert_eq!(out.detector_pixels, 8000);
    }

    #[test]
    fn upscale_round_trip() {
        let img = Image::filled(100, 80, Channels::Gray, 200).unwrap();
        let e = engine();
        let opts = PipelineOptions {
            preprocess: PreprocessChain {
                brightness: None,
                upscale: Some(UpscaleStep {
                    factor: 2,
                    interpolation: Interpolation::Nearest,
                    below_width: None,
                }),
            },
            ..Default::default()
        };
        let out = run_pipeline(&img, &FrameContext::new("x"), &e, &e, &opts).unwrap();
        assert_eq!(out.scale, 2);
        assert_eq!(out.detector_pixels, 4 * 8000);
        assert_eq!(out.regions[0].bbox, BBox::new(10., 10., 60., 20.).unwrap());
        assert_eq!(out.regions[0].text, "Hello");
    }

    struct Nothing;
    impl Detector for Nothing {
        fn name(&self) -> &str {
            "nothing"
        }
        fn detect(&self, _: &Image, _: &FrameContext) -> Result<Vec<ScoredBox>> {
            Ok(vec![])
        }
    }

    struct Broken;
    impl Recognizer for Broken {
        fn name(&self) -> &str {
            "broken"
        }
        fn recognize(&self, _: &Image, _: &FrameContext) -> Result<Recognition> {
            Err(Error::Engine {
                name: "broken".into(),
                reason: "boom".into(),
            })
        }
    }

    #[test]
    fn empty_detection() {
        let img = Image::filled(10, 10, Channels::Gray, 0).unwrap();
        let out = run_pipeline(
            &img,
            &FrameContext::new("x"),
            &Nothing,
            &engine(),
            &Default::default(),
        )
        .unwrap();
        assert!(out.regions.is_empty());
    }

    #[test]
    fn recognizer_failure_is_recorded() {
        let img = Image::filled(100, 80, Channels::Gray, 0).unwrap();
        let out = run_pipeline(
            &img,
            &FrameContext::new("x"),
            &engine(),
            &Broken,
            &Default::default(),
        )
        .unwrap();
        assert_eq!(out.regions.len(), 2);
        assert!(out.regions.iter().all(|r| r.failed && r.text.is_empty()));
    }
}
