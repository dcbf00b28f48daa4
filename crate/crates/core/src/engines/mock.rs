//! Deterministic oracle engines driven by ground truth.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Detector, FrameContext, Recognition, Recognizer};
use crate::dataset::GroundTruthRegion;
use crate::error::{Error, Result};
use crate::geometry::{iou, BBox, ScoredBox};
use crate::raster::Image;

pub const DEFAULT_MOCK_ALPHABET: &str =
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

/// Ground truth plus noise settings for one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockSpec {
    /// Regions in source-frame coordinates.
    pub regions: Vec<GroundTruthRegion>,
    #[serde(default)]
    pub drop_rate: f64,
    #[serde(default)]
    pub jitter_px: f64,
    #[serde(default)]
    pub char_error_rate: f64,
    #[serde(default)]
    pub seed: u64,
    /// Substitution alphabet for recognition noise.
    #[serde(default = "default_alphabet")]
    pub alphabet: String,
}

fn default_alphabet() -> String {
    DEFAULT_MOCK_ALPHABET.to_owned()
}

impl MockSpec {
    pub fn noiseless(regions: Vec<GroundTruthRegion>) -> Self {
        MockSpec {
            regions,
            drop_rate: 0.0,
            jitter_px: 0.0,
            char_error_rate: 0.0,
            seed: 0,
            alphabet: default_alphabet(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("drop_rate", self.drop_rate),
            ("char_error_rate", self.char_error_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        if !(self.jitter_px >= 0.0) {
            return Err(Error::InvalidParameter("jitter_px must be >= 0".into()));
        }
        Ok(())
    }
}

/// FNV-1a, stable across platforms and releases.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn rng_for(seed: u64, parts: &[&[u8]]) -> ChaCha8Rng {
    let mut h = seed ^ 0x5151_5151_5151_5151;
    for p in parts {
        h = h.rotate_left(17) ^ fnv1a(p);
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Ground-truth boxes mapped into `img`, each dropped with probability
/// `drop_rate` and each edge jittered uniformly within `±jitter_px`, then
/// clipped to the image. Randomness is seeded from `(seed, image id)`.
pub fn mock_detect(img: &Image, ctx: &FrameContext, spec: &MockSpec) -> Vec<ScoredBox> {
    let mut rng = rng_for(spec.seed, &[ctx.image_id.as_bytes()]);
    let (w, h) = (img.width() as f64, img.height() as f64);
    let mut out = Vec::new();
    for region in &spec.regions {
        // Draw the same number of variates per box so that dropping one box
        // does not shift the stream for the rest.
        let drop = rng.random::<f64>() < spec.drop_rate;
        let j: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..=1.0) * spec.jitter_px);
        if drop {
            continue;
        }
        let b = ctx.from_source(&region.bbox);
        let (x0, x1) = (b.x_min + j[0], b.x_max + j[2]);
        let (y0, y1) = (b.y_min + j[1], b.y_max + j[3]);
        let moved = BBox {
            x_min: x0.min(x1),
            y_min: y0.min(y1),
            x_max: x0.max(x1),
            y_max: y0.max(y1),
        };
        if let Some(c) = moved.clip(w, h) {
            if c.area() > 0.0 {
                let confidence = if spec.jitter_px > 0.0 {
                    1.0 - 0.25 * j.iter().map(|v| v.abs()).sum::<f64>() / (4.0 * spec.jitter_px)
                } else {
                    1.0
                };
                out.push(ScoredBox {
                    bbox: c,
                    confidence,
                });
            }
        }
    }
    out
}

/// Text of the ground-truth region with the highest IoU against the queried
/// region (empty if nothing overlaps), with each character substituted with
/// probability `char_error_rate` by another alphabet character.
pub fn mock_recognize(region: &Image, ctx: &FrameContext, spec: &MockSpec) -> String {
    let query = ctx.to_source(&region.bounds());
    let best = spec
        .regions
        .iter()
        .map(|r| (iou(&r.bbox, &query), r))
        .filter(|(v, _)| *v > 0.0)
        .max_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then_with(|| b.1.bbox.reading_cmp(&a.1.bbox))
        });
    let Some((_, gt)) = best else {
        return String::new();
    };
    if spec.char_error_rate == 0.0 {
        return gt.text.clone();
    }
    let coords: Vec<u8> = query
        .to_array()
        .iter()
        .flat_map(|v| ((v * 16.0).round() as i64).to_le_bytes())
        .collect();
    let mut rng = rng_for(spec.seed, &[ctx.image_id.as_bytes(), &coords]);
    let alphabet: Vec<char> = spec.alphabet.chars().collect();
    gt.text
        .chars()
        .map(|c| {
            let flip = rng.random::<f64>() < spec.char_error_rate;
            let others: Vec<char> = alphabet.iter().copied().filter(|a| *a != c).collect();
            let pick = rng.random_range(0..others.len().max(1));
            if flip && !others.is_empty() {
                others[pick]
            } else {
                c
            }
        })
        .collect()
}

/// Mock detector and recognizer in one. Ground truth is looked up by the
/// context's image id, falling back to a shared spec if one is set.
#[derive(Debug, Clone, Default)]
pub struct MockEngine {
    per_image: HashMap<String, MockSpec>,
    fallback: Option<MockSpec>,
}

impl MockEngine {
    pub fn new(spec: MockSpec) -> Result<Self> {
        spec.validate()?;
        Ok(MockEngine {
            per_image: HashMap::new(),
            fallback: Some(spec),
        })
    }

    pub fn per_image(specs: HashMap<String, MockSpec>) -> Result<Self> {
        for s in specs.values() {
            s.validate()?;
        }
        Ok(MockEngine {
            per_image: specs,
            fallback: None,
        })
    }

    fn spec(&self, ctx: &FrameContext) -> Option<&MockSpec> {
        self.per_image.get(&ctx.image_id).or(self.fallback.as_ref())
    }
}

impl Detector for MockEngine {
    fn name(&self) -> &str {
        "mock"
    }

    fn detect(&self, image: &Image, ctx: &FrameContext) -> Result<Vec<ScoredBox>> {
        Ok(self
            .spec(ctx)
            .map_or_else(Vec::new, |s| mock_detect(image, ctx, s)))
    }
}

impl Recognizer for MockEngine {
    fn name(&self) -> &str {
        "mock"
    }

    fn recognize(&self, region: &Image, ctx: &FrameContext) -> Result<Recognition> {
        let text = self
            .spec(ctx)
            .map_or_else(String::new, |s| mock_recognize(region, ctx, s));
        Ok(Recognition {
            text,
            confidence: 1.0,
        })
    }
}
