//! Synthetic poster dataset: renders a known text onto a white canvas with a
//! monospaced bitmap font, then degrades it per condition cell.
//!
//! Lighting is an affine gain/offset, distance is blur followed by a
//! downscale and re-upscale to the canvas, and resolution is the final
//! raster size. Ground-truth boxes are tight ink bounds of each text line
//! and are carried through every geometric step.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{
    ConditionMetadata, GroundTruthImage, GroundTruthRegion, Lighting, Manifest, ManifestEntry,
};
use crate::error::{Error, Result};
use crate::font;
use crate::geometry::BBox;
use crate::par;
use crate::preprocess::{adjust_brightness, resize, Interpolation};
use crate::raster::{Channels, Image};

pub const DEFAULT_POSTER_TEXT: &str = "Hello world! This is Joseph testing the Meta glasses";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LightingLevel {
    pub lighting: Lighting,
    pub gain: f64,
    #[serde(default)]
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceLevel {
    pub distance_m: f64,
    #[serde(default)]
    pub blur_sigma: f64,
    /// Integer downscale applied before re-upscaling to the canvas.
    #[serde(default = "one")]
    pub downscale: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub width: u32,
    pub height: u32,
}

/// One operation of a degradation chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum DegradationStep {
    Blur {
        sigma: f64,
    },
    /// Divide both dimensions by an integer factor.
    Downscale {
        factor: u32,
    },
    /// Resample to an explicit size.
    Resize {
        width: u32,
        height: u32,
    },
    Brightness {
        gain: f64,
        offset: f64,
    },
    /// Additive Gaussian noise on every channel.
    Noise {
        sigma: f64,
    },
}

impl DegradationStep {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match *self {
            DegradationStep::Blur { sigma } if !(sigma >= 0.0) => {
                bad(format!("blur sigma {sigma}"))
            }
            DegradationStep::Downscale { factor: 0 } => bad("downscale factor 0".into()),
            DegradationStep::Resize { width, height } if width == 0 || height == 0 => {
                bad("resize to zero size".into())
            }
            DegradationStep::Brightness { gain, offset } if !(gain > 0.0) || offset < 0.0 => {
                bad(format!("brightness gain {gain} offset {offset}"))
            }
            DegradationStep::Noise { sigma } if !(sigma >= 0.0) => {
                bad(format!("noise sigma {sigma}"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub text: String,
    /// Glyph height in pixels; rounded down to a multiple of 8.
    pub font_px: u32,
    pub canvas_width: u32,
    pub canvas_height: u32,
    pub max_line_chars: usize,
    /// Line pitch as a multiple of the glyph height.
    pub line_spacing: f64,
    pub lightings: Vec<LightingLevel>,
    pub distances: Vec<DistanceLevel>,
    pub resolutions: Vec<Resolution>,
    /// Extra steps applied to every cell after the condition steps.
    pub degradations: Vec<DegradationStep>,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    /// Four lightings × two distances × two resolutions at a quarter of the
    /// glasses' 1408² and 2880² capture sizes.
    fn default() -> Self {
        SyntheticSpec {
            text: DEFAULT_POSTER_TEXT.to_owned(),
            font_px: 24,
            canvas_width: 720,
            canvas_height: 720,
            max_line_chars: 20,
            line_spacing: 1.75,
            lightings: vec![
                LightingLevel {
                    lighting: Lighting::Natural,
                    gain: 0.85,
                    offset: 0.0,
                },
                LightingLevel {
                    lighting: Lighting::NaturalArtificial,
                    gain: 0.95,
                    offset: 0.0,
                },
                LightingLevel {
                    lighting: Lighting::NaturalEnhanced,
                    gain: 1.0,
                    offset: 0.0,
                },
                LightingLevel {
                    lighting: Lighting::Night,
                    gain: 0.3,
                    offset: 0.0,
                },
            ],
            distances: vec![
                DistanceLevel {
                    distance_m: 0.5,
                    blur_sigma: 0.0,
                    downscale: 1,
                },
                DistanceLevel {
                    distance_m: 1.0,
                    blur_sigma: 1.0,
                    downscale: 2,
                },
            ],
            resolutions: vec![
                Resolution {
                    width: 352,
                    height: 352,
                },
                Resolution {
                    width: 720,
                    height: 720,
                },
            ],
            degradations: Vec::new(),
            noise_sigma: 2.0,
            seed: 7,
        }
    }
}

impl SyntheticSpec {
    pub fn glyph_scale(&self) -> u32 {
        (self.font_px / font::CELL).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.canvas_width == 0 || self.canvas_height == 0 {
            return Err(Error::InvalidParameter("canvas must be non-empty".into()));
        }
        if self.text.trim().is_empty() {
            return Err(Error::InvalidParameter("poster text is empty".into()));
        }
        if self.max_line_chars == 0 || !(self.line_spacing >= 1.0) {
            return Err(Error::InvalidParameter(
                "max_line_chars must be > 0 and line_spacing >= 1".into(),
            ));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::InvalidParameter("noise sigma must be >= 0".into()));
        }
        for l in &self.lightings {
            DegradationStep::Brightness {
                gain: l.gain,
                offset: l.offset,
            }
            .validate()?;
        }
        for d in &self.distances {
            if !(d.distance_m > 0.0) {
                return Err(Error::InvalidParameter("distance must be positive".into()));
            }
            DegradationStep::Blur {
                sigma: d.blur_sigma,
            }
            .validate()?;
            DegradationStep::Downscale {
                factor: d.downscale,
            }
            .validate()?;
        }
        for r in &self.resolutions {
            DegradationStep::Resize {
                width: r.width,
                height: r.height,
            }
            .validate()?;
        }
        for s in &self.degradations {
            s.validate()?;
        }
        Ok(())
    }

    fn wrap_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = Vec::new();
        let mut current = String::new();
        for word in self.text.split_whitespace() {
            let extra = if current.is_empty() { 0 } else { 1 };
            if !current.is_empty()
                && current.chars().count() + extra + word.chars().count() > self.max_line_chars
            {
                lines.push(std::mem::take(&mut current));
            }
            if !current.is_empty() {
                current.push(' ');
            }
            current.push_str(word);
        }
        if !current.is_empty() {
            lines.push(current);
        }
        lines
    }

    /// Condition steps for one cell, in application order.
    pub fn cell_chain(
        &self,
        d: &DistanceLevel,
        r: &Resolution,
        l: &LightingLevel,
    ) -> Vec<DegradationStep> {
        let mut steps = Vec::new();
        if d.blur_sigma > 0.0 {
            steps.push(DegradationStep::Blur {
                sigma: d.blur_sigma,
            });
        }
        if d.downscale > 1 {
            steps.push(DegradationStep::Downscale {
                factor: d.downscale,
            });
            steps.push(DegradationStep::Resize {
                width: self.canvas_width,
                height: self.canvas_height,
            });
        }
        steps.push(DegradationStep::Resize {
            width: r.width,
            height: r.height,
        });
        steps.push(DegradationStep::Brightness {
            gain: l.gain,
            offset: l.offset,
        });
        steps.extend(self.degradations.iter().copied());
        if self.noise_sigma > 0.0 {
            steps.push(DegradationStep::Noise {
                sigma: self.noise_sigma,
            });
        }
        steps
    }
}

/// Renders the poster text in black on a white RGB canvas and returns the
/// image with one ground-truth region per text line.
pub fn render_poster(spec: &SyntheticSpec) -> Result<(Image, Vec<GroundTruthRegion>)> {
    spec.validate()?;
    let (w, h) = (spec.canvas_width, spec.canvas_height);
    let scale = spec.glyph_scale();
    let cell = (font::CELL * scale) as i64;
    let pitch = (cell as f64 * spec.line_spacing).round() as i64;
    let lines = spec.wrap_lines();
    let longest = lines.iter().map(|l| l.chars().count()).max().unwrap_or(0) as i64;
    let block_w = longest * cell;
    let block_h = (lines.len() as i64 - 1) * pitch + cell;
    let x0 = (w as i64 - block_w) / 2;
    let y0 = (h as i64 - block_h) / 2;

    let mut img = Image::filled(w, h, Channels::Rgb, 255)?;
    let mut regions = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let ly = y0 + i as i64 * pitch;
        let data = img.data_mut();
        font::for_each_ink_pixel(line, x0, ly, scale, |x, y| {
            if x >= 0 && y >= 0 && x < w as i64 && y < h as i64 {
                let idx = (y as usize * w as usize + x as usize) * 3;
                data[idx..idx + 3].copy_from_slice(&[0, 0, 0]);
            }
        });
        if let Some((bx0, by0, bx1, by1)) = font::text_ink_bounds(line, x0, ly, scale) {
            let b = BBox::new(bx0 as f64, by0 as f64, bx1 as f64, by1 as f64)?;
            let clipped = b.clip(w as f64, h as f64).ok_or_else(|| {
                Error::InvalidParameter("poster text does not fit the canvas".into())
            })?;
            if clipped != b {
                return Err(Error::InvalidParameter(
                    "poster text does not fit the canvas".into(),
                ));
            }
            regions.push(GroundTruthRegion::new(b, line.clone())?);
        }
    }
    Ok((img, regions))
}

fn scale_regions(regions: &mut [GroundTruthRegion], sx: f64, sy: f64) {
    for r in regions {
        r.bbox = BBox {
            x_min: r.bbox.x_min * sx,
            y_min: r.bbox.y_min * sy,
            x_max: r.bbox.x_max * sx,
            y_max: r.bbox.y_max * sy,
        };
    }
}

/// Applies `steps` in order, keeping ground-truth boxes aligned with every
/// geometric change. Noise draws from `rng`.
pub fn apply_chain(
    image: &Image,
    regions: &[GroundTruthRegion],
    steps: &[DegradationStep],
    rng: &mut impl Rng,
) -> Result<(Image, Vec<GroundTruthRegion>)> {
    let mut img = image.clone();
    let mut gt = regions.to_vec();
    for step in steps {
        step.validate()?;
        match *step {
            DegradationStep::Blur { sigma } => {
                if sigma > 0.0 {
                    img = Image::from_dynamic(img.to_dynamic().blur(sigma as f32))?;
                }
            }
            DegradationStep::Downscale { factor } => {
                let nw = (img.width() / factor).max(1);
                let nh = (img.height() / factor).max(1);
                let (sx, sy) = (
                    nw as f64 / img.width() as f64,
                    nh as f64 / img.height() as f64,
                );
                img = resize(&img, nw, nh, Interpolation::Bicubic)?;
                scale_regions(&mut gt, sx, sy);
            }
            DegradationStep::Resize { width, height } => {
                let (sx, sy) = (
                    width as f64 / img.width() as f64,
                    height as f64 / img.height() as f64,
                );
                img = resize(&img, width, height, Interpolation::Bicubic)?;
                scale_regions(&mut gt, sx, sy);
            }
            DegradationStep::Brightness { gain, offset } => {
                img = adjust_brightness(&img, gain, offset)?;
            }
            DegradationStep::Noise { sigma } => {
                if sigma > 0.0 {
                    let normal = Normal::new(0.0, sigma)
                        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
                    for v in img.data_mut() {
                        let n: f64 = normal.sample(rng);
                        *v = (*v as f64 + n).round().clamp(0.0, 255.0) as u8;
                    }
                }
            }
        }
    }
    Ok((img, gt))
}

fn cell_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Renders every lighting × distance × resolution cell into `out_dir`,
/// writing `images/<id>.png`, `manifest.json` and a copy of the `SyntheticSpec`.
pub fn generate_synthetic(spec: &SyntheticSpec, out_dir: &Path) -> Result<Manifest> {
    spec.validate()?;
    let (poster, regions) = render_poster(spec)?;
    let mut cells = Vec::new();
    for l in &spec.lightings {
        for d in &spec.distances {
            for r in &spec.resolutions {
                cells.push((*l, *d, *r));
            }
        }
    }
    std::fs::create_dir_all(out_dir.join("images")).map_err(|e| Error::io(out_dir, e))?;

    let entries: Vec<Result<ManifestEntry>> = par::map_range(cells.len(), |i| {
        let (l, d, r) = &cells[i];
        let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(spec.seed, i));
        let chain = spec.cell_chain(d, r, l);
        let (img, gt) = apply_chain(&poster, &regions, &chain, &mut rng)?;
        let id = format!(
            "{}_{}m_{}x{}",
            l.lighting.slug(),
            d.distance_m,
            r.width,
            r.height
        );
        let rel = PathBuf::from("images").join(format!("{id}.png"));
        img.save_png(&out_dir.join(&rel))?;
        Ok(ManifestEntry {
            id,
            image_path: out_dir.join(&rel),
            ground_truth: GroundTruthImage {
                image: rel,
                regions: gt,
                conditions: Some(ConditionMetadata {
                    lighting: l.lighting,
                    distance_m: d.distance_m,
                    width: r.width,
                    height: r.height,
                }),
            },
        })
    });
    let manifest = Manifest {
        entries: entries.into_iter().collect::<Result<_>>()?,
    };
    super::write_manifest(&out_dir.join("manifest.json"), &manifest)?;
    crate::io::write_json_atomic(&out_dir.join("synth_spec.json"), spec)?;
    Ok(manifest)
}
