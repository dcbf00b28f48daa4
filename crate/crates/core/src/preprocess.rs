//! Preprocessing operators applied ahead of detection: integer-factor
//! upscaling and affine brightness enhancement gated on low light.

use image::imageops::{self, FilterType};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::photometry::{lighting_stats, LightingStats};
use crate::raster::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    #[default]
    Bicubic,
    Nearest,
}

/// Enlarges `img` by an integer `factor` in both dimensions.
pub fn upscale(img: &Image, factor: u32, interpolation: Interpolation) -> Result<Image> {
    if factor < 1 {
        return Err(Error::InvalidParameter(
            "upscale factor must be >= 1".into(),
        ));
    }
    if factor == 1 {
        return Ok(img.clone());
    }
    let (w, h) = (img.width() * factor, img.height() * factor);
    match interpolation {
        Interpolation::Nearest => Ok(upscale_nearest(img, factor)),
        Interpolation::Bicubic => {
            let dynamic = img.to_dynamic().resize_exact(w, h, FilterType::CatmullRom);
            Image::from_dynamic(dynamic)
        }
    }
}

fn upscale_nearest(img: &Image, factor: u32) -> Image {
    let c = img.channels().count();
    let f = factor as usize;
    let src_row = img.width() as usize * c;
    let dst_row = src_row * f;
    let mut out = Vec::with_capacity(img.data().len() * f * f);
    let mut row = Vec::with_capacity(dst_row);
    for src in img.data().chunks_exact(src_row) {
        row.clear();
        for px in src.chunks_exact(c) {
            for _ in 0..f {
                row.extend_from_slice(px);
            }
        }
        for _ in 0..f {
            out.extend_from_slice(&row);
        }
    }
    Image::new(
        img.width() * factor,
        img.height() * factor,
        img.channels(),
        out,
    )
    .expect("dimensions scale with the buffer")
}

/// Resamples to an explicit size (used by the synthetic generator).
pub fn resize(img: &Image, width: u32, height: u32, interpolation: Interpolation) -> Result<Image> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter(
            "resize target must be non-empty".into(),
        ));
    }
    if (width, height) == (img.width(), img.height()) {
        return Ok(img.clone());
    }
    let filter = match interpolation {
        Interpolation::Bicubic => FilterType::CatmullRom,
        Interpolation::Nearest => FilterType::Nearest,
    };
    let dynamic = match img.to_dynamic() {
        image::DynamicImage::ImageLuma8(g) => {
            image::DynamicImage::ImageLuma8(imageops::resize(&g, width, height, filter))
        }
        other => image::DynamicImage::ImageRgb8(imageops::resize(
            &other.to_rgb8(),
            width,
            height,
            filter,
        )),
    };
    Image::from_dynamic(dynamic)
}

/// `v' = clamp(gain·v + offset, 0, 255)` on every channel, rounded to nearest.
pub fn adjust_brightness(img: &Image, gain: f64, offset: f64) -> Result<Image> {
    if !(gain > 0.0) || !gain.is_finite() || !offset.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "brightness gain must be > 0 and finite (gain {gain}, offset {offset})"
        )));
    }
    let lut: Vec<u8> = (0..=255u32)
        .map(|v| (gain * v as f64 + offset).round().clamp(0.0, 255.0) as u8)
        .collect();
    let mut out = img.clone();
    for v in out.data_mut() {
        *v = lut[*v as usize];
    }
    Ok(out)
}

/// True when the image counts as low light (`mean_brightness < threshold`).
pub fn select_low_light(stats: &LightingStats, threshold: f64) -> bool {
    stats.mean_brightness < threshold
}

pub const DEFAULT_LOW_LIGHT_THRESHOLD: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpscaleStep {
    pub factor: u32,
    #[serde(default)]
    pub interpolation: Interpolation,
    /// Only images narrower than this are upscaled (`None`: all images).
    #[serde(default)]
    pub below_width: Option<u32>,
}

impl Default for UpscaleStep {
    fn default() -> Self {
        UpscaleStep {
            factor: 2,
            interpolation: Interpolation::Bicubic,
            below_width: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrightnessStep {
    pub gain: f64,
    pub offset: f64,
    /// Only images with mean brightness below this are touched
    /// (`None`: all images).
    #[serde(default = "default_threshold")]
    pub low_light_threshold: Option<f64>,
}

fn default_threshold() -> Option<f64> {
    Some(DEFAULT_LOW_LIGHT_THRESHOLD)
}

impl Default for BrightnessStep {
    fn default() -> Self {
        BrightnessStep {
            gain: 1.5,
            offset: 20.0,
            low_light_threshold: default_threshold(),
        }
    }
}

/// Optional brightness enhancement followed by optional upscaling.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PreprocessChain {
    #[serde(default)]
    pub brightness: Option<BrightnessStep>,
    #[serde(default)]
    pub upscale: Option<UpscaleStep>,
}

/// Result of running a chain: the processed image and the factor by which
/// coordinates grew.
#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub image: Image,
    pub scale: u32,
    pub brightened: bool,
}

impl PreprocessChain {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn is_identity(&self) -> bool {
        self.brightness.is_none() && self.upscale.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(u) = &self.upscale {
            if u.factor < 1 {
                return Err(Error::InvalidParameter(
                    "upscale factor must be >= 1".into(),
                ));
            }
        }
        if let Some(b) = &self.brightness {
            if !(b.gain > 0.0) {
                return Err(Error::InvalidParameter(
                    "brightness gain must be > 0".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn apply(&self, img: &Image) -> Result<Preprocessed> {
        let mut out = img.clone();
        let mut brightened = false;
        if let Some(b) = &self.brightness {
            let gate = match b.low_light_threshold {
                Some(t) => select_low_light(&lighting_stats(img)?, t),
                None => true,
            };
            if gate {
                out = adjust_brightness(&out, b.gain, b.offset)?;
                brightened = true;
            }
        }
        let mut scale = 1;
        if let Some(u) = &self.upscale {
            if u.below_width.is_none_or(|w| img.width() < w) {
                out = upscale(&out, u.factor, u.interpolation)?;
                scale = u.factor;
            }
        }
        Ok(Preprocessed {
            image: out,
            scale,
            brightened,
        })
    }
}
