//! Owned 8-bit rasters (grayscale or RGB) plus conversions to and from the
//! `image` crate for decoding, encoding and resampling.

use std::path::Path;

use image::{DynamicImage, GrayImage, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BBox;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channels {
    Gray,
    Rgb,
}

impl Channels {
    pub fn count(self) -> usize {
        match self {
            Channels::Gray => 1,
            Channels::Rgb => 3,
        }
    }
}

/// Row-major interleaved 8-bit raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: u32,
    height: u32,
    channels: Channels,
    data: Vec<u8>,
}

impl Image {
    pub fn new(width: u32, height: u32, channels: Channels, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "zero-size image {width}x{height}"
            )));
        }
        let expected = width as usize * height as usize * channels.count();
        if data.len() != expected {
            return Err(Error::InvalidImage(format!(
                "buffer holds {} bytes, {width}x{height}x{} needs {expected}",
                data.len(),
                channels.count()
            )));
        }
        Ok(Image {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn gray(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        Self::new(width, height, Channels::Gray, data)
    }

    pub fn rgb(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        Self::new(width, height, Channels::Rgb, data)
    }

    /// Image with every channel of every pixel set to `value`.
    pub fn filled(width: u32, height: u32, channels: Channels, value: u8) -> Result<Self> {
        let n = width as usize * height as usize * channels.count();
        Self::new(width, height, channels, vec![value; n])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> Channels {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Channel values of pixel `(x, y)`.
    pub fn pixel(&self, x: u32, y: u32) -> &[u8] {
        let c = self.channels.count();
        let i = (y as usize * self.width as usize + x as usize) * c;
        &self.data[i..i + c]
    }

    pub fn bounds(&self) -> BBox {
        BBox {
            x_min: 0.0,
            y_min: 0.0,
            x_max: self.width as f64,
            y_max: self.height as f64,
        }
    }

    /// Copies out the integer rectangle starting at `(x, y)`.
    pub fn crop(&self, x: u32, y: u32, width: u32, height: u32) -> Result<Image> {
        if width == 0 || height == 0 || x + width > self.width || y + height > self.height {
            return Err(Error::InvalidParameter(format!(
                "crop ({x},{y},{width}x{height}) outside {}x{}",
                self.width, self.height
            )));
        }
        let c = self.channels.count();
        let row = self.width as usize * c;
        let mut data = Vec::with_capacity(width as usize * height as usize * c);
        for yy in y..y + height {
            let start = yy as usize * row + x as usize * c;
            data.extend_from_slice(&self.data[start..start + width as usize * c]);
        }
        Image::new(width, height, self.channels, data)
    }

    /// Crops the pixels covered by `bbox`, rounding outward to whole pixels
    /// and clipping to the image. `None` if nothing remains.
    pub fn crop_box(&self, bbox: &BBox) -> Option<(Image, u32, u32)> {
        let clipped = bbox.clip(self.width as f64, self.height as f64)?;
        let x0 = clipped.x_min.floor() as u32;
        let y0 = clipped.y_min.floor() as u32;
        let x1 = (clipped.x_max.ceil() as u32).min(self.width);
        let y1 = (clipped.y_max.ceil() as u32).min(self.height);
        if x1 <= x0 || y1 <= y0 {
            return None;
        }
        self.crop(x0, y0, x1 - x0, y1 - y0)
            .ok()
            .map(|img| (img, x0, y0))
    }

    pub fn to_dynamic(&self) -> DynamicImage {
        match self.channels {
            Channels::Gray => DynamicImage::ImageLuma8(
                GrayImage::from_raw(self.width, self.height, self.data.clone())
                    .expect("buffer size checked at construction"),
            ),
            Channels::Rgb => DynamicImage::ImageRgb8(
                RgbImage::from_raw(self.width, self.height, self.data.clone())
                    .expect("buffer size checked at construction"),
            ),
        }
    }

    /// Converts from the `image` crate. Anything that is not 8-bit gray is
    /// converted to 8-bit RGB (alpha dropped).
    pub fn from_dynamic(img: DynamicImage) -> Result<Image> {
        match img {
            DynamicImage::ImageLuma8(g) => {
                let (w, h) = g.dimensions();
                Image::gray(w, h, g.into_raw())
            }
            other => {
                let rgb = other.to_rgb8();
                let (w, h) = rgb.dimensions();
                Image::rgb(w, h, rgb.into_raw())
            }
        }
    }

    pub fn load(path: &Path) -> Result<Image> {
        let img = image::open(path).map_err(|source| Error::Codec {
            path: path.to_path_buf(),
            source,
        })?;
        Image::from_dynamic(img)
    }

    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let mut buf = std::io::Cursor::new(Vec::new());
        self.to_dynamic()
            .write_to(&mut buf, image::ImageFormat::Png)
            .map_err(|source| Error::Codec {
                path: "<memory>".into(),
                source,
            })?;
        Ok(buf.into_inner())
    }

    /// Writes a PNG atomically.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, &self.encode_png()?)
    }
}
