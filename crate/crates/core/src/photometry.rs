//! Per-image lighting metrics: mean and standard deviation of brightness,
//! global luminance and contrast.
//!
//! Grayscale is `0.299 R + 0.587 G + 0.114 B`. It is accumulated in integer
//! thousandths so results do not depend on summation order (rows are reduced
//! in parallel when the `parallel` feature is on).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::raster::{Channels, Image};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LightingStats {
    pub mean_brightness: f64,
    /// Population standard deviation of the grayscale values.
    pub std_brightness: f64,
    /// Mean of the per-pixel maximum channel (HSV value).
    pub global_luminance: f64,
    /// Grayscale `max - min`.
    pub contrast: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Accum {
    sum: u128,
    sum_sq: u128,
    value_sum: u128,
    min: u32,
    max: u32,
    n: u64,
}

impl Accum {
    fn empty() -> Self {
        Accum {
            min: u32::MAX,
            ..Default::default()
        }
    }

    fn push(&mut self, luma_milli: u32, value: u8) {
        let l = luma_milli as u128;
        self.sum += l;
        self.sum_sq += l * l;
        self.value_sum += value as u128;
        self.min = self.min.min(luma_milli);
        self.max = self.max.max(luma_milli);
        self.n += 1;
    }

    fn merge(self, o: Accum) -> Accum {
        Accum {
            sum: self.sum + o.sum,
            sum_sq: self.sum_sq + o.sum_sq,
            value_sum: self.value_sum + o.value_sum,
            min: self.min.min(o.min),
            max: self.max.max(o.max),
            n: self.n + o.n,
        }
    }
}

#[inline]
fn luma_milli(px: &[u8]) -> (u32, u8) {
    match px {
        [g] => (*g as u32 * 1000, *g),
        [r, g, b] => (
            299 * *r as u32 + 587 * *g as u32 + 114 * *b as u32,
            (*r).max(*g).max(*b),
        ),
        _ => unreachable!("1 or 3 channels"),
    }
}

const ROWS_PER_TASK: usize = 64;

pub fn lighting_stats(img: &Image) -> Result<LightingStats> {
    if img.pixel_count() == 0 {
        return Err(Error::InvalidImage("zero-size image".into()));
    }
    let c = img.channels().count();
    let row_bytes = img.width() as usize * c;
    let rows = img.height() as usize;
    let tasks = rows.div_ceil(ROWS_PER_TASK);
    let data = img.data();
    let partials = par::map_range(tasks, |t| {
        let start = t * ROWS_PER_TASK * row_bytes;
        let end = ((t + 1) * ROWS_PER_TASK).min(rows) * row_bytes;
        let mut acc = Accum::empty();
        for px in data[start..end].chunks_exact(c) {
            let (l, v) = luma_milli(px);
            acc.push(l, v);
        }
        acc
    });
    let acc = partials.into_iter().fold(Accum::empty(), Accum::merge);
    Ok(finish(&acc, img.channels()))
}

fn finish(acc: &Accum, channels: Channels) -> LightingStats {
    let n = acc.n as u128;
    let nf = acc.n as f64;
    let mean = acc.sum as f64 / (1000.0 * nf);
    // n² σ² · 10⁶ = n Σl² − (Σl)², exact in integers.
    let var_scaled = n * acc.sum_sq - acc.sum * acc.sum;
    let std = (var_scaled as f64).sqrt() / (1000.0 * nf);
    let global = match channels {
        Channels::Gray => mean,
        Channels::Rgb => acc.value_sum as f64 / nf,
    };
    LightingStats {
        mean_brightness: mean,
        std_brightness: std,
        global_luminance: global,
        contrast: (acc.max - acc.min) as f64 / 1000.0,
    }
}
