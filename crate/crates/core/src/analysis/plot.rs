//! Small raster charts drawn directly into an RGB image.

use super::CorrelationMatrix;
use crate::font::{for_each_ink_pixel, CELL};
use crate::raster::Image;

type Rgb = [u8; 3];

const WHITE: Rgb = [255, 255, 255];
const BLACK: Rgb = [0, 0, 0];
const GREY: Rgb = [190, 190, 190];
const BAR: Rgb = [70, 110, 170];

struct Canvas {
    img: Image,
}

impl Canvas {
    fn new(width: u32, height: u32) -> Canvas {
        Canvas {
            img: Image::rgb(width, height, WHITE.repeat((width * height) as usize))
                .expect("sized buffer"),
        }
    }

    fn put(&mut self, x: i64, y: i64, c: Rgb) {
        let (w, h) = (self.img.width() as i64, self.img.height() as i64);
        if x < 0 || y < 0 || x >= w || y >= h {
            return;
        }
        let i = ((y * w + x) * 3) as usize;
        self.img.data_mut()[i..i + 3].copy_from_slice(&c);
    }

    fn rect(&mut self, x0: i64, y0: i64, x1: i64, y1: i64, c: Rgb) {
        for y in y0..y1 {
            for x in x0..x1 {
                self.put(x, y, c);
            }
        }
    }

    fn text(&mut self, s: &str, x: i64, y: i64, c: Rgb) {
        let mut pts = Vec::new();
        for_each_ink_pixel(s, x, y, 1, |px, py| pts.push((px, py)));
        for (px, py) in pts {
            self.put(px, py, c);
        }
    }

    fn text_centered(&mut self, s: &str, cx: i64, y: i64, c: Rgb) {
        let w = (s.chars().count() as u32 * CELL) as i64;
        self.text(s, cx - w / 2, y, c);
    }
}

/// Blue for −1, white for 0, red for +1.
fn diverging(r: f64) -> Rgb {
    let t = r.clamp(-1.0, 1.0);
    let fade = |a: f64| (255.0 * (1.0 - a)).round() as u8;
    if t >= 0.0 {
        [255, fade(t), fade(t)]
    } else {
        [fade(-t), fade(-t), 255]
    }
}

fn short(name: &str) -> String {
    name.chars().take(8).collect()
}

/// Correlation heatmap with values printed in each cell; undefined cells are
/// grey and marked `n/a`.
pub fn heatmap(m: &CorrelationMatrix) -> Image {
    let k = m.variables.len() as i64;
    let cell = 56i64;
    let margin = 12 * CELL as i64;
    let size = (margin + k * cell + 8) as u32;
    let mut cv = Canvas::new(size.max(64), size.max(64));
    for (i, v) in m.variables.iter().enumerate() {
        let i = i as i64;
        let label = short(v.name());
        cv.text(&label, 4, margin + i * cell + cell / 2 - 4, BLACK);
        cv.text_centered(
            &label,
            margin + i * cell + cell / 2,
            margin - 3 * CELL as i64,
            BLACK,
        );
    }
    for i in 0..k {
        for j in 0..k {
            let (x0, y0) = (margin + j * cell, margin + i * cell);
            let (fill, label) = match m.values[i as usize][j as usize] {
                Some(r) => (diverging(r), format!("{r:.2}")),
                None => (GREY, "n/a".to_owned()),
            };
            cv.rect(x0, y0, x0 + cell - 1, y0 + cell - 1, fill);
            cv.text_centered(&label, x0 + cell / 2, y0 + cell / 2 - 4, BLACK);
        }
    }
    cv.img
}

/// Vertical bar chart of `(label, value)` pairs scaled to `max_value`.
/// Bars are numbered; the numbers are keyed to labels in a legend below.
pub fn bar_chart(title: &str, bars: &[(String, f64)], max_value: f64) -> Image {
    let line = CELL as i64 + 4;
    let (bar_w, gap, left, top, plot_h) = (24i64, 8i64, 56i64, 3 * line, 240i64);
    let x_axis = top + plot_h;
    let legend_top = x_axis + 2 * line;
    let longest = bars
        .iter()
        .map(|(l, _)| l.chars().count() + 5)
        .max()
        .unwrap_or(0);
    let width = (left + bars.len() as i64 * (bar_w + gap) + gap)
        .max(((title.chars().count().max(longest)) as i64 + 2) * CELL as i64);
    let height = legend_top + bars.len() as i64 * line + 8;
    let mut cv = Canvas::new(width as u32, height as u32);
    cv.text(title, 8, 8, BLACK);
    cv.rect(left - 2, top, left - 1, x_axis + 1, BLACK);
    cv.rect(left - 2, x_axis, width, x_axis + 1, BLACK);
    cv.text(&format!("{max_value:.2}"), 4, top, BLACK);
    cv.text("0", 4, x_axis - CELL as i64, BLACK);
    let scale = if max_value > 0.0 {
        plot_h as f64 / max_value
    } else {
        0.0
    };
    for (n, (label, value)) in bars.iter().enumerate() {
        let x0 = left + gap + n as i64 * (bar_w + gap);
        let h = (value.max(0.0).min(max_value) * scale).round() as i64;
        cv.rect(x0, x_axis - h, x0 + bar_w, x_axis, BAR);
        cv.text_centered(&(n + 1).to_string(), x0 + bar_w / 2, x_axis + 4, BLACK);
        cv.text(
            &format!("{:>2} {label}", n + 1),
            8,
            legend_top + n as i64 * line,
            BLACK,
        );
    }
    cv.img
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::CorrelationMethod;
    use crate::evaluation::Metric;

    #[test]
    fn colour_scale() {
        assert_eq!(diverging(0.0), WHITE);
        assert_eq!(diverging(1.0), [255, 0, 0]);
        assert_eq!(diverging(-1.0), [0, 0, 255]);
    }

    #[test]
    fn heatmap_size_and_grey() {
        let m = CorrelationMatrix {
            method: CorrelationMethod::Pearson,
            variables: vec![Metric::F1, Metric::Cer],
            values: vec![vec![Some(1.0), None], vec![None, None]],
            counts: vec![vec![2, 0], vec![0, 0]],
        };
        let img = heatmap(&m);
        assert_eq!(img.width(), img.height());
        let margin = 12 * CELL;
        // Top-left pixel of the undefined (0, 1) cell.
        assert_eq!(img.pixel(margin + 56 + 1, margin + 1), &GREY);
    }

    #[test]
    fn bars_draw() {
        let img = bar_chart("cer", &[("a".into(), 0.5), ("b".into(), 1.0)], 1.0);
        assert!(img.data().iter().any(|&v| v != 255));
    }
}
