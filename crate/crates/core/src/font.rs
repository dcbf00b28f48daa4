//! 8×8 bitmap glyphs for the synthetic poster and plot labels.
//!
//! Each glyph row is a byte whose bit 0 is the leftmost pixel. Characters
//! outside ASCII render as `?`.

use font8x8::legacy::BASIC_LEGACY;

pub const CELL: u32 = 8;

pub fn glyph(c: char) -> [u8; 8] {
    let code = if c.is_ascii() {
        c as usize
    } else {
        '?' as usize
    };
    BASIC_LEGACY[code]
}

/// Ink extents of one glyph in cell units: `(col_min, row_min, col_max, row_max)`
/// with exclusive max. `None` for blank glyphs (space).
pub fn ink_extent(c: char) -> Option<(u32, u32, u32, u32)> {
    let g = glyph(c);
    let mut ext: Option<(u32, u32, u32, u32)> = None;
    for (row, bits) in g.iter().enumerate() {
        for col in 0..8u32 {
            if bits & (1 << col) != 0 {
                let (r, cc) = (row as u32, col);
                ext = Some(match ext {
                    None => (cc, r, cc + 1, r + 1),
                    Some((x0, y0, x1, y1)) => {
                        (x0.min(cc), y0.min(r), x1.max(cc + 1), y1.max(r + 1))
                    }
                });
            }
        }
    }
    ext
}

/// Calls `plot(x, y)` for every ink pixel of `text` drawn with its top-left
/// at `(x0, y0)`, each glyph pixel scaled to a `scale × scale` block.
pub fn for_each_ink_pixel(
    text: &str,
    x0: i64,
    y0: i64,
    scale: u32,
    mut plot: impl FnMut(i64, i64),
) {
    let s = scale as i64;
    for (i, c) in text.chars().enumerate() {
        let g = glyph(c);
        let cx = x0 + i as i64 * CELL as i64 * s;
        for (row, bits) in g.iter().enumerate() {
            for col in 0..8i64 {
                if bits & (1 << col) != 0 {
                    for dy in 0..s {
                        for dx in 0..s {
                            plot(cx + col * s + dx, y0 + row as i64 * s + dy);
                        }
                    }
                }
            }
        }
    }
}

/// Tight ink bounds of `text` laid out at `(x0, y0)`, in pixels with
/// exclusive max. `None` if the text has no ink.
pub fn text_ink_bounds(text: &str, x0: i64, y0: i64, scale: u32) -> Option<(i64, i64, i64, i64)> {
    let s = scale as i64;
    let mut out: Option<(i64, i64, i64, i64)> = None;
    for (i, c) in text.chars().enumerate() {
        if let Some((cx0, cy0, cx1, cy1)) = ink_extent(c) {
            let base = x0 + i as i64 * CELL as i64 * s;
            let b = (
                base + cx0 as i64 * s,
                y0 + cy0 as i64 * s,
                base + cx1 as i64 * s,
                y0 + cy1 as i64 * s,
            );
            out = Some(match out {
                None => b,
                Some(o) => (o.0.min(b.0), o.1.min(b.1), o.2.max(b.2), o.3.max(b.3)),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_has_no_ink() {
        assert!(ink_extent(' ').is_none());
        assert!(ink_extent('H').is_some());
    }

    #[test]
    fn bounds_cover_every_ink_pixel() {
        let text = "Hello, gjpqy!";
        let (x0, y0, x1, y1) = text_ink_bounds(text, 5, 7, 3).unwrap();
        let mut count = 0;
        for_each_ink_pixel(text, 5, 7, 3, |x, y| {
            assert!(x >= x0 && x < x1 && y >= y0 && y < y1);
            count += 1;
        });
        assert!(count > 0);
    }
}
