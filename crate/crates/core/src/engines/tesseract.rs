//! Recognizer backed by the `tesseract` command-line program.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};

use super::{FrameContext, Recognition, Recognizer};
use crate::error::{Error, Result};
use crate::raster::Image;

#[derive(Debug, Clone)]
pub struct TesseractRecognizer {
    binary: PathBuf,
    /// Page segmentation mode; 7 treats the crop as a single text line.
    pub psm: u8,
    pub lang: String,
}

impl TesseractRecognizer {
    /// Locates the binary (`$TESSERACT` or `tesseract` on the path) and checks
    /// that it runs.
    pub fn probe() -> Result<Self> {
        let binary =
            std::env::var_os("TESSERACT").map_or_else(|| PathBuf::from("tesseract"), PathBuf::from);
        let status = Command::new(&binary)
            .arg("--version")
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status();
        match status {
            Ok(s) if s.success() => Ok(TesseractRecognizer {
                binary,
                psm: 7,
                lang: "eng".into(),
            }),
            Ok(s) => Err(unavailable(format!(
                "`{}` exited with {s}",
                binary.display()
            ))),
            Err(e) => Err(unavailable(format!(
                "cannot run `{}`: {e}",
                binary.display()
            ))),
        }
    }
}

fn unavailable(reason: String) -> Error {
    Error::EngineUnavailable {
        name: "tesseract".into(),
        reason,
    }
}

/// Joins the word rows of tesseract's TSV output and averages their
/// confidences (0–100 scale) into `[0, 1]`.
pub fn parse_tsv(tsv: &str) -> Recognition {
    let mut words = Vec::new();
    let mut confs = Vec::new();
    for line in tsv.lines().skip(1) {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 12 || cols[0] != "5" {
            continue;
        }
        let text = cols[11].trim();
        if text.is_empty() {
            continue;
        }
        if let Ok(c) = cols[10].parse::<f64>() {
            if c >= 0.0 {
                confs.push(c / 100.0);
            }
        }
        words.push(text);
    }
    let confidence = if confs.is_empty() {
        0.0
    } else {
        (confs.iter().sum::<f64>() / confs.len() as f64).clamp(0.0, 1.0)
    };
    Recognition {
        text: words.join(" "),
        confidence,
    }
}

impl Recognizer for TesseractRecognizer {
    fn name(&self) -> &str {
        "tesseract"
    }

    fn recognize(&self, region: &Image, _ctx: &FrameContext) -> Result<Recognition> {
        let png = region.encode_png()?;
        let fail = |reason: String| Error::Engine {
            name: "tesseract".into(),
            reason,
        };
        let mut child = Command::new(&self.binary)
            .args([
                "stdin",
                "stdout",
                "--psm",
                &self.psm.to_string(),
                "-l",
                &self.lang,
                "tsv",
            ])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| fail(e.to_string()))?;
        child
            .stdin
            .take()
            .ok_or_else(|| fail("no stdin".into()))?
            .write_all(&png)
            .map_err(|e| fail(e.to_string()))?;
        let out = child.wait_with_output().map_err(|e| fail(e.to_string()))?;
        if !out.status.success() {
            return Err(fail(format!("exited with {}", out.status)));
        }
        Ok(parse_tsv(&String::from_utf8_lossy(&out.stdout)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tsv_words() {
        let tsv = "level\tpage_num\tblock_num\tpar_num\tline_num\tword_num\tleft\ttop\twidth\theight\tconf\ttext\n\
                   1\t1\t0\t0\t0\t0\t0\t0\t100\t20\t-1\t\n\
                   5\t1\t1\t1\t1\t1\t0\t0\t40\t20\t90\tHello\n\
                   5\t1\t1\t1\t1\t2\t45\t0\t50\t20\t70\tworld!\n";
        let r = parse_tsv(tsv);
        assert_eq!(r.text, "Hello world!");
        assert!((r.confidence - 0.8).abs() < 1e-12);
    }

    #[test]
    fn empty_output() {
        assert_eq!(parse_tsv("").text, "");
    }
}
