//! Per-image records as CSV.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{ConditionMetadata, Lighting};
use crate::error::{Error, Result};
use crate::evaluation::{DetectionSummary, EvalRecord, RecognitionEvalResult};
use crate::io::write_atomic;
use crate::photometry::LightingStats;

pub const RECORD_COLUMNS: [&str; 17] = [
    "image_id",
    "lighting",
    "distance_m",
    "width",
    "height",
    "mean_brightness",
    "std_brightness",
    "global_luminance",
    "contrast",
    "precision",
    "recall",
    "f1",
    "cer",
    "S",
    "D",
    "I",
    "N",
];

#[derive(Debug, Default, Serialize, Deserialize)]
struct Row {
    image_id: String,
    lighting: Option<Lighting>,
    distance_m: Option<f64>,
    width: Option<u32>,
    height: Option<u32>,
    mean_brightness: f64,
    std_brightness: f64,
    global_luminance: f64,
    contrast: f64,
    precision: Option<f64>,
    recall: Option<f64>,
    f1: Option<f64>,
    cer: Option<f64>,
    #[serde(rename = "S")]
    s: Option<usize>,
    #[serde(rename = "D")]
    d: Option<usize>,
    #[serde(rename = "I")]
    i: Option<usize>,
    #[serde(rename = "N")]
    n: Option<usize>,
}

impl From<&EvalRecord> for Row {
    fn from(r: &EvalRecord) -> Self {
        let c = r.conditions;
        let rec = r.recognition;
        // Counts are only meaningful when they reproduce the stored CER.
        let counted = rec.filter(|x| x.n > 0 || x.edits() > 0 || x.cer == 0.0);
        Row {
            image_id: r.image_id.clone(),
            lighting: c.map(|c| c.lighting),
            distance_m: c.map(|c| c.distance_m),
            width: c.map(|c| c.width),
            height: c.map(|c| c.height),
            mean_brightness: r.lighting.mean_brightness,
            std_brightness: r.lighting.std_brightness,
            global_luminance: r.lighting.global_luminance,
            contrast: r.lighting.contrast,
            precision: r.detection.map(|d| d.precision),
            recall: r.detection.map(|d| d.recall),
            f1: r.detection.map(|d| d.f1),
            cer: rec.map(|x| x.cer),
            s: counted.map(|x| x.substitutions),
            d: counted.map(|x| x.deletions),
            i: counted.map(|x| x.insertions),
            n: counted.map(|x| x.n),
        }
    }
}

impl Row {
    fn into_record(self) -> std::result::Result<EvalRecord, String> {
        let conditions = match (self.lighting, self.distance_m, self.width, self.height) {
            (Some(lighting), Some(distance_m), Some(width), Some(height)) => {
                let c = ConditionMetadata {
                    lighting,
                    distance_m,
                    width,
                    height,
                };
                c.validate().map_err(|e| e.to_string())?;
                Some(c)
            }
            (None, None, None, None) => None,
            _ => return Err("condition columns must be all present or all empty".into()),
        };
        let detection = match (self.precision, self.recall, self.f1) {
            (Some(precision), Some(recall), Some(f1)) => Some(DetectionSummary {
                precision,
                recall,
                f1,
                counts: None,
            }),
            (None, None, None) => None,
            _ => return Err("precision, recall and f1 must be all present or all empty".into()),
        };
        let recognition = match (self.s, self.d, self.i, self.n) {
            (Some(s), Some(d), Some(i), Some(n)) => {
                let r = RecognitionEvalResult::from_counts(s, d, i, n);
                if let Some(cer) = self.cer {
                    if (cer - r.cer).abs() > 1e-9 {
                        return Err(format!("cer {cer} disagrees with S+D+I/N = {}", r.cer));
                    }
                }
                Some(r)
            }
            (None, None, None, None) => self.cer.map(|cer| RecognitionEvalResult {
                cer,
                ..Default::default()
            }),
            _ => return Err("S, D, I and N must be all present or all empty".into()),
        };
        let lighting = LightingStats {
            mean_brightness: self.mean_brightness,
            std_brightness: self.std_brightness,
            global_luminance: self.global_luminance,
            contrast: self.contrast,
        };
        EvalRecord::new(self.image_id, conditions, lighting, detection, recognition)
            .map_err(|e| e.to_string())
    }
}

/// Writes records atomically in the fixed column order.
pub fn write_records_csv(path: &Path, records: &[EvalRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if records.is_empty() {
        w.write_record(RECORD_COLUMNS)?;
    }
    for r in records {
        w.serialize(Row::from(r))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?;
    write_atomic(path, &bytes)
}

/// Reads a records CSV. Rows carrying only a CER (no counts) keep zero
/// counts and are left out of pooled CER.
pub fn read_records_csv(path: &Path) -> Result<Vec<EvalRecord>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::schema(path, e.to_string()))?;
    let headers = rdr
        .headers()
        .map_err(|e| Error::schema(path, e.to_string()))?
        .clone();
    if let Some(missing) = RECORD_COLUMNS
        .iter()
        .find(|c| !headers.iter().any(|h| h == **c))
    {
        return Err(Error::schema(path, format!("missing column `{missing}`")));
    }
    let mut out = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    let mut dups = Vec::new();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| Error::schema(path, format!("row {}: {e}", i + 1)))?;
        let rec = row
            .into_record()
            .map_err(|e| Error::schema(path, format!("row {}: {e}", i + 1)))?;
        if !seen.insert(rec.image_id.clone()) {
            dups.push(rec.image_id.clone());
        }
        out.push(rec);
    }
    if !dups.is_empty() {
        return Err(Error::DuplicateIds(dups));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lighting() -> LightingStats {
        LightingStats {
            mean_brightness: 93.97,
            std_brightness: 58.34,
            global_luminance: 102.92,
            contrast: 255.0,
        }
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let recs = vec![
            EvalRecord::new(
                "a",
                Some(ConditionMetadata {
                    lighting: Lighting::NaturalEnhanced,
                    distance_m: 0.5,
                    width: 352,
                    height: 352,
                }),
                lighting(),
                Some(DetectionSummary {
                    precision: 0.84,
                    recall: 0.63,
                    f1: 0.72,
                    counts: None,
                }),
                Some(RecognitionEvalResult::from_counts(1, 2, 0, 10)),
            )
            .unwrap(),
            EvalRecord::new(
                "b",
                None,
                lighting(),
                Some(DetectionSummary {
                    precision: 1.0,
                    recall: 0.5,
                    f1: 2.0 / 3.0,
                    counts: None,
                }),
                None,
            )
            .unwrap(),
        ];
        write_records_csv(&path, &recs).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(&RECORD_COLUMNS.join(",")));
        assert!(text.contains("natural+enhanced"));
        assert_eq!(read_records_csv(&path).unwrap(), recs);
    }

    #[test]
    fn partial_columns_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut text = RECORD_COLUMNS.join(",");
        text.push_str("\nx,,,,,1,1,1,1,0.5,,0.5,,,,,\n");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(read_records_csv(&path), Err(Error::Schema { .. })));
    }

    #[test]
    fn missing_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        std::fs::write(&path, "image_id,cer\na,0.1\n").unwrap();
        assert!(read_records_csv(&path).is_err());
    }
}
