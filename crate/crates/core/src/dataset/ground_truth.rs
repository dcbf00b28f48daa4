use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ConditionMetadata, GroundTruthRegion};
use crate::error::{Error, Result};
use crate::geometry::{envelope, BBox};

/// One annotated image as stored in a ground-truth file.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthImage {
    /// Image path exactly as written in the file.
    pub image: PathBuf,
    pub regions: Vec<GroundTruthRegion>,
    pub conditions: Option<ConditionMetadata>,
}

/// A rejected region or image entry. The rest of the file still loads.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryError {
    pub entry: usize,
    pub region: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruthLoad {
    pub images: Vec<GroundTruthImage>,
    pub errors: Vec<EntryError>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    #[serde(default)]
    points: Option<Vec<[f64; 2]>>,
    #[serde(default, rename = "box")]
    bbox: Option<[f64; 4]>,
    text: String,
}

#[derive(Debug, Serialize)]
struct OutRegion<'a> {
    #[serde(rename = "box")]
    bbox: [f64; 4],
    text: &'a str,
}

#[derive(Debug, Serialize)]
struct OutEntry<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<&'a str>,
    image: String,
    regions: Vec<OutRegion<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    conditions: Option<&'a ConditionMetadata>,
}

fn parse_region(v: &Value) -> std::result::Result<GroundTruthRegion, String> {
    let raw: RawRegion = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
    let bbox = match (raw.points, raw.bbox) {
        (Some(points), None) => {
            if points.len() < 3 {
                return Err(format!(
                    "polygon needs at least 3 points, got {}",
                    points.len()
                ));
            }
            let corners: Vec<BBox> = points
                .iter()
                .map(|[x, y]| BBox {
                    x_min: *x,
                    y_min: *y,
                    x_max: *x,
                    y_max: *y,
                })
                .collect();
            envelope(&corners).map_err(|e| e.to_string())?
        }
        (None, Some([x0, y0, x1, y1])) => BBox {
            x_min: x0,
            y_min: y0,
            x_max: x1,
            y_max: y1,
        },
        (Some(_), Some(_)) => return Err("region has both `points` and `box`".into()),
        (None, None) => return Err("region needs `points` or `box`".into()),
    };
    bbox.validate().map_err(|e| e.to_string())?;
    if bbox.x_min < 0.0 || bbox.y_min < 0.0 {
        return Err(format!("negative coordinate in {:?}", bbox.to_array()));
    }
    GroundTruthRegion::new(bbox, raw.text).map_err(|e| e.to_string())
}

struct ParsedEntry {
    id: Option<String>,
    image: GroundTruthImage,
}

fn parse_entry(index: usize, v: &Value, errors: &mut Vec<EntryError>) -> Option<ParsedEntry> {
    let fail = |msg: String| EntryError {
        entry: index,
        region: None,
        message: msg,
    };
    let Some(obj) = v.as_object() else {
        errors.push(fail("entry is not an object".into()));
        return None;
    };
    let Some(image) = obj.get("image").and_then(Value::as_str) else {
        errors.push(fail("missing string field `image`".into()));
        return None;
    };
    let id = match obj.get("id") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => {
            errors.push(fail("`id` must be a string".into()));
            return None;
        }
    };
    let conditions = match obj.get("conditions") {
        None | Some(Value::Null) => None,
        Some(c) => match serde_json::from_value::<ConditionMetadata>(c.clone()) {
            Ok(c) => match c.validate() {
                Ok(()) => Some(c),
                Err(e) => {
                    errors.push(fail(format!("conditions: {e}")));
                    return None;
                }
            },
            Err(e) => {
                errors.push(fail(format!("conditions: {e}")));
                return None;
            }
        },
    };
    let regions_v = match obj.get("regions") {
        Some(Value::Array(a)) => a.as_slice(),
        None => &[],
        Some(_) => {
            errors.push(fail("`regions` must be an array".into()));
            return None;
        }
    };
    let mut regions = Vec::with_capacity(regions_v.len());
    for (ri, r) in regions_v.iter().enumerate() {
        match parse_region(r) {
            Ok(r) => regions.push(r),
            Err(message) => errors.push(EntryError {
                entry: index,
                region: Some(ri),
                message,
            }),
        }
    }
    Some(ParsedEntry {
        id,
        image: GroundTruthImage {
            image: PathBuf::from(image),
            regions,
            conditions,
        },
    })
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::schema(path, e.to_string()))
}

/// Loads a ground-truth file. Malformed regions and entries are reported in
/// [`GroundTruthLoad::errors`] and skipped.
pub fn load_ground_truth(path: &Path) -> Result<GroundTruthLoad> {
    let root = read_json(path)?;
    let items: Vec<&Value> = match &root {
        Value::Array(a) => a.iter().collect(),
        Value::Object(_) => vec![&root],
        _ => {
            return Err(Error::schema(
                path,
                "expected an object or an array of objects",
            ))
        }
    };
    let mut out = GroundTruthLoad::default();
    for (i, v) in items.into_iter().enumerate() {
        if let Some(p) = parse_entry(i, v, &mut out.errors) {
            out.images.push(p.image);
        }
    }
    Ok(out)
}

fn entry_json<'a>(id: Option<&'a str>, img: &'a GroundTruthImage) -> OutEntry<'a> {
    OutEntry {
        id,
        image: img.image.to_string_lossy().replace('\\', "/"),
        regions: img
            .regions
            .iter()
            .map(|r| OutRegion {
                bbox: r.bbox.to_array(),
                text: &r.text,
            })
            .collect(),
        conditions: img.conditions.as_ref(),
    }
}

pub fn write_ground_truth(path: &Path, images: &[GroundTruthImage]) -> Result<()> {
    let out: Vec<OutEntry> = images.iter().map(|i| entry_json(None, i)).collect();
    crate::io::write_json_atomic(path, &out)
}

/// One image ready for pipeline execution.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub id: String,
    /// Image path resolved against the manifest directory.
    pub image_path: PathBuf,
    pub ground_truth: GroundTruthImage,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn default_id(image: &Path) -> String {
    image
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| image.to_string_lossy().into_owned())
}

/// Loads a manifest strictly: any malformed entry or region is a schema
/// error, and duplicate ids are rejected.
pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let root = read_json(path)?;
    let entries_v = match &root {
        Value::Object(o) => match o.get("entries") {
            Some(Value::Array(a)) => a,
            _ => return Err(Error::schema(path, "manifest needs an `entries` array")),
        },
        Value::Array(a) => a,
        _ => return Err(Error::schema(path, "manifest must be an object")),
    };
    let base = path.parent().unwrap_or(Path::new("."));
    let mut errors = Vec::new();
    let mut entries = Vec::with_capacity(entries_v.len());
    for (i, v) in entries_v.iter().enumerate() {
        if let Some(p) = parse_entry(i, v, &mut errors) {
            let id = p.id.unwrap_or_else(|| default_id(&p.image.image));
            entries.push(ManifestEntry {
                id,
                image_path: base.join(&p.image.image),
                ground_truth: p.image,
            });
        }
    }
    if let Some(e) = errors.first() {
        let loc = match e.region {
            Some(r) => format!("entry {} region {}", e.entry, r),
            None => format!("entry {}", e.entry),
        };
        return Err(Error::schema(path, format!("{loc}: {}", e.message)));
    }
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &entries {
        *seen.entry(e.id.as_str()).or_default() += 1;
    }
    let dups: Vec<String> = seen
        .into_iter()
        .filter(|(_, n)| *n > 1)
        .map(|(id, _)| id.to_owned())
        .collect();
    if !dups.is_empty() {
        return Err(Error::DuplicateIds(dups));
    }
    Ok(Manifest { entries })
}

/// Writes a manifest; image paths are stored as given in each entry's
/// ground truth (relative to the manifest).
pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let entries: Vec<OutEntry> = manifest
        .entries
        .iter()
        .map(|e| entry_json(Some(&e.id), &e.ground_truth))
        .collect();
    #[derive(Serialize)]
    struct Doc<'a> {
        version: u32,
        entries: Vec<OutEntry<'a>>,
    }
    crate::io::write_json_atomic(
        path,
        &Doc {
            version: 1,
            entries,
        },
    )
}
