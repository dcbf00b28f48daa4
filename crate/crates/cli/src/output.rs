use std::path::Path;

use anyhow::Result;

use egotext::io::write_atomic;

/// Writes string rows as CSV in one atomic step.
pub fn write_csv(path: &Path, rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    write_atomic(path, &bytes)?;
    Ok(())
}

pub fn fmt_box(b: &egotext::BBox) -> [String; 4] {
    b.to_array().map(|v| v.to_string())
}
