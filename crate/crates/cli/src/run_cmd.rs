use std::collections::HashMap;
use std::path::Path;

use anyhow::Result;
use serde_json::json;

use egotext::analysis::write_records_csv;
use egotext::dataset::load_manifest;
use egotext::engines::{run_batch, BatchItem, ImageSource};
use egotext::io::write_json_atomic;
use egotext::par;

use crate::output::{fmt_box, write_csv};
use crate::{load_config, UsageError};

pub fn run(
    manifest_path: &Path,
    config_path: Option<&Path>,
    out: &Path,
    jobs: Option<usize>,
) -> Result<()> {
    let mut config = load_config(config_path)?;
    if let Some(j) = jobs {
        if j == 0 {
            return Err(UsageError("--jobs must be at least 1".into()).into());
        }
        config.jobs = Some(j);
    }
    let manifest = load_manifest(manifest_path)?;
    let gt: HashMap<_, _> = manifest
        .entries
        .iter()
        .map(|e| (e.id.clone(), e.ground_truth.regions.clone()))
        .collect();
    let detector = config.build_detector(&gt)?;
    let recognizer = config.build_recognizer(&gt)?;

    let items: Vec<BatchItem> = manifest
        .entries
        .iter()
        .map(|e| BatchItem {
            id: e.id.clone(),
            source: ImageSource::Path(e.image_path.clone()),
            ground_truth: e.ground_truth.regions.clone(),
            conditions: e.ground_truth.conditions,
        })
        .collect();
    let settings = config.batch_settings();
    let outcomes = par::with_jobs(config.jobs, || {
        run_batch(&items, detector.as_ref(), recognizer.as_ref(), &settings)
    });

    let records: Vec<_> = outcomes.iter().filter_map(|o| o.record.clone()).collect();
    write_records_csv(&out.join("records.csv"), &records)?;

    let mut regions = vec![[
        "image_id",
        "region",
        "x_min",
        "y_min",
        "x_max",
        "y_max",
        "confidence",
        "text",
        "failed",
    ]
    .map(String::from)
    .to_vec()];
    let mut errors = vec![vec!["image_id".to_owned(), "error".to_owned()]];
    let mut failed_regions = 0;
    for o in &outcomes {
        failed_regions += o.failed_regions;
        if let Some(e) = &o.error {
            errors.push(vec![o.id.clone(), e.clone()]);
        }
        for (i, r) in o.regions.iter().enumerate() {
            let mut row = vec![o.id.clone(), i.to_string()];
            row.extend(fmt_box(&r.bbox));
            row.extend([
                r.confidence.to_string(),
                r.text.clone(),
                r.failed.to_string(),
            ]);
            regions.push(row);
        }
    }
    write_csv(&out.join("regions.csv"), &regions)?;
    write_csv(&out.join("errors.csv"), &errors)?;

    let failed_images = errors.len() - 1;
    let warnings = failed_images + failed_regions;
    let (det, rec) = config.engine_ids();
    write_json_atomic(
        &out.join("run.json"),
        &json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": "run",
            "manifest": manifest_path,
            "images": manifest.len(),
            "seed": config.seed,
            "engines": {"detector": det, "recognizer": rec},
            "parallel": par::is_parallel(),
            "config": config,
            "outputs": ["records.csv", "regions.csv", "errors.csv"],
            "failed_images": failed_images,
            "failed_regions": failed_regions,
        }),
    )?;
    if warnings > 0 {
        eprintln!(
            "warning: {failed_images} image(s) failed, {failed_regions} region(s) unreadable"
        );
    }
    println!(
        "{}",
        json!({"images": manifest.len(), "scored": records.len(), "warnings": warnings})
    );
    Ok(())
}
