use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use anyhow::{Context, Result};
use serde_json::json;

use egotext::config::RunConfig;
use egotext::dataset::load_ground_truth;
use egotext::gaze::{
    align_gaze, gaze_run as run_window, load_frame_index, load_gaze_csv, FrameEntry, GazeOutput,
};
use egotext::io::write_json_atomic;
use egotext::{par, Error, Image};

use crate::output::{fmt_box, write_csv};
use crate::{load_config, UsageError};

const VIDEO_EXTENSIONS: [&str; 5] = ["mp4", "mov", "mkv", "avi", "webm"];

/// Resolves `--frames` to a frame list: a directory with `frames.csv`, an
/// index CSV, or a video decoded with ffmpeg at the configured frame rate.
fn frames(arg: &Path, cfg: &RunConfig, out: &Path) -> Result<Vec<FrameEntry>> {
    if arg.is_dir() {
        return Ok(load_frame_index(&arg.join("frames.csv"))?);
    }
    let ext = arg
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    if ext == "csv" {
        return Ok(load_frame_index(arg)?);
    }
    if !VIDEO_EXTENSIONS.contains(&ext.as_str()) {
        return Err(UsageError(format!(
            "--frames must be a directory, a .csv index or a video ({})",
            VIDEO_EXTENSIONS.join(", ")
        ))
        .into());
    }
    if !arg.is_file() {
        return Err(Error::Schema {
            path: arg.to_owned(),
            message: "video file not found".into(),
        }
        .into());
    }
    decode_video(arg, cfg.gaze.fps, &out.join("frames"))
}

fn decode_video(video: &Path, fps: f64, dir: &Path) -> Result<Vec<FrameEntry>> {
    let probe = Command::new("ffmpeg")
        .arg("-version")
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status();
    if !probe.is_ok_and(|s| s.success()) {
        return Err(Error::EngineUnavailable {
            name: "ffmpeg".into(),
            reason: "video input needs ffmpeg on the PATH; extract frames and pass a frame index instead".into(),
        }
        .into());
    }
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let status = Command::new("ffmpeg")
        .args(["-v", "error", "-y", "-i"])
        .arg(video)
        .args(["-vsync", "0"])
        .arg(dir.join("frame_%06d.png"))
        .status()
        .context("running ffmpeg")?;
    if !status.success() {
        return Err(Error::Schema {
            path: video.to_owned(),
            message: format!("ffmpeg exited with {status}"),
        }
        .into());
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "png"))
        .collect();
    files.sort();
    let period = 1e9 / fps;
    Ok(files
        .into_iter()
        .enumerate()
        .map(|(i, path)| FrameEntry {
            frame_id: path
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned(),
            timestamp_ns: (i as f64 * period).round() as i64,
            path,
        })
        .collect())
}

/// Mock ground truth per frame id. A file with a single entry describes a
/// static scene and applies to every frame; otherwise entries are matched by
/// image file stem.
fn ground_truth(
    cfg: &RunConfig,
    frames: &[FrameEntry],
) -> Result<HashMap<String, Vec<egotext::dataset::GroundTruthRegion>>> {
    let Some(path) = &cfg.gaze.ground_truth else {
        return Ok(HashMap::new());
    };
    let load = load_ground_truth(path)?;
    if let Some(e) = load.errors.first() {
        return Err(Error::Schema {
            path: path.clone(),
            message: format!("entry {}: {}", e.entry, e.message),
        }
        .into());
    }
    if let [single] = load.images.as_slice() {
        return Ok(frames
            .iter()
            .map(|f| (f.frame_id.clone(), single.regions.clone()))
            .collect());
    }
    Ok(load
        .images
        .into_iter()
        .map(|g| {
            let stem = g
                .image
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            (stem, g.regions)
        })
        .collect())
}

pub fn gaze_run(
    frames_arg: &Path,
    gaze_path: &Path,
    config_path: Option<&Path>,
    out: &Path,
    jobs: Option<usize>,
) -> Result<()> {
    let mut cfg = load_config(config_path)?;
    if let Some(j) = jobs {
        if j == 0 {
            return Err(UsageError("--jobs must be at least 1".into()).into());
        }
        cfg.jobs = Some(j);
    }
    let frames = frames(frames_arg, &cfg, out)?;
    let track = load_gaze_csv(gaze_path)?;
    let gt = ground_truth(&cfg, &frames)?;
    let detector = cfg.build_detector(&gt)?;
    let recognizer = cfg.build_recognizer(&gt)?;
    let keyed: Vec<(usize, i64)> = frames
        .iter()
        .enumerate()
        .map(|(i, f)| (i, f.timestamp_ns))
        .collect();
    let aligned = align_gaze(&keyed, &track, cfg.gaze.tolerance_ns)?;
    let roi = cfg.gaze.roi();
    let opts = cfg.pipeline();

    let results: Vec<Result<Option<(GazeOutput, u64)>, String>> = par::with_jobs(cfg.jobs, || {
        par::map(&aligned, |(i, sample)| {
            let Some(g) = sample else {
                return Ok(None);
            };
            let f = &frames[*i];
            let img = Image::load(&f.path).map_err(|e| e.to_string())?;
            let frame_pixels = img.pixel_count() as u64;
            run_window(
                &img,
                &f.frame_id,
                g,
                &roi,
                detector.as_ref(),
                recognizer.as_ref(),
                &opts,
            )
            .map(|o| Some((o, frame_pixels)))
            .map_err(|e| e.to_string())
        })
    });

    let mut frame_rows = vec![[
        "frame_id",
        "timestamp_ns",
        "gaze_x_px",
        "gaze_y_px",
        "win_x_min",
        "win_y_min",
        "win_x_max",
        "win_y_max",
        "detector_pixels",
        "frame_pixels",
        "regions",
        "status",
    ]
    .map(String::from)
    .to_vec()];
    let mut region_rows = vec![[
        "frame_id",
        "region",
        "x_min",
        "y_min",
        "x_max",
        "y_max",
        "confidence",
        "text",
        "truncated",
        "failed",
    ]
    .map(String::from)
    .to_vec()];
    let (mut no_gaze, mut failed) = (0, 0);
    for ((i, sample), res) in aligned.iter().zip(results) {
        let f = &frames[*i];
        let mut row = vec![f.frame_id.clone(), f.timestamp_ns.to_string()];
        match (sample, res) {
            (Some(g), Ok(Some((o, frame_pixels)))) => {
                row.extend([g.x.to_string(), g.y.to_string()]);
                row.extend(fmt_box(&o.window));
                row.extend([
                    o.detector_pixels.to_string(),
                    frame_pixels.to_string(),
                    o.regions.len().to_string(),
                    "ok".into(),
                ]);
                for (k, r) in o.regions.iter().enumerate() {
                    let mut rr = vec![f.frame_id.clone(), k.to_string()];
                    rr.extend(fmt_box(&r.bbox));
                    rr.extend([
                        r.confidence.to_string(),
                        r.text.clone(),
                        r.truncated.to_string(),
                        r.failed.to_string(),
                    ]);
                    region_rows.push(rr);
                }
            }
            (_, Err(e)) => {
                failed += 1;
                row.extend(std::iter::repeat_n(String::new(), 9));
                row.push(format!("error: {e}"));
            }
            _ => {
                no_gaze += 1;
                row.extend(std::iter::repeat_n(String::new(), 9));
                row.push("no gaze".into());
            }
        }
        frame_rows.push(row);
    }
    write_csv(&out.join("gaze_frames.csv"), &frame_rows)?;
    write_csv(&out.join("gaze_regions.csv"), &region_rows)?;
    let (det, rec) = cfg.engine_ids();
    write_json_atomic(
        &out.join("run.json"),
        &json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": "gaze-run",
            "frames": frames_arg,
            "gaze": gaze_path,
            "seed": cfg.seed,
            "engines": {"detector": det, "recognizer": rec},
            "parallel": par::is_parallel(),
            "config": cfg,
            "outputs": ["gaze_frames.csv", "gaze_regions.csv"],
            "frames_without_gaze": no_gaze,
            "failed_frames": failed,
        }),
    )?;
    let warnings = no_gaze + failed;
    if warnings > 0 {
        eprintln!("warning: {no_gaze} frame(s) without gaze, {failed} frame(s) failed");
    }
    println!(
        "{}",
        json!({"frames": frames.len(), "processed": frames.len() - warnings, "warnings": warnings})
    );
    Ok(())
}
