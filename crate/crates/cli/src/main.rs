//! `egotext`: synthetic data, photometry, pipeline runs, gaze runs and
//! correlation analysis from the command line.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 engine unavailable. Failures are reported on stderr as
//! `{"error": {"kind": ..., "message": ...}}`.

mod gaze_cmd;
mod output;
mod run_cmd;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use egotext::analysis::{emit_report, read_records_csv, Analyses, CorrelationMethod};
use egotext::config::RunConfig;
use egotext::dataset::{generate_synthetic, load_manifest, SyntheticSpec};
use egotext::evaluation::Metric;
use egotext::photometry::lighting_stats;
use egotext::{par, Error, Image};

#[derive(Parser)]
#[command(
    name = "egotext",
    version,
    about = "Scene text benchmark harness for egocentric imagery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render the synthetic poster dataset.
    Synth {
        /// Generator spec (JSON). Defaults are used when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lighting metrics for every image of a manifest.
    Stats {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Detect, merge, recognize and score every image of a manifest.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Worker count (default: one per processor).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Process only the gaze window of each frame.
    GazeRun {
        /// Frame directory holding `frames.csv`, a frame index CSV, or a video file.
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        gaze: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Correlation matrix, condition summary and report from a records CSV.
    Analyze {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Pearson)]
        method: Method,
    },
    /// Print the default run configuration.
    Config,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Pearson,
    /// Rank correlation; a robustness check, not the default analysis.
    Spearman,
}

/// An error in how the tool was invoked rather than in the data.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn classify(err: &anyhow::Error) -> (&'static str, u8) {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return ("usage", 1);
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Config(_) | Error::InvalidParameter(_) => ("config", 1),
                Error::EngineUnavailable { .. } => ("engine_unavailable", 3),
                Error::Engine { .. } => ("engine", 2),
                _ => ("data", 2),
            };
        }
    }
    ("data", 2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (kind, code) = classify(&err);
            let message = describe(&err);
            eprintln!("{}", json!({"error": {"kind": kind, "message": message}}));
            ExitCode::from(code)
        }
    }
}

/// The error chain joined by `: `, skipping causes a message already quotes.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

pub fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => Ok(RunConfig::load(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synth { spec, out } => synth(spec.as_deref(), &out),
        Command::Stats {
            manifest,
            out,
            jobs,
        } => stats(&manifest, &out, jobs),
        Command::Run {
            manifest,
            config,
            out,
            jobs,
        } => run_cmd::run(&manifest, config.as_deref(), &out, jobs),
        Command::GazeRun {
            frames,
            gaze,
            config,
            out,
            jobs,
        } => gaze_cmd::gaze_run(&frames, &gaze, config.as_deref(), &out, jobs),
        Command::Analyze {
            records,
            out,
            method,
        } => analyze(&records, &out, method),
        Command::Config => {
            println!("{}", serde_json::to_string_pretty(&RunConfig::default())?);
            Ok(())
        }
    }
}

fn synth(spec_path: Option<&Path>, out: &Path) -> Result<()> {
    let spec: SyntheticSpec = match spec_path {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => SyntheticSpec::default(),
    };
    let manifest = generate_synthetic(&spec, out)?;
    println!(
        "{}",
        json!({"images": manifest.len(), "manifest": out.join("manifest.json")})
    );
    Ok(())
}

fn stats(manifest_path: &Path, out: &Path, jobs: Option<usize>) -> Result<()> {
    if jobs == Some(0) {
        return Err(UsageError("--jobs must be at least 1".into()).into());
    }
    let manifest = load_manifest(manifest_path)?;
    let results = par::with_jobs(jobs, || {
        par::map(&manifest.entries, |e| {
            Image::load(&e.image_path).and_then(|img| lighting_stats(&img))
        })
    });
    let mut rows = vec![vec![
        "image_id".to_owned(),
        "mean_brightness".into(),
        "std_brightness".into(),
        "global_luminance".into(),
        "contrast".into(),
        "error".into(),
    ]];
    let mut warnings = 0;
    for (e, r) in manifest.entries.iter().zip(results) {
        rows.push(match r {
            Ok(s) => vec![
                e.id.clone(),
                s.mean_brightness.to_string(),
                s.std_brightness.to_string(),
                s.global_luminance.to_string(),
                s.contrast.to_string(),
                String::new(),
            ],
            Err(err) => {
                warnings += 1;
                vec![
                    e.id.clone(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    err.to_string(),
                ]
            }
        });
    }
    output::write_csv(out, &rows)?;
    if warnings > 0 {
        eprintln!("warning: {warnings} image(s) could not be measured");
    }
    println!(
        "{}",
        json!({"images": manifest.len(), "warnings": warnings})
    );
    Ok(())
}

fn analyze(records_path: &Path, out: &Path, method: Method) -> Result<()> {
    let records = read_records_csv(records_path)?;
    let method = match method {
        Method::Pearson => CorrelationMethod::Pearson,
        Method::Spearman => CorrelationMethod::Spearman,
    };
    let analyses = Analyses::compute(&records, method);
    let files = emit_report(&records, &analyses, out)?;
    let means = analyses.aggregate.as_ref().map(|a| {
        json!({
            "precision": a.overall.mean(Metric::Precision),
            "recall": a.overall.mean(Metric::Recall),
            "f1": a.overall.mean(Metric::F1),
            "cer": a.overall.mean(Metric::Cer),
        })
    });
    println!(
        "{}",
        json!({"records": records.len(), "means": means, "report": files.report_md})
    );
    Ok(())
}
