use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{
    bar_chart, condition_summary, correlation_matrix, heatmap, write_records_csv, ConditionRow,
    CorrelationMatrix, CorrelationMethod, DEFAULT_VARIABLES,
};
use crate::error::Result;
use crate::evaluation::{aggregate, Aggregate, EvalRecord, Metric};
use crate::io::write_atomic;

/// Character error rates measured on a proprietary egocentric capture set
/// with pretrained models. Shown in reports for orientation only; a
/// synthetic desk-scale run is not expected to reproduce them.
pub const REFERENCE_CER: [(&str, f64); 4] = [
    ("EAST + CRNN", 0.65),
    ("EAST + Tesseract", 0.82),
    ("EAST + CRNN, brightness-enhanced", 0.67),
    ("EAST + CRNN, 2x upscaled", 0.48),
];

/// Everything computed from a set of records. Parts that cannot be computed
/// (too few records, no conditions) are empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analyses {
    pub aggregate: Option<Aggregate>,
    pub correlation: Option<CorrelationMatrix>,
    pub conditions: Vec<ConditionRow>,
}

impl Analyses {
    pub fn empty() -> Self {
        Analyses {
            aggregate: None,
            correlation: None,
            conditions: Vec::new(),
        }
    }

    pub fn compute(records: &[EvalRecord], method: CorrelationMethod) -> Self {
        Analyses {
            aggregate: aggregate(records).ok(),
            correlation: correlation_matrix(records, &DEFAULT_VARIABLES, method).ok(),
            conditions: condition_summary(records),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub records_csv: PathBuf,
    pub correlation_csv: PathBuf,
    pub correlation_counts_csv: PathBuf,
    pub summary_csv: PathBuf,
    pub report_md: PathBuf,
    pub plots: Vec<PathBuf>,
}

fn num(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn correlation_csv(m: Option<&CorrelationMatrix>) -> (String, String) {
    let (mut values, mut counts) = (String::from("variable"), String::from("variable"));
    let Some(m) = m else {
        return (values + "\n", counts + "\n");
    };
    for v in &m.variables {
        values.push(',');
        values.push_str(v.name());
        counts.push(',');
        counts.push_str(v.name());
    }
    values.push('\n');
    counts.push('\n');
    for (i, v) in m.variables.iter().enumerate() {
        values.push_str(v.name());
        counts.push_str(v.name());
        for j in 0..m.variables.len() {
            values.push(',');
            values.push_str(
                &m.values[i][j].map_or_else(|| "undefined".to_owned(), |r| r.to_string()),
            );
            let _ = write!(counts, ",{}", m.counts[i][j]);
        }
        values.push('\n');
        counts.push('\n');
    }
    (values, counts)
}

fn summary_csv(rows: &[ConditionRow]) -> String {
    let mut s = String::from(
        "lighting,distance_m,width,height,count,cer_mean,cer_median,f1_mean,f1_median\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.cell.lighting,
            r.cell.distance_m(),
            r.cell.width,
            r.cell.height,
            r.count,
            num(r.cer.map(|x| x.mean)),
            num(r.cer.map(|x| x.median)),
            num(r.f1.map(|x| x.mean)),
            num(r.f1.map(|x| x.median)),
        );
    }
    s
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_owned(), |v| format!("{v:.4}"))
}

fn markdown(records: &[EvalRecord], a: &Analyses) -> String {
    let mut md = String::from("# Evaluation report\n\n");
    let _ = writeln!(md, "Records: {}\n", records.len());

    md.push_str("## Overall\n\n");
    match &a.aggregate {
        Some(agg) => {
            md.push_str("| metric | n | mean | median | min | max |\n|---|---|---|---|---|---|\n");
            for (m, s) in &agg.overall.stats {
                let _ = writeln!(
                    md,
                    "| {m} | {} | {:.4} | {:.4} | {:.4} | {:.4} |",
                    s.n, s.mean, s.median, s.min, s.max
                );
            }
            if let Some(p) = agg.overall.pooled_cer {
                let _ = writeln!(md, "\nPooled CER (total edits / total characters): {p:.4}");
            }
        }
        None => md.push_str("No data.\n"),
    }

    md.push_str("\n## Lighting vs. detection error (1 - F1)\n\n");
    match a
        .correlation
        .as_ref()
        .filter(|m| m.count(Metric::F1, Metric::F1).unwrap_or(0) >= 2)
    {
        Some(m) => {
            md.push_str("| variable | r | abs(r) | n |\n|---|---|---|---|\n");
            for v in Metric::LIGHTING {
                let r = m.get(v, Metric::DetectionError);
                let _ = writeln!(
                    md,
                    "| {v} | {} | {} | {} |",
                    cell(r),
                    cell(r.map(f64::abs)),
                    m.count(v, Metric::DetectionError).unwrap_or(0)
                );
            }
        }
        None => md.push_str("No data.\n"),
    }

    md.push_str("\n## Correlation matrix\n\n");
    match &a.correlation {
        Some(m) => {
            let _ = writeln!(md, "Method: {:?}\n", m.method);
            md.push('|');
            for v in std::iter::once("").chain(m.variables.iter().map(|v| v.name())) {
                let _ = write!(md, " {v} |");
            }
            md.push_str("\n|");
            md.push_str(&"---|".repeat(m.variables.len() + 1));
            md.push('\n');
            for (i, v) in m.variables.iter().enumerate() {
                let _ = write!(md, "| {v} |");
                for r in &m.values[i] {
                    let _ = write!(md, " {} |", cell(*r));
                }
                md.push('\n');
            }
        }
        None => md.push_str("No data.\n"),
    }

    md.push_str("\n## By condition\n\n");
    if a.conditions.is_empty() {
        md.push_str("No data.\n");
    } else {
        md.push_str("| condition | n | mean CER | median CER | mean F1 | median F1 |\n|---|---|---|---|---|---|\n");
        for r in &a.conditions {
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} | {} | {} |",
                r.cell,
                r.count,
                cell(r.cer.map(|s| s.mean)),
                cell(r.cer.map(|s| s.median)),
                cell(r.f1.map(|s| s.mean)),
                cell(r.f1.map(|s| s.median)),
            );
        }
    }

    md.push_str(
        "\n## Reference values\n\n\
         CER measured on a proprietary egocentric capture set with pretrained models. \
         Listed for orientation only; synthetic desk-scale runs are not expected to match.\n\n\
         | setup | CER |\n|---|---|\n",
    );
    for (name, v) in REFERENCE_CER {
        let _ = writeln!(md, "| {name} | {v:.2} |");
    }
    md
}

fn condition_bars(
    rows: &[ConditionRow],
    pick: impl Fn(&ConditionRow) -> Option<f64>,
) -> Vec<(String, f64)> {
    rows.iter()
        .filter_map(|r| pick(r).map(|v| (r.cell.to_string(), v)))
        .collect()
}

/// Writes the per-image CSV, correlation CSVs, condition summary, Markdown
/// report and plots into `out_dir`. All files are written atomically; the
/// output is a pure function of the inputs.
pub fn emit_report(
    records: &[EvalRecord],
    analyses: &Analyses,
    out_dir: &Path,
) -> Result<ReportFiles> {
    let files = ReportFiles {
        records_csv: out_dir.join("records.csv"),
        correlation_csv: out_dir.join("correlation.csv"),
        correlation_counts_csv: out_dir.join("correlation_counts.csv"),
        summary_csv: out_dir.join("condition_summary.csv"),
        report_md: out_dir.join("report.md"),
        plots: Vec::new(),
    };
    write_records_csv(&files.records_csv, records)?;
    let (values, counts) = correlation_csv(analyses.correlation.as_ref());
    write_atomic(&files.correlation_csv, values.as_bytes())?;
    write_atomic(&files.correlation_counts_csv, counts.as_bytes())?;
    write_atomic(
        &files.summary_csv,
        summary_csv(&analyses.conditions).as_bytes(),
    )?;
    write_atomic(&files.report_md, markdown(records, analyses).as_bytes())?;

    let mut plots = Vec::new();
    if let Some(m) = &analyses.correlation {
        let p = out_dir.join("correlation_heatmap.png");
        heatmap(m).save_png(&p)?;
        plots.push(p);
    }
    let cer = condition_bars(&analyses.conditions, |r| r.cer.map(|s| s.mean));
    if !cer.is_empty() {
        let top = cer.iter().map(|(_, v)| *v).fold(1.0_f64, f64::max);
        let p = out_dir.join("cer_by_condition.png");
        bar_chart("Mean CER by condition", &cer, top).save_png(&p)?;
        plots.push(p);
    }
    let f1 = condition_bars(&analyses.conditions, |r| r.f1.map(|s| s.mean));
    if !f1.is_empty() {
        let p = out_dir.join("f1_by_condition.png");
        bar_chart("Mean F1 by condition", &f1, 1.0).save_png(&p)?;
        plots.push(p);
    }
    Ok(ReportFiles { plots, ..files })
}
