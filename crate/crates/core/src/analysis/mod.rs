//! Correlation between capture conditions and error metrics, per-condition
//! summaries and report emission.

mod plot;
mod records;
mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use plot::{bar_chart, heatmap};
pub use records::{read_records_csv, write_records_csv, RECORD_COLUMNS};
pub use report::{emit_report, Analyses, ReportFiles, REFERENCE_CER};

use crate::error::{Error, Result};
use crate::evaluation::{ConditionCell, EvalRecord, Metric, Stat};

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::UndefinedCorrelation("fewer than two samples".into()));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation. Offered for robustness checks; the default
/// analysis is Pearson.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    pearson(&ranks(x), &ranks(y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMethod {
    #[default]
    Pearson,
    Spearman,
}

/// Symmetric matrix of correlations. `None` marks a pair whose correlation
/// is undefined (constant column or fewer than two shared samples).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub method: CorrelationMethod,
    pub variables: Vec<Metric>,
    pub values: Vec<Vec<Option<f64>>>,
    /// Records with both values present, per pair.
    pub counts: Vec<Vec<usize>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: Metric, b: Metric) -> Option<f64> {
        let i = self.variables.iter().position(|v| *v == a)?;
        let j = self.variables.iter().position(|v| *v == b)?;
        self.values[i][j]
    }

    pub fn count(&self, a: Metric, b: Metric) -> Option<usize> {
        let i = self.variables.iter().position(|v| *v == a)?;
        let j = self.variables.iter().position(|v| *v == b)?;
        Some(self.counts[i][j])
    }
}

/// Default variable set: the four lighting columns against detection and
/// recognition error.
pub const DEFAULT_VARIABLES: [Metric; 9] = [
    Metric::MeanBrightness,
    Metric::StdBrightness,
    Metric::GlobalLuminance,
    Metric::Contrast,
    Metric::Precision,
    Metric::Recall,
    Metric::F1,
    Metric::DetectionError,
    Metric::Cer,
];

/// Pairwise correlations over `variables`. Records missing either value of a
/// pair are dropped for that pair only.
pub fn correlation_matrix(
    records: &[EvalRecord],
    variables: &[Metric],
    method: CorrelationMethod,
) -> Result<CorrelationMatrix> {
    if records.len() < 2 {
        return Err(Error::EmptyInput(format!(
            "correlation needs at least two records, got {}",
            records.len()
        )));
    }
    let columns: Vec<Vec<Option<f64>>> = variables
        .iter()
        .map(|m| records.iter().map(|r| m.value(r)).collect())
        .collect();
    let k = variables.len();
    let mut values = vec![vec![None; k]; k];
    let mut counts = vec![vec![0; k]; k];
    for i in 0..k {
        for j in i..k {
            let (x, y): (Vec<f64>, Vec<f64>) = columns[i]
                .iter()
                .zip(&columns[j])
                .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
                .unzip();
            let r = match method {
                CorrelationMethod::Pearson => pearson(&x, &y),
                CorrelationMethod::Spearman => spearman(&x, &y),
            }
            .ok()
            .map(|r| if i == j { 1.0 } else { r });
            values[i][j] = r;
            values[j][i] = r;
            counts[i][j] = x.len();
            counts[j][i] = x.len();
        }
    }
    Ok(CorrelationMatrix {
        method,
        variables: variables.to_vec(),
        values,
        counts,
    })
}

/// Per-cell statistics of CER and F1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub cell: ConditionCell,
    pub count: usize,
    pub cer: Option<Stat>,
    pub f1: Option<Stat>,
}

/// Groups records by lighting × distance × resolution. Records without
/// capture conditions are left out; empty cells never appear.
pub fn condition_summary(records: &[EvalRecord]) -> Vec<ConditionRow> {
    let mut cells: BTreeMap<ConditionCell, Vec<&EvalRecord>> = BTreeMap::new();
    for r in records {
        if let Some(c) = &r.conditions {
            cells.entry(ConditionCell::of(c)).or_default().push(r);
        }
    }
    cells
        .into_iter()
        .map(|(cell, rs)| {
            let col =
                |m: Metric| Stat::of(&rs.iter().filter_map(|r| m.value(r)).collect::<Vec<_>>());
            ConditionRow {
                cell,
                count: rs.len(),
                cer: col(Metric::Cer),
                f1: col(Metric::F1),
            }
        })
        .collect()
}
