//! Character error rate from a minimal unit-cost edit script.

use serde::{Deserialize, Serialize};

/// Text normalization applied to both strings before scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Normalization {
    /// Collapse whitespace runs to one space and trim the ends.
    #[serde(default = "yes")]
    pub collapse_whitespace: bool,
    #[serde(default = "yes")]
    pub case_sensitive: bool,
}

fn yes() -> bool {
    true
}

impl Default for Normalization {
    fn default() -> Self {
        Normalization {
            collapse_whitespace: true,
            case_sensitive: true,
        }
    }
}

impl Normalization {
    pub fn raw() -> Self {
        Normalization {
            collapse_whitespace: false,
            case_sensitive: true,
        }
    }

    pub fn apply(&self, s: &str) -> Vec<char> {
        let text: String = if self.collapse_whitespace {
            s.split_whitespace().collect::<Vec<_>>().join(" ")
        } else {
            s.to_owned()
        };
        if self.case_sensitive {
            text.chars().collect()
        } else {
            text.chars().flat_map(char::to_lowercase).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RecognitionEvalResult {
    pub cer: f64,
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    /// Length of the normalized ground truth.
    pub n: usize,
}

impl RecognitionEvalResult {
    pub fn from_counts(s: usize, d: usize, i: usize, n: usize) -> Self {
        RecognitionEvalResult {
            cer: (s + d + i) as f64 / n.max(1) as f64,
            substitutions: s,
            deletions: d,
            insertions: i,
            n,
        }
    }

    pub fn edits(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }

    /// Pools raw counts; the CER is recomputed from the totals.
    pub fn pooled<'a>(items: impl IntoIterator<Item = &'a RecognitionEvalResult>) -> Self {
        let (mut s, mut d, mut i, mut n) = (0, 0, 0, 0);
        for r in items {
            s += r.substitutions;
            d += r.deletions;
            i += r.insertions;
            n += r.n;
        }
        Self::from_counts(s, d, i, n)
    }

    /// CER clamped to `[0, 1]` for reporting.
    pub fn clamped_cer(&self) -> f64 {
        self.cer.min(1.0)
    }
}

/// Substitution, deletion and insertion counts of a minimal edit script
/// turning `gt` into `pred`. On ties the backtrace prefers the diagonal
/// (match or substitution), then insertion, then deletion.
pub fn edit_counts(gt: &[char], pred: &[char]) -> (usize, usize, usize) {
    let (n, m) = (gt.len(), pred.len());
    let w = m + 1;
    let mut dp = vec![0u32; (n + 1) * w];
    for (j, cell) in dp[..w].iter_mut().enumerate() {
        *cell = j as u32;
    }
    for i in 1..=n {
        dp[i * w] = i as u32;
        for j in 1..=m {
            let sub = dp[(i - 1) * w + j - 1] + u32::from(gt[i - 1] != pred[j - 1]);
            let del = dp[(i - 1) * w + j] + 1;
            let ins = dp[i * w + j - 1] + 1;
            dp[i * w + j] = sub.min(del).min(ins);
        }
    }

    let (mut s, mut d, mut ins) = (0, 0, 0);
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dp[i * w + j];
        if i > 0 && j > 0 {
            let diff = u32::from(gt[i - 1] != pred[j - 1]);
            if dp[(i - 1) * w + j - 1] + diff == here {
                s += diff as usize;
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if j > 0 && dp[i * w + j - 1] + 1 == here {
            ins += 1;
            j -= 1;
        } else {
            d += 1;
            i -= 1;
        }
    }
    (s, d, ins)
}

/// Scores `predicted` against `ground_truth` after normalization.
///
/// With an empty ground truth the CER is the predicted length
/// (`I / max(N, 1)`), so an empty pair scores 0.
pub fn cer(ground_truth: &str, predicted: &str, norm: &Normalization) -> RecognitionEvalResult {
    let gt = norm.apply(ground_truth);
    let pred = norm.apply(predicted);
    let (s, d, i) = edit_counts(&gt, &pred);
    RecognitionEvalResult::from_counts(s, d, i, gt.len())
}
