//! Clustering validation: adjusted Rand index, silhouette score, and
//! aggregation of repeated-run results.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("label vectors have different lengths ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("silhouette is undefined for a single cluster")]
    SingleCluster,
    #[error("need at least one run to summarize")]
    NoRuns,
}

/// Chance-corrected agreement between two partitions, in [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AriScore {
    pub value: f64,
}

/// Mean silhouette width, in [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteScore {
    pub value: f64,
}

fn choose2(x: u64) -> u128 {
    (x as u128) * (x.saturating_sub(1) as u128) / 2
}

/// Adjusted Rand index via the contingency-table formula.
///
/// Invariant under relabeling of either argument and symmetric in its
/// arguments. Identical partitions score 1; a constant prediction against a
/// non-trivial truth scores 0 because the expected index cancels exactly.
pub fn ari(truth: &[u32], pred: &[u32]) -> Result<AriScore, MetricsError> {
    if truth.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            a: truth.len(),
            b: pred.len(),
        });
    }
    if truth.len() < 2 {
        return Err(MetricsError::TooFewSamples {
            needed: 2,
            got: truth.len(),
        });
    }
    let n = truth.len() as u64;
    let mut cells: std::collections::HashMap<(u32, u32), u64> = std::collections::HashMap::new();
    let mut rows: std::collections::HashMap<u32, u64> = std::collections::HashMap::new();
    let mut cols: std::collections::HashMap<u32, u64> = std::collections::HashMap::new();
    for (&t, &p) in truth.iter().zip(pred.iter()) {
        *cells.entry((t, p)).or_default() += 1;
        *rows.entry(t).or_default() += 1;
        *cols.entry(p).or_default() += 1;
    }
    let index: u128 = cells.values().map(|&c| choose2(c)).sum();
    let sum_rows: u128 = rows.values().map(|&c| choose2(c)).sum();
    let sum_cols: u128 = cols.values().map(|&c| choose2(c)).sum();
    let total = choose2(n);
    let expected = sum_rows as f64 * sum_cols as f64 / total as f64;
    let max = 0.5 * (sum_rows + sum_cols) as f64;
    if (max - expected).abs() < f64::EPSILON {
        // Both partitions are trivial in the same way (all-singletons or a
        // single block); they are identical, so perfect agreement.
        return Ok(AriScore { value: 1.0 });
    }
    Ok(AriScore {
        value: (index as f64 - expected) / (max - expected),
    })
}

/// Mean Euclidean silhouette over all samples. Samples in singleton
/// clusters contribute 0.
pub fn silhouette(x: ArrayView2<f64>, labels: &[u32]) -> Result<SilhouetteScore, MetricsError> {
    let n = x.nrows();
    if labels.len() != n {
        return Err(MetricsError::LengthMismatch {
            a: labels.len(),
            b: n,
        });
    }
    if n < 3 {
        return Err(MetricsError::TooFewSamples { needed: 3, got: n });
    }
    let k = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
    let mut counts = vec![0usize; k];
    for &l in labels {
        counts[l as usize] += 1;
    }
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(MetricsError::SingleCluster);
    }

    let mut total = 0.0;
    for i in 0..n {
        let own = labels[i] as usize;
        if counts[own] == 1 {
            continue; // singleton contributes 0
        }
        let mut dist_sum = vec![0.0f64; k];
        for j in 0..n {
            if i == j {
                continue;
            }
            let d: f64 = x
                .row(i)
                .iter()
                .zip(x.row(j).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            dist_sum[labels[j] as usize] += d;
        }
        let a = dist_sum[own] / (counts[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && counts[c] > 0)
            .map(|c| dist_sum[c] / counts[c] as f64)
            .fold(f64::INFINITY, f64::min);
        total += (b - a) / a.max(b);
    }
    Ok(SilhouetteScore {
        value: total / n as f64,
    })
}

/// Basic statistics over one metric across runs. The standard deviation is
/// the sample estimate (n-1 denominator), defined as 0 for a single run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl StatSummary {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("metric values are finite"));
        let median = if sorted.len() % 2 == 1 {
            sorted[sorted.len() / 2]
        } else {
            0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
        };
        Some(StatSummary {
            mean,
            sd,
            median,
            min: sorted[0],
            max: sorted[sorted.len() - 1],
        })
    }
}

/// Per-run measurements fed into [`summarize_runs`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub ari: Option<f64>,
    pub silhouette: Option<f64>,
    /// Total information bits exchanged per protocol round.
    pub bits_per_round: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunsSummary {
    pub runs: usize,
    pub ari: Option<StatSummary>,
    pub silhouette: Option<StatSummary>,
    /// Mean total bits per round index, over the runs that reached it.
    pub bits_per_round_mean: Vec<f64>,
}

pub fn summarize_runs(runs: &[RunRecord]) -> Result<RunsSummary, MetricsError> {
    if runs.is_empty() {
        return Err(MetricsError::NoRuns);
    }
    let aris: Vec<f64> = runs.iter().filter_map(|r| r.ari).collect();
    let sils: Vec<f64> = runs.iter().filter_map(|r| r.silhouette).collect();
    let max_rounds = runs.iter().map(|r| r.bits_per_round.len()).max().unwrap();
    let mut bits_mean = Vec::with_capacity(max_rounds);
    for round in 0..max_rounds {
        let vals: Vec<f64> = runs
            .iter()
            .filter_map(|r| r.bits_per_round.get(round))
            .map(|&b| b as f64)
            .collect();
        bits_mean.push(vals.iter().sum::<f64>() / vals.len() as f64);
    }
    Ok(RunsSummary {
        runs: runs.len(),
        ari: StatSummary::from_values(&aris),
        silhouette: StatSummary::from_values(&sils),
        bits_per_round_mean: bits_mean,
    })
}
