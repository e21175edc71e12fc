//! Base clustering methods and the per-agent local step: repeated fits on
//! random feature subsets, combined through strict or relaxed code grouping.

use ndarray::{ArrayView2, Axis};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{mix_seed, mix_seed2, rng_from};

pub mod dbscan;
pub mod kmeans;
pub mod rff;

pub use dbscan::dbscan_fit;
pub use kmeans::{densify, inertia, kmeans_fit, kmeans_pp_init, lloyd};
pub use rff::{rff_kernel_kmeans, rff_map};

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("invalid strategy parameter: {0}")]
    InvalidStrategy(String),
    #[error("invalid local step configuration: {0}")]
    InvalidStepConfig(String),
}

/// The local base clustering method of one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategyKind {
    KMeans {
        k: usize,
    },
    Dbscan {
        eps: f64,
        min_samples: usize,
    },
    RffKernelKMeans {
        k: usize,
        gamma: f64,
        #[serde(default = "default_rff_features")]
        n_features: usize,
    },
}

fn default_rff_features() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringStrategy {
    #[serde(flatten)]
    pub kind: StrategyKind,
    #[serde(default)]
    pub seed: u64,
}

impl ClusteringStrategy {
    pub fn validate(&self) -> Result<(), ClusterError> {
        match self.kind {
            StrategyKind::KMeans { k } if k < 1 => {
                Err(ClusterError::InvalidStrategy("k must be >= 1".into()))
            }
            StrategyKind::Dbscan { eps, min_samples } if eps <= 0.0 || min_samples < 1 => Err(
                ClusterError::InvalidStrategy("eps must be > 0 and min_samples >= 1".into()),
            ),
            StrategyKind::RffKernelKMeans {
                k,
                gamma,
                n_features,
            } if k < 1 || gamma <= 0.0 || n_features < 1 => Err(ClusterError::InvalidStrategy(
                "k, gamma and n_features must be positive".into(),
            )),
            _ => Ok(()),
        }
    }

    /// One fit of the underlying method. The seed is ignored by DBSCAN,
    /// which is deterministic.
    pub fn fit(&self, x: ArrayView2<f64>, seed: u64) -> Vec<u32> {
        match self.kind {
            StrategyKind::KMeans { k } => kmeans_fit(x, k, seed),
            StrategyKind::Dbscan { eps, min_samples } => dbscan_fit(x, eps, min_samples),
            StrategyKind::RffKernelKMeans {
                k,
                gamma,
                n_features,
            } => rff_kernel_kmeans(x, k, gamma, n_features, seed),
        }
    }
}

/// Configuration of the repeated local fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalStepConfig {
    /// Number of independent fits per iteration.
    pub repetitions: usize,
    /// Fraction of local features sampled per fit, in (0, 1].
    pub feature_fraction: f64,
    /// Group by relaxed agreement instead of exact code equality.
    pub relaxed: bool,
    /// Fraction of repetition components that must agree in relaxed mode.
    pub relax_threshold: f64,
}

impl Default for LocalStepConfig {
    fn default() -> Self {
        LocalStepConfig {
            repetitions: 1,
            feature_fraction: 1.0,
            relaxed: false,
            relax_threshold: 0.8,
        }
    }
}

impl LocalStepConfig {
    pub fn validate(&self) -> Result<(), ClusterError> {
        if self.repetitions < 1 {
            return Err(ClusterError::InvalidStepConfig(
                "repetitions must be >= 1".into(),
            ));
        }
        if !(self.feature_fraction > 0.0 && self.feature_fraction <= 1.0) {
            return Err(ClusterError::InvalidStepConfig(
                "feature_fraction must be in (0, 1]".into(),
            ));
        }
        if !(self.relax_threshold > 0.0 && self.relax_threshold <= 1.0) {
            return Err(ClusterError::InvalidStepConfig(
                "relax_threshold must be in (0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// Number of columns sampled per repetition out of `p` available.
    pub fn sampled_columns(&self, p: usize) -> usize {
        let q = (self.feature_fraction * p as f64).round() as usize;
        q.clamp(1, p)
    }
}

/// The per-sample label tuples from each repetition, one inner vector of
/// length `repetitions` per sample.
///
/// Repetition `r` samples its column subset and its fit seed from streams
/// derived from `(seed, strategy.seed, r)`, so the output is reproducible
/// under any agent scheduling.
pub fn repetition_codes(
    x: ArrayView2<f64>,
    strategy: &ClusteringStrategy,
    cfg: &LocalStepConfig,
    seed: u64,
) -> Vec<Vec<u32>> {
    let n = x.nrows();
    let p = x.ncols();
    assert!(p >= 1, "need at least one feature");
    let q = cfg.sampled_columns(p);
    let mut codes = vec![Vec::with_capacity(cfg.repetitions); n];
    for r in 0..cfg.repetitions {
        let rep_seed = mix_seed2(seed, strategy.seed, r as u64);
        let labels = if q == p {
            strategy.fit(x, mix_seed(rep_seed, 1))
        } else {
            let mut col_rng = rng_from(mix_seed(rep_seed, 0));
            let mut cols = rand::seq::index::sample(&mut col_rng, p, q).into_vec();
            cols.sort_unstable();
            let view = x.select(Axis(1), &cols);
            strategy.fit(view.view(), mix_seed(rep_seed, 1))
        };
        for (code, &label) in codes.iter_mut().zip(labels.iter()) {
            code.push(label);
        }
    }
    codes
}

/// Groups samples whose repetition tuples are exactly equal; dense labels in
/// first-occurrence order.
pub fn strict_group(codes: &[Vec<u32>]) -> Vec<u32> {
    let mut seen: std::collections::HashMap<&[u32], u32> = std::collections::HashMap::new();
    let mut next = 0u32;
    codes
        .iter()
        .map(|code| {
            *seen.entry(code.as_slice()).or_insert_with(|| {
                let v = next;
                next += 1;
                v
            })
        })
        .collect()
}

/// Greedy relaxed grouping: scanning samples in ascending order, a sample
/// joins the first existing group whose founding member agrees with it on at
/// least `ceil(h * R)` tuple components, otherwise it founds a new group.
pub fn relaxed_group(codes: &[Vec<u32>], h: f64) -> Vec<u32> {
    assert!(h > 0.0 && h <= 1.0, "relax threshold must be in (0, 1]");
    let reps = codes.first().map_or(0, Vec::len);
    let needed = ((h * reps as f64).ceil() as usize).clamp(1, reps.max(1));
    let mut founders: Vec<usize> = Vec::new();
    let mut labels = Vec::with_capacity(codes.len());
    for (i, code) in codes.iter().enumerate() {
        debug_assert_eq!(code.len(), reps, "ragged code tuples");
        let group = founders.iter().position(|&f| {
            codes[f]
                .iter()
                .zip(code.iter())
                .filter(|(a, b)| a == b)
                .count()
                >= needed
        });
        match group {
            Some(g) => labels.push(g as u32),
            None => {
                founders.push(i);
                labels.push(founders.len() as u32 - 1);
            }
        }
    }
    labels
}

/// One local step: `repetitions` fits on sampled feature subsets, combined
/// into per-sample code tuples and grouped strictly or in relaxed mode.
pub fn get_clusters(
    x: ArrayView2<f64>,
    strategy: &ClusteringStrategy,
    cfg: &LocalStepConfig,
    seed: u64,
) -> Vec<u32> {
    let codes = repetition_codes(x, strategy, cfg, seed);
    if cfg.relaxed {
        relaxed_group(&codes, cfg.relax_threshold)
    } else {
        strict_group(&codes)
    }
}
