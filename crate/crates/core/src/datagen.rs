//! Synthetic dataset generators, the overlap-constrained vertical feature
//! partitioner, and CSV ingestion.

use std::path::Path;

use ndarray::{Array2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{mix_seed, rng_from};

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
    #[error("cannot split {p} features across {agents} agents")]
    TooFewFeatures { p: usize, agents: usize },
    #[error("csv parse error at line {line}: {detail}")]
    CsvParse { line: usize, detail: String },
    #[error("csv i/o: {0}")]
    CsvIo(#[from] csv::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("metadata: {0}")]
    Metadata(#[from] serde_json::Error),
}

/// A dataset with optional ground truth and feature names.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub features: Array2<f64>,
    pub labels: Option<Vec<u32>>,
    pub feature_names: Option<Vec<String>>,
}

impl LabeledDataset {
    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn p(&self) -> usize {
        self.features.ncols()
    }

    /// The sub-matrix an agent holding `feature_set` observes.
    pub fn view(&self, feature_set: &[usize]) -> Array2<f64> {
        self.features.select(Axis(1), feature_set)
    }
}

/// Which feature indices each agent holds. Sets may overlap; their union
/// covers the full feature range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeaturePartition {
    pub sets: Vec<Vec<usize>>,
}

impl FeaturePartition {
    pub fn agents(&self) -> usize {
        self.sets.len()
    }

    /// Checks the structural invariants: full coverage of `[0, p)`, no
    /// empty agent, and pairwise overlap at most `cap * min(|a|, |b|)`.
    pub fn validate(&self, p: usize, cap: f64) -> Result<(), DatagenError> {
        let mut covered = vec![false; p];
        for (i, set) in self.sets.iter().enumerate() {
            if set.is_empty() {
                return Err(DatagenError::InvalidParameter(format!(
                    "agent {i} has no features"
                )));
            }
            for &f in set {
                if f >= p {
                    return Err(DatagenError::InvalidParameter(format!(
                        "feature {f} out of range"
                    )));
                }
                covered[f] = true;
            }
        }
        if !covered.iter().all(|&c| c) {
            return Err(DatagenError::InvalidParameter(
                "partition does not cover all features".into(),
            ));
        }
        for a in 0..self.sets.len() {
            for b in (a + 1)..self.sets.len() {
                let sa: std::collections::HashSet<_> = self.sets[a].iter().collect();
                let shared = self.sets[b].iter().filter(|f| sa.contains(f)).count();
                let min = self.sets[a].len().min(self.sets[b].len());
                if shared as f64 > cap * min as f64 + 1e-9 {
                    return Err(DatagenError::InvalidParameter(format!(
                        "agents {a} and {b} share {shared} of {min} features, over the cap"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The multimodal benchmark: two concentric noisy spheres in features 0-2
/// and three fixed unit-square vertices in features 3-4, drawn
/// independently. Ground truth is the product of the two assignments, six
/// classes.
pub fn gen_multimodal(n: usize, seed: u64) -> Result<LabeledDataset, DatagenError> {
    if n == 0 || n % 2 != 0 {
        return Err(DatagenError::InvalidParameter(
            "multimodal generator needs an even positive n".into(),
        ));
    }
    // Three of the unit square's corners; the paper's discrete modality has
    // exactly three distinct values.
    const VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let mut rng = rng_from(mix_seed(seed, 0));
    let radial = Normal::new(0.0, 0.3).expect("positive std");
    let direction = Normal::new(0.0, 1.0).expect("positive std");
    let mut features = Array2::zeros((n, 5));
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let sphere = if i < n / 2 { 0u32 } else { 1u32 };
        let radius = if sphere == 0 { 3.0 } else { 7.0 } + radial.sample(&mut rng);
        // Normalized Gaussian direction: uniform on the sphere.
        let (mut dx, mut dy, mut dz): (f64, f64, f64);
        loop {
            dx = direction.sample(&mut rng);
            dy = direction.sample(&mut rng);
            dz = direction.sample(&mut rng);
            let norm = (dx * dx + dy * dy + dz * dz).sqrt();
            if norm > 1e-12 {
                dx /= norm;
                dy /= norm;
                dz /= norm;
                break;
            }
        }
        features[(i, 0)] = radius * dx;
        features[(i, 1)] = radius * dy;
        features[(i, 2)] = radius * dz;
        let vertex = rng.random_range(0..3u32);
        features[(i, 3)] = VERTICES[vertex as usize][0];
        features[(i, 4)] = VERTICES[vertex as usize][1];
        labels.push(sphere * 3 + vertex);
    }
    Ok(LabeledDataset {
        features,
        labels: Some(labels),
        feature_names: Some(
            ["sx", "sy", "sz", "vx", "vy"].iter().map(|s| s.to_string()).collect(),
        ),
    })
}

/// Parameters for the Gaussian blob generator used in the robustness
/// experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobsConfig {
    pub n: usize,
    /// Number of planted clusters.
    pub c: usize,
    /// Standard deviation of the isotropic noise on informative features.
    pub sigma: f64,
    /// Standard-normal noise features appended after the informative block.
    pub n_noise_features: usize,
    /// Number of agents the features are split across.
    pub agents: usize,
    /// Pairwise Euclidean distance between cluster centers in the full
    /// space.
    pub center_distance: f64,
    pub seed: u64,
}

impl Default for BlobsConfig {
    fn default() -> Self {
        BlobsConfig {
            n: 1000,
            c: 4,
            sigma: 0.25,
            n_noise_features: 0,
            agents: 3,
            center_distance: 2.0,
            seed: 0,
        }
    }
}

/// Isotropic Gaussian blobs around fixed centers, with the informative
/// features split evenly across agents and noise features dealt round
/// robin. The partition is disjoint.
///
/// Each agent's informative block holds a scaled copy of the same one-hot
/// center layout (`c` dimensions per agent), so every view carries signal
/// and full-space center distances equal `center_distance`.
pub fn gen_blobs(cfg: &BlobsConfig) -> Result<(LabeledDataset, FeaturePartition), DatagenError> {
    if cfg.n == 0 || cfg.c == 0 || cfg.n % cfg.c != 0 {
        return Err(DatagenError::InvalidParameter(
            "blob generator needs c >= 1 dividing n".into(),
        ));
    }
    if !(cfg.sigma > 0.0 && cfg.sigma <= 1.0) {
        return Err(DatagenError::InvalidParameter(
            "sigma must lie in (0, 1]".into(),
        ));
    }
    if cfg.agents == 0 {
        return Err(DatagenError::InvalidParameter("need at least one agent".into()));
    }
    let d_info = cfg.agents * cfg.c;
    let p = d_info + cfg.n_noise_features;
    // Per-block scale so that full-space pairwise distance equals
    // center_distance: blocks are one-hot pairs at distance scale*sqrt(2),
    // repeated over `agents` blocks.
    let scale = cfg.center_distance / (2.0 * cfg.agents as f64).sqrt();
    let mut rng = rng_from(mix_seed(cfg.seed, 1));
    let noise = Normal::new(0.0, cfg.sigma).expect("positive std");
    let unit = Normal::new(0.0, 1.0).expect("positive std");

    let per_cluster = cfg.n / cfg.c;
    let mut features = Array2::zeros((cfg.n, p));
    let mut labels = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let cluster = (i / per_cluster) as u32;
        for block in 0..cfg.agents {
            for dim in 0..cfg.c {
                let center = if dim == cluster as usize { scale } else { 0.0 };
                features[(i, block * cfg.c + dim)] = center + noise.sample(&mut rng);
            }
        }
        for f in 0..cfg.n_noise_features {
            features[(i, d_info + f)] = unit.sample(&mut rng);
        }
        labels.push(cluster);
    }

    let mut sets: Vec<Vec<usize>> = (0..cfg.agents)
        .map(|a| (a * cfg.c..(a + 1) * cfg.c).collect())
        .collect();
    for f in 0..cfg.n_noise_features {
        sets[f % cfg.agents].push(d_info + f);
    }

    Ok((
        LabeledDataset {
            features,
            labels: Some(labels),
            feature_names: None,
        },
        FeaturePartition { sets },
    ))
}

/// Assigns each feature a uniform primary owner, repairs empty agents by
/// moving a feature from the largest set, then offers each feature to every
/// non-owner independently with probability `share_prob`, skipping any copy
/// that would push a pairwise overlap above `overlap_cap * min(|a|, |b|)`.
pub fn partition_features(
    p: usize,
    agents: usize,
    share_prob: f64,
    overlap_cap: f64,
    seed: u64,
) -> Result<FeaturePartition, DatagenError> {
    if agents == 0 || p < agents {
        return Err(DatagenError::TooFewFeatures { p, agents });
    }
    if !(0.0..=1.0).contains(&share_prob) || !(0.0..=1.0).contains(&overlap_cap) {
        return Err(DatagenError::InvalidParameter(
            "share_prob and overlap_cap must lie in [0, 1]".into(),
        ));
    }
    let mut rng = rng_from(mix_seed(seed, 2));
    let mut owner: Vec<usize> = (0..p).map(|_| rng.random_range(0..agents)).collect();
    // Empty-agent repair: take a feature from the currently largest set.
    loop {
        let mut counts = vec![0usize; agents];
        for &o in &owner {
            counts[o] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            break;
        };
        let largest = counts
            .iter()
            .enumerate()
            .max_by_key(|(_, &c)| c)
            .map(|(a, _)| a)
            .expect("at least one agent");
        let moved = owner
            .iter()
            .position(|&o| o == largest)
            .expect("largest agent owns a feature");
        owner[moved] = empty;
    }

    let mut sets: Vec<Vec<usize>> = vec![Vec::new(); agents];
    for (f, &o) in owner.iter().enumerate() {
        sets[o].push(f);
    }
    let mut membership: Vec<Vec<bool>> = (0..agents)
        .map(|a| {
            let mut m = vec![false; p];
            for &f in &sets[a] {
                m[f] = true;
            }
            m
        })
        .collect();
    let mut overlap = vec![vec![0usize; agents]; agents];

    for f in 0..p {
        for b in 0..agents {
            if b == owner[f] {
                continue;
            }
            if rng.random::<f64>() >= share_prob {
                continue;
            }
            // Adding f to b raises the overlap with every holder of f.
            let holders: Vec<usize> = (0..agents).filter(|&g| membership[g][f]).collect();
            let new_size_b = sets[b].len() + 1;
            let violates = holders.iter().any(|&g| {
                let min = new_size_b.min(sets[g].len());
                (overlap[b][g] + 1) as f64 > overlap_cap * min as f64 + 1e-9
            });
            if violates {
                continue;
            }
            for &g in &holders {
                overlap[b][g] += 1;
                overlap[g][b] += 1;
            }
            membership[b][f] = true;
            sets[b].push(f);
        }
    }
    for set in &mut sets {
        set.sort_unstable();
    }
    let partition = FeaturePartition { sets };
    partition.validate(p, overlap_cap)?;
    Ok(partition)
}

/// Sidecar metadata written next to generated CSV datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub n: usize,
    pub p: usize,
    pub c: Option<usize>,
    pub seed: u64,
    pub generator: String,
}

/// Loads a rectangular numeric CSV with a header row. `label_column` names
/// an integer ground-truth column; `categorical` columns are one-hot
/// encoded, one output column per distinct level in lexicographic order.
pub fn load_csv(
    path: &Path,
    label_column: Option<&str>,
    categorical: &[String],
) -> Result<LabeledDataset, DatagenError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.to_string()).collect();
    let label_idx = match label_column {
        Some(name) => Some(headers.iter().position(|h| h == name).ok_or_else(|| {
            DatagenError::CsvParse {
                line: 1,
                detail: format!("label column {name:?} not in header"),
            }
        })?),
        None => None,
    };
    let cat_idx: Vec<usize> = categorical
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| DatagenError::CsvParse {
                    line: 1,
                    detail: format!("categorical column {name:?} not in header"),
                })
        })
        .collect::<Result<_, _>>()?;

    let mut raw_rows: Vec<Vec<String>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| DatagenError::CsvParse {
            line: i + 2,
            detail: e.to_string(),
        })?;
        raw_rows.push(record.iter().map(|s| s.to_string()).collect());
    }

    // Collect the level sets of categorical columns.
    let mut levels: Vec<Vec<String>> = Vec::new();
    for &ci in &cat_idx {
        let mut vals: Vec<String> = raw_rows.iter().map(|r| r[ci].clone()).collect();
        vals.sort();
        vals.dedup();
        levels.push(vals);
    }

    let mut labels: Option<Vec<u32>> = label_idx.map(|_| Vec::with_capacity(raw_rows.len()));
    let mut names: Vec<String> = Vec::new();
    for (j, h) in headers.iter().enumerate() {
        if Some(j) == label_idx {
            continue;
        }
        if let Some(k) = cat_idx.iter().position(|&c| c == j) {
            for level in &levels[k] {
                names.push(format!("{h}={level}"));
            }
        } else {
            names.push(h.clone());
        }
    }

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(raw_rows.len());
    for (i, record) in raw_rows.iter().enumerate() {
        let line = i + 2; // header is line 1
        let mut row = Vec::with_capacity(names.len());
        for (j, value) in record.iter().enumerate() {
            if Some(j) == label_idx {
                let label: i64 = value.trim().parse().map_err(|_| DatagenError::CsvParse {
                    line,
                    detail: format!("label {value:?} is not an integer"),
                })?;
                if label < 0 {
                    return Err(DatagenError::CsvParse {
                        line,
                        detail: "labels must be non-negative".into(),
                    });
                }
                labels.as_mut().expect("label_idx set").push(label as u32);
                continue;
            }
            if let Some(k) = cat_idx.iter().position(|&c| c == j) {
                for level in &levels[k] {
                    row.push(if level == value { 1.0 } else { 0.0 });
                }
            } else {
                let parsed: f64 = value.trim().parse().map_err(|_| DatagenError::CsvParse {
                    line,
                    detail: format!(
                        "column {:?} value {value:?} is not numeric (declare it categorical?)",
                        headers[j]
                    ),
                })?;
                if !parsed.is_finite() {
                    return Err(DatagenError::CsvParse {
                        line,
                        detail: format!("non-finite value in column {:?}", headers[j]),
                    });
                }
                row.push(parsed);
            }
        }
        rows.push(row);
    }

    let n = rows.len();
    let p = names.len();
    let mut features = Array2::zeros((n, p));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            features[(i, j)] = v;
        }
    }
    Ok(LabeledDataset {
        features,
        labels,
        feature_names: Some(names),
    })
}

/// Writes the dataset as RFC-4180 CSV with a header row; the label column,
/// when present, is appended last as `label`.
pub fn save_csv(dataset: &LabeledDataset, path: &Path) -> Result<(), DatagenError> {
    let mut writer = csv::Writer::from_path(path)?;
    let names: Vec<String> = match &dataset.feature_names {
        Some(names) => names.clone(),
        None => (0..dataset.p()).map(|j| format!("f{j}")).collect(),
    };
    let mut header = names;
    if dataset.labels.is_some() {
        header.push("label".to_string());
    }
    writer.write_record(&header)?;
    for i in 0..dataset.n() {
        let mut record: Vec<String> = dataset
            .features
            .row(i)
            .iter()
            .map(|v| format!("{v}"))
            .collect();
        if let Some(labels) = &dataset.labels {
            record.push(labels[i].to_string());
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_meta(meta: &DatasetMeta, path: &Path) -> Result<(), DatagenError> {
    std::fs::write(path, serde_json::to_string_pretty(meta)?)?;
    Ok(())
}

pub fn read_meta(path: &Path) -> Result<DatasetMeta, DatagenError> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multimodal_has_six_nonempty_classes() {
        let ds = gen_multimodal(1200, 7).unwrap();
        let labels = ds.labels.as_ref().unwrap();
        let mut counts = [0usize; 6];
        for &l in labels {
            counts[l as usize] += 1;
        }
        assert!(counts.iter().all(|&c| c > 0), "counts {counts:?}");
        assert_eq!(ds.p(), 5);
    }

    #[test]
    fn multimodal_radii_concentrate_at_three_and_seven() {
        let ds = gen_multimodal(1200, 11).unwrap();
        let labels = ds.labels.as_ref().unwrap();
        let mut sums = [0.0f64; 2];
        let mut counts = [0usize; 2];
        for i in 0..ds.n() {
            let r: f64 = (0..3).map(|j| ds.features[(i, j)].powi(2)).sum::<f64>().sqrt();
            let sphere = (labels[i] / 3) as usize;
            sums[sphere] += r;
            counts[sphere] += 1;
        }
        let mean0 = sums[0] / counts[0] as f64;
        let mean1 = sums[1] / counts[1] as f64;
        assert!((mean0 - 3.0).abs() < 0.05, "inner mean radius {mean0}");
        assert!((mean1 - 7.0).abs() < 0.05, "outer mean radius {mean1}");
    }

    #[test]
    fn multimodal_square_features_take_three_values() {
        let ds = gen_multimodal(300, 3).unwrap();
        let mut rows: Vec<(u64, u64)> = (0..ds.n())
            .map(|i| (ds.features[(i, 3)].to_bits(), ds.features[(i, 4)].to_bits()))
            .collect();
        rows.sort_unstable();
        rows.dedup();
        assert_eq!(rows.len(), 3);
    }

    #[test]
    fn multimodal_modalities_are_uncorrelated() {
        for seed in [1u64, 2, 3] {
            let ds = gen_multimodal(1200, seed).unwrap();
            let labels = ds.labels.as_ref().unwrap();
            let sphere: Vec<f64> = labels.iter().map(|&l| (l / 3) as f64).collect();
            let vertex: Vec<f64> = labels.iter().map(|&l| (l % 3) as f64).collect();
            let n = labels.len() as f64;
            let ms = sphere.iter().sum::<f64>() / n;
            let mv = vertex.iter().sum::<f64>() / n;
            let cov: f64 = sphere
                .iter()
                .zip(vertex.iter())
                .map(|(s, v)| (s - ms) * (v - mv))
                .sum::<f64>()
                / n;
            let ss = (sphere.iter().map(|s| (s - ms).powi(2)).sum::<f64>() / n).sqrt();
            let sv = (vertex.iter().map(|v| (v - mv).powi(2)).sum::<f64>() / n).sqrt();
            let corr = cov / (ss * sv);
            assert!(corr.abs() < 0.1, "seed {seed}: correlation {corr}");
        }
    }

    #[test]
    fn multimodal_rejects_odd_n() {
        assert!(gen_multimodal(7, 0).is_err());
    }

    #[test]
    fn blobs_have_balanced_clusters_and_disjoint_partition() {
        let cfg = BlobsConfig {
            n: 400,
            n_noise_features: 5,
            ..BlobsConfig::default()
        };
        let (ds, partition) = gen_blobs(&cfg).unwrap();
        assert_eq!(ds.p(), 3 * 4 + 5);
        let labels = ds.labels.as_ref().unwrap();
        for c in 0..4u32 {
            assert_eq!(labels.iter().filter(|&&l| l == c).count(), 100);
        }
        partition.validate(ds.p(), 0.0).unwrap();
        let total: usize = partition.sets.iter().map(Vec::len).sum();
        assert_eq!(total, ds.p(), "no overlap in the blob partition");
    }

    #[test]
    fn blob_cluster_means_sit_near_their_centers() {
        let cfg = BlobsConfig {
            n: 2000,
            sigma: 0.3,
            seed: 5,
            ..BlobsConfig::default()
        };
        let (ds, _) = gen_blobs(&cfg).unwrap();
        let labels = ds.labels.as_ref().unwrap();
        let scale = cfg.center_distance / (2.0 * cfg.agents as f64).sqrt();
        let tol = 3.0 * cfg.sigma / (cfg.n as f64 / cfg.c as f64).sqrt();
        for cluster in 0..cfg.c {
            let rows: Vec<usize> = (0..ds.n()).filter(|&i| labels[i] == cluster as u32).collect();
            for block in 0..cfg.agents {
                for dim in 0..cfg.c {
                    let col = block * cfg.c + dim;
                    let mean: f64 =
                        rows.iter().map(|&i| ds.features[(i, col)]).sum::<f64>() / rows.len() as f64;
                    let center = if dim == cluster { scale } else { 0.0 };
                    assert!(
                        (mean - center).abs() < tol,
                        "cluster {cluster} block {block} dim {dim}: mean {mean} vs {center}"
                    );
                }
            }
        }
    }

    #[test]
    fn blob_centers_are_at_the_requested_distance() {
        let cfg = BlobsConfig::default();
        let scale = cfg.center_distance / (2.0 * cfg.agents as f64).sqrt();
        // Centers differ in two one-hot dims per block across all blocks.
        let d2 = cfg.agents as f64 * 2.0 * scale * scale;
        assert!((d2.sqrt() - cfg.center_distance).abs() < 1e-12);
    }

    #[test]
    fn zero_share_probability_gives_a_disjoint_cover() {
        let partition = partition_features(20, 4, 0.0, 0.3, 9).unwrap();
        partition.validate(20, 0.3).unwrap();
        let total: usize = partition.sets.iter().map(Vec::len).sum();
        assert_eq!(total, 20);
    }

    #[test]
    fn single_agent_owns_everything() {
        let partition = partition_features(7, 1, 0.2, 0.3, 1).unwrap();
        assert_eq!(partition.sets, vec![(0..7).collect::<Vec<_>>()]);
    }

    #[test]
    fn sharing_rate_is_cap_truncated_and_cap_never_violated() {
        // Monte-Carlo audit of the sampler at the dimensions used in the
        // agent-count study.
        let p = 2094;
        let agents = 4;
        let draws = 200;
        let mut shared_pairs = 0u64;
        let mut observed = 0u64;
        for seed in 0..draws {
            let partition = partition_features(p, agents, 0.2, 0.3, seed).unwrap();
            partition.validate(p, 0.3).unwrap();
            let masks: Vec<Vec<bool>> = partition
                .sets
                .iter()
                .map(|set| {
                    let mut m = vec![false; p];
                    for &f in set {
                        m[f] = true;
                    }
                    m
                })
                .collect();
            for a in 0..agents {
                for b in (a + 1)..agents {
                    for f in 0..p {
                        observed += 1;
                        if masks[a][f] && masks[b][f] {
                            shared_pairs += 1;
                        }
                    }
                }
            }
        }
        let rate = shared_pairs as f64 / observed as f64;
        assert!(
            (0.1..=0.2).contains(&rate),
            "empirical pairwise share rate {rate}"
        );
    }

    #[test]
    fn partition_rejects_fewer_features_than_agents() {
        assert!(matches!(
            partition_features(2, 3, 0.2, 0.3, 0),
            Err(DatagenError::TooFewFeatures { .. })
        ));
    }

    #[test]
    fn generators_are_pure_functions_of_their_seed() {
        assert_eq!(gen_multimodal(100, 42).unwrap(), gen_multimodal(100, 42).unwrap());
        let cfg = BlobsConfig::default();
        assert_eq!(gen_blobs(&cfg).unwrap(), gen_blobs(&cfg).unwrap());
        assert_eq!(
            partition_features(30, 3, 0.2, 0.3, 4).unwrap(),
            partition_features(30, 3, 0.2, 0.3, 4).unwrap()
        );
    }
}
