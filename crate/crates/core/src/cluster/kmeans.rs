//! Seeded k-means with k-means++ initialization.

use ndarray::{ArrayView1, ArrayView2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::rng::rng_from;

/// Lloyd stops once the largest centroid move falls below this.
pub const KMEANS_SHIFT_TOL: f64 = 1e-4;
/// Hard cap on Lloyd iterations.
pub const KMEANS_MAX_ITER: usize = 300;

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// k-means++ seeding: first center uniform, subsequent centers sampled with
/// probability proportional to the squared distance to the nearest chosen
/// center. Returns the chosen row indices.
///
/// Selection compares `u * total` against the running prefix sum, so scaling
/// the whole matrix by a positive constant leaves the chosen sequence
/// unchanged; the identifier-level privacy property relies on this.
pub fn kmeans_pp_init(x: ArrayView2<f64>, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = x.nrows();
    debug_assert!(k >= 1 && k <= n);
    let mut chosen = Vec::with_capacity(k);
    let first = rng.random_range(0..n);
    chosen.push(first);
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), x.row(first))).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if target < acc {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            // Every point coincides with a chosen center; any pick gives an
            // empty cluster that is compacted away after Lloyd.
            rng.random_range(0..n)
        };
        chosen.push(next);
        for i in 0..n {
            let d = sq_dist(x.row(i), x.row(next));
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    chosen
}

/// Runs Lloyd from the given initial centers until the largest centroid move
/// drops below [`KMEANS_SHIFT_TOL`] or [`KMEANS_MAX_ITER`] passes.
///
/// Assignment ties break towards the lowest center index and empty clusters
/// keep their previous centroid, so the trajectory is fully determined by
/// the initial centers.
pub fn lloyd(x: ArrayView2<f64>, init: &[Vec<f64>]) -> Vec<usize> {
    let n = x.nrows();
    let p = x.ncols();
    let k = init.len();
    let mut centroids: Vec<Vec<f64>> = init.to_vec();
    let mut assign = vec![0usize; n];
    for _ in 0..KMEANS_MAX_ITER {
        for i in 0..n {
            let row = x.row(i);
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let d: f64 = row
                    .iter()
                    .zip(centroid.iter())
                    .map(|(a, b)| {
                        let v = a - b;
                        v * v
                    })
                    .sum();
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            assign[i] = best;
        }
        let mut sums = vec![vec![0.0f64; p]; k];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[assign[i]] += 1;
            for (s, v) in sums[assign[i]].iter_mut().zip(x.row(i).iter()) {
                *s += v;
            }
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let mut move2 = 0.0;
            for j in 0..p {
                let new = sums[c][j] / counts[c] as f64;
                let d = new - centroids[c][j];
                move2 += d * d;
                centroids[c][j] = new;
            }
            shift = shift.max(move2.sqrt());
        }
        if shift < KMEANS_SHIFT_TOL {
            break;
        }
    }
    assign
}

/// Seeded k-means returning dense labels in first-occurrence order.
///
/// `k` larger than the number of rows is clamped with a warning; the label
/// range never exceeds the number of distinct rows.
pub fn kmeans_fit(x: ArrayView2<f64>, k: usize, seed: u64) -> Vec<u32> {
    let n = x.nrows();
    assert!(n >= 1, "k-means needs at least one sample");
    assert!(k >= 1, "k-means needs k >= 1");
    let k_eff = if k > n {
        log::warn!("k={} exceeds sample count {}; clamping", k, n);
        n
    } else {
        k
    };
    let mut rng = rng_from(seed);
    let init_rows = kmeans_pp_init(x, k_eff, &mut rng);
    let init: Vec<Vec<f64>> = init_rows.iter().map(|&r| x.row(r).to_vec()).collect();
    let assign = lloyd(x, &init);
    densify(&assign)
}

/// Relabels arbitrary assignments densely, numbering clusters by first
/// occurrence.
pub fn densify(assign: &[usize]) -> Vec<u32> {
    let mut remap: std::collections::HashMap<usize, u32> = std::collections::HashMap::new();
    let mut next = 0u32;
    assign
        .iter()
        .map(|&a| {
            *remap.entry(a).or_insert_with(|| {
                let v = next;
                next += 1;
                v
            })
        })
        .collect()
}

/// Total within-cluster squared distance to the label-group means.
pub fn inertia(x: ArrayView2<f64>, labels: &[u32]) -> f64 {
    let p = x.ncols();
    let k = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
    let mut sums = vec![vec![0.0f64; p]; k];
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l as usize] += 1;
        for (s, v) in sums[l as usize].iter_mut().zip(x.row(i).iter()) {
            *s += v;
        }
    }
    let mut total = 0.0;
    for (i, &l) in labels.iter().enumerate() {
        for (j, v) in x.row(i).iter().enumerate() {
            let c = sums[l as usize][j] / counts[l as usize] as f64;
            let d = v - c;
            total += d * d;
        }
    }
    total
}
