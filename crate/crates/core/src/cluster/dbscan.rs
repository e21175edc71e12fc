//! Euclidean DBSCAN with singleton labels for noise.
//!
//! Noise points each receive a fresh label instead of a shared bucket: under
//! strict cross-agent consensus a shared noise label would merge unrelated
//! samples, while singletons can only veto merges.

use ndarray::ArrayView2;
use std::collections::VecDeque;

const UNASSIGNED: u32 = u32::MAX;

/// Standard density-based clustering. A point is core when at least
/// `min_samples` points (itself included) lie within `eps`. Clusters are
/// discovered by scanning ids in ascending order and expanding breadth
/// first, so output labels are deterministic and dense: clusters numbered in
/// discovery order, then one singleton label per noise point in id order.
pub fn dbscan_fit(x: ArrayView2<f64>, eps: f64, min_samples: usize) -> Vec<u32> {
    assert!(eps > 0.0, "dbscan needs eps > 0");
    assert!(min_samples >= 1, "dbscan needs min_samples >= 1");
    let n = x.nrows();
    let eps2 = eps * eps;

    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d2: f64 = x
                .row(i)
                .iter()
                .zip(x.row(j).iter())
                .map(|(a, b)| {
                    let d = a - b;
                    d * d
                })
                .sum();
            if d2 <= eps2 {
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
    }
    let core: Vec<bool> = neighbors
        .iter()
        .map(|nb| nb.len() + 1 >= min_samples)
        .collect();

    let mut labels = vec![UNASSIGNED; n];
    let mut next = 0u32;
    for seed in 0..n {
        if !core[seed] || labels[seed] != UNASSIGNED {
            continue;
        }
        labels[seed] = next;
        let mut queue = VecDeque::from([seed]);
        while let Some(q) = queue.pop_front() {
            for &r in &neighbors[q] {
                if labels[r] == UNASSIGNED {
                    labels[r] = next;
                    if core[r] {
                        queue.push_back(r);
                    }
                }
            }
        }
        next += 1;
    }
    for label in labels.iter_mut() {
        if *label == UNASSIGNED {
            *label = next;
            next += 1;
        }
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn isolated_points_become_singletons() {
        let x = Array2::from_shape_fn((5, 1), |(i, _)| i as f64 * 100.0);
        let labels = dbscan_fit(x.view(), 1.0, 2);
        assert_eq!(labels, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn two_dense_groups_form_two_clusters() {
        let pts = [
            [0.0, 0.0],
            [0.5, 0.0],
            [0.0, 0.5],
            [0.4, 0.4],
            [9.0, 9.0],
            [9.5, 9.0],
            [9.0, 9.5],
        ];
        let x = Array2::from_shape_fn((7, 2), |(i, j)| pts[i][j]);
        let labels = dbscan_fit(x.view(), 1.0, 3);
        assert_eq!(labels, vec![0, 0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn border_point_joins_the_earlier_cluster() {
        // One non-core point reachable from core points of both clusters;
        // the cluster discovered first claims it.
        let pts = [0.0, 0.3, 0.6, 0.9, 1.8, 2.7, 3.0, 3.3, 3.6];
        let x = Array2::from_shape_fn((9, 1), |(i, _)| pts[i]);
        let labels = dbscan_fit(x.view(), 1.0, 4);
        assert_eq!(labels, vec![0, 0, 0, 0, 0, 1, 1, 1, 1]);
    }

    #[test]
    fn noise_next_to_cluster_is_not_absorbed_without_reachability() {
        let pts = [[0.0], [0.1], [0.2], [50.0]];
        let x = Array2::from_shape_fn((4, 1), |(i, j)| pts[i][j]);
        let labels = dbscan_fit(x.view(), 0.5, 2);
        assert_eq!(labels[0], labels[1]);
        assert_eq!(labels[1], labels[2]);
        assert_eq!(labels[3], 1);
    }
}
