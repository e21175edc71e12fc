//! Brute-force reference implementations for test assertions.
//!
//! Everything here is written from the textbook definitions, independently
//! of the production code paths it checks: naive Lloyd iteration, DBSCAN
//! via union-find over core points, pair-counting ARI, and the direct
//! per-sample silhouette formula. Keep these slow and obvious.

use ndarray::ArrayView2;

fn dist(x: ArrayView2<f64>, i: usize, j: usize) -> f64 {
    x.row(i)
        .iter()
        .zip(x.row(j).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Naive Lloyd iteration from explicit initial centers: assign each point
/// to the nearest center (ties to the lowest index), recompute means
/// (empty clusters keep their center), stop when the largest center move is
/// below `tol` or after `max_iter` rounds.
pub fn lloyd_reference(
    x: ArrayView2<f64>,
    init: &[Vec<f64>],
    tol: f64,
    max_iter: usize,
) -> Vec<usize> {
    let n = x.nrows();
    let p = x.ncols();
    let mut centers = init.to_vec();
    let mut assign = vec![0usize; n];
    for _ in 0..max_iter {
        for i in 0..n {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let mut d = 0.0;
                for j in 0..p {
                    let v = x[(i, j)] - center[j];
                    d += v * v;
                }
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            assign[i] = best;
        }
        let mut shift: f64 = 0.0;
        for (c, center) in centers.iter_mut().enumerate() {
            let rows: Vec<usize> = (0..n).filter(|&i| assign[i] == c).collect();
            if rows.is_empty() {
                continue;
            }
            let mut moved = 0.0;
            for j in 0..p {
                let mean = rows.iter().map(|&i| x[(i, j)]).sum::<f64>() / rows.len() as f64;
                let d = mean - center[j];
                moved += d * d;
                center[j] = mean;
            }
            shift = shift.max(moved.sqrt());
        }
        if shift < tol {
            break;
        }
    }
    assign
}

/// Total squared distance of each point to its assignment-group mean.
pub fn inertia_reference(x: ArrayView2<f64>, assign: &[usize]) -> f64 {
    let n = x.nrows();
    let p = x.ncols();
    let k = assign.iter().copied().max().map_or(0, |m| m + 1);
    let mut total = 0.0;
    for c in 0..k {
        let rows: Vec<usize> = (0..n).filter(|&i| assign[i] == c).collect();
        if rows.is_empty() {
            continue;
        }
        for j in 0..p {
            let mean = rows.iter().map(|&i| x[(i, j)]).sum::<f64>() / rows.len() as f64;
            for &i in &rows {
                let d = x[(i, j)] - mean;
                total += d * d;
            }
        }
    }
    total
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let root = self.find(self.parent[i]);
            self.parent[i] = root;
        }
        self.parent[i]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// DBSCAN by a different construction than breadth-first expansion: union
/// eps-adjacent core points into components, order components by their
/// smallest core id, attach each border point to the earliest-ordered
/// component that reaches it, then number noise points as singletons in id
/// order.
pub fn dbscan_reference(x: ArrayView2<f64>, eps: f64, min_samples: usize) -> Vec<u32> {
    let n = x.nrows();
    let within = |i: usize, j: usize| dist(x, i, j) <= eps;
    let core: Vec<bool> = (0..n)
        .map(|i| (0..n).filter(|&j| within(i, j)).count() >= min_samples)
        .collect();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if core[i] && core[j] && within(i, j) {
                uf.union(i, j);
            }
        }
    }
    // Components in order of their smallest core id.
    let mut component_order: Vec<usize> = Vec::new();
    for i in 0..n {
        if core[i] {
            let root = uf.find(i);
            if !component_order.contains(&root) {
                component_order.push(root);
            }
        }
    }
    let cluster_of_root = |root: usize, order: &[usize]| -> u32 {
        order.iter().position(|&r| r == root).unwrap() as u32
    };

    const NOISE: u32 = u32::MAX;
    let mut labels = vec![NOISE; n];
    for i in 0..n {
        if core[i] {
            let root = uf.find(i);
            labels[i] = cluster_of_root(root, &component_order);
        }
    }
    for i in 0..n {
        if core[i] || labels[i] != NOISE {
            continue;
        }
        // Earliest-ordered component with a core point within eps.
        let mut best: Option<u32> = None;
        for j in 0..n {
            if core[j] && within(i, j) {
                let c = labels[j];
                best = Some(best.map_or(c, |b| b.min(c)));
            }
        }
        if let Some(c) = best {
            labels[i] = c;
        }
    }
    let mut next = component_order.len() as u32;
    for label in labels.iter_mut() {
        if *label == NOISE {
            *label = next;
            next += 1;
        }
    }
    labels
}

/// Pair-counting adjusted Rand index.
pub fn ari_reference(truth: &[u32], pred: &[u32]) -> f64 {
    assert_eq!(truth.len(), pred.len());
    let n = truth.len();
    let mut n11 = 0f64;
    let mut same_truth = 0f64;
    let mut same_pred = 0f64;
    let mut total = 0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            total += 1.0;
            let t = truth[i] == truth[j];
            let p = pred[i] == pred[j];
            if t {
                same_truth += 1.0;
            }
            if p {
                same_pred += 1.0;
            }
            if t && p {
                n11 += 1.0;
            }
        }
    }
    let expected = same_truth * same_pred / total;
    let max = 0.5 * (same_truth + same_pred);
    if (max - expected).abs() < f64::EPSILON {
        return 1.0;
    }
    (n11 - expected) / (max - expected)
}

/// Direct textbook silhouette: per-sample `(b - a) / max(a, b)`, singleton
/// samples contributing zero, averaged over all samples.
pub fn silhouette_reference(x: ArrayView2<f64>, labels: &[u32]) -> f64 {
    let n = x.nrows();
    let clusters: Vec<u32> = {
        let mut c = labels.to_vec();
        c.sort_unstable();
        c.dedup();
        c
    };
    let mut total = 0.0;
    for i in 0..n {
        let own: Vec<usize> = (0..n)
            .filter(|&j| j != i && labels[j] == labels[i])
            .collect();
        if own.is_empty() {
            continue;
        }
        let a = own.iter().map(|&j| dist(x, i, j)).sum::<f64>() / own.len() as f64;
        let mut b = f64::INFINITY;
        for &c in &clusters {
            if c == labels[i] {
                continue;
            }
            let other: Vec<usize> = (0..n).filter(|&j| labels[j] == c).collect();
            if other.is_empty() {
                continue;
            }
            let mean = other.iter().map(|&j| dist(x, i, j)).sum::<f64>() / other.len() as f64;
            b = b.min(mean);
        }
        total += (b - a) / a.max(b);
    }
    total / n as f64
}

/// Resolves final labels by literally replaying fusion events into a plain
/// map and following chains.
pub fn replay_fusions(n: usize, events: &[(u32, u32)]) -> Vec<u32> {
    let mut parent: Vec<u32> = (0..n as u32).collect();
    for &(child, new_parent) in events {
        parent[child as usize] = new_parent;
    }
    let mut roots: Vec<u32> = (0..n as u32)
        .filter(|&i| parent[i as usize] == i)
        .collect();
    roots.sort_unstable();
    (0..n as u32)
        .map(|mut cur| {
            while parent[cur as usize] != cur {
                cur = parent[cur as usize];
            }
            roots.binary_search(&cur).unwrap() as u32
        })
        .collect()
}
