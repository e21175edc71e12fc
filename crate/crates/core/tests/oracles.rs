//! Equivalence against brute-force reference implementations.

use ndarray::Array2;
use rand::Rng;
use vertcohirf::cluster::{dbscan_fit, inertia, kmeans_fit, kmeans_pp_init, lloyd};
use vertcohirf::metrics::{ari, silhouette};
use vertcohirf::model::{ActiveSet, ParentMap, SampleId};
use vertcohirf::rng::rng_from;
use vertcohirf_test_oracles as oracle;

fn random_matrix(rng: &mut impl Rng, n: usize, p: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_fn((n, p), |_| rng.random::<f64>() * scale)
}

#[test]
fn kmeans_follows_the_reference_trajectory_from_shared_seeds() {
    // The spec case first: 12 points, k = 3.
    let mut rng = rng_from(300);
    let x = random_matrix(&mut rng, 12, 2, 5.0);
    let mut init_rng = rng_from(1234);
    let init_rows = kmeans_pp_init(x.view(), 3, &mut init_rng);
    let init: Vec<Vec<f64>> = init_rows.iter().map(|&r| x.row(r).to_vec()).collect();
    let ours = lloyd(x.view(), &init);
    let reference = oracle::lloyd_reference(x.view(), &init, 1e-4, 300);
    assert_eq!(ours, reference);
    let diff = (inertia(x.view(), &kmeans_fit(x.view(), 3, 99))
        - oracle::inertia_reference(
            x.view(),
            &{
                let mut r = rng_from(99);
                let rows = kmeans_pp_init(x.view(), 3, &mut r);
                let init: Vec<Vec<f64>> = rows.iter().map(|&i| x.row(i).to_vec()).collect();
                oracle::lloyd_reference(x.view(), &init, 1e-4, 300)
            },
        ))
    .abs();
    assert!(diff < 1e-9, "inertia drift {diff}");

    // Then many random instances.
    for trial in 0..120u64 {
        let mut rng = rng_from(1000 + trial);
        let n = rng.random_range(3..=25);
        let p = rng.random_range(1..=4);
        let k = rng.random_range(1..=n);
        let x = random_matrix(&mut rng, n, p, 10.0);
        let mut init_rng = rng_from(5000 + trial);
        let rows = kmeans_pp_init(x.view(), k, &mut init_rng);
        let init: Vec<Vec<f64>> = rows.iter().map(|&i| x.row(i).to_vec()).collect();
        assert_eq!(
            lloyd(x.view(), &init),
            oracle::lloyd_reference(x.view(), &init, 1e-4, 300),
            "trial {trial} diverged"
        );
    }
}

#[test]
fn dbscan_matches_the_union_find_reference() {
    // The spec case: a 20-point grid.
    let grid = Array2::from_shape_fn((20, 2), |(i, j)| {
        if j == 0 {
            (i % 5) as f64
        } else {
            (i / 5) as f64 * 1.5
        }
    });
    assert_eq!(
        dbscan_fit(grid.view(), 1.0, 3),
        oracle::dbscan_reference(grid.view(), 1.0, 3)
    );

    for trial in 0..150u64 {
        let mut rng = rng_from(2000 + trial);
        let n = rng.random_range(2..=25);
        let x = random_matrix(&mut rng, n, 2, 4.0);
        let eps = rng.random::<f64>() * 1.5 + 0.1;
        let min_samples = rng.random_range(1..=5);
        assert_eq!(
            dbscan_fit(x.view(), eps, min_samples),
            oracle::dbscan_reference(x.view(), eps, min_samples),
            "trial {trial}: eps {eps}, min_samples {min_samples}"
        );
    }
}

#[test]
fn ari_matches_pair_counting_on_random_partitions() {
    for trial in 0..200u64 {
        let mut rng = rng_from(3000 + trial);
        let n = rng.random_range(2..=25);
        let truth: Vec<u32> = (0..n).map(|_| rng.random_range(0..5)).collect();
        let pred: Vec<u32> = (0..n).map(|_| rng.random_range(0..5)).collect();
        let got = ari(&truth, &pred).unwrap().value;
        let want = oracle::ari_reference(&truth, &pred);
        assert!(
            (got - want).abs() < 1e-12,
            "trial {trial}: {got} vs {want}"
        );
    }
}

#[test]
fn silhouette_matches_the_direct_formula_on_random_instances() {
    let mut kept = 0;
    let mut trial = 0u64;
    while kept < 120 {
        trial += 1;
        let mut rng = rng_from(4000 + trial);
        let n = rng.random_range(3..=25);
        let labels: Vec<u32> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let distinct: std::collections::HashSet<_> = labels.iter().collect();
        if distinct.len() < 2 {
            continue;
        }
        let x = random_matrix(&mut rng, n, 3, 6.0);
        let got = silhouette(x.view(), &labels).unwrap().value;
        let want = oracle::silhouette_reference(x.view(), &labels);
        assert!(
            (got - want).abs() < 1e-12,
            "trial {trial}: {got} vs {want}"
        );
        kept += 1;
    }
}

#[test]
fn random_fusion_forests_resolve_like_explicit_path_following() {
    // Drive a ParentMap through random fusion rounds and compare the final
    // labels with a literal replay of the recorded events.
    for trial in 0..60u64 {
        let mut rng = rng_from(6000 + trial);
        let n = 50usize;
        let mut parents = ParentMap::identity(n);
        let mut active: Vec<u32> = (0..n as u32).collect();
        let mut events: Vec<(u32, u32)> = Vec::new();
        let mut iteration = 1u32;
        while active.len() > 1 && rng.random::<f64>() < 0.85 {
            // Random consensus partition of the active set.
            let clusters = rng.random_range(1..=active.len());
            let consensus: Vec<u32> = (0..active.len())
                .map(|_| rng.random_range(0..clusters as u32))
                .collect();
            // Dense relabel so every cluster is populated.
            let mut seen = std::collections::HashMap::new();
            let consensus: Vec<u32> = consensus
                .iter()
                .map(|&c| {
                    let next = seen.len() as u32;
                    *seen.entry(c).or_insert(next)
                })
                .collect();
            // Medoid: smallest member id per cluster.
            let cluster_count = seen.len();
            let mut medoids = vec![u32::MAX; cluster_count];
            for (pos, &c) in consensus.iter().enumerate() {
                medoids[c as usize] = medoids[c as usize].min(active[pos]);
            }
            let mut new_ids = medoids.clone();
            new_ids.sort_unstable();
            let k_prev = ActiveSet::new(active.iter().map(|&i| SampleId(i)).collect(), iteration - 1)
                .unwrap();
            let k_new =
                ActiveSet::new(new_ids.iter().map(|&i| SampleId(i)).collect(), iteration).unwrap();
            let fused = parents
                .update_parents(&consensus, &k_prev, &k_new, iteration)
                .unwrap();
            events.extend(fused.iter().map(|e| (e.child.0, e.parent.0)));
            active = new_ids;
            iteration += 1;
        }
        let roots =
            ActiveSet::new(active.iter().map(|&i| SampleId(i)).collect(), iteration).unwrap();
        let ours = parents.final_labels(&roots).unwrap();
        let replayed = oracle::replay_fusions(n, &events);
        assert_eq!(ours, replayed, "trial {trial}");
    }
}
