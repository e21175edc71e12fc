//! Random Fourier feature approximation of the RBF kernel, used to run
//! k-means in an approximate kernel space.

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::kmeans::kmeans_fit;
use crate::rng::{mix_seed, rng_from};

/// Maps rows of `x` through `z(v) = sqrt(2/D) * cos(W v + b)` with
/// `W ~ N(0, 2*gamma*I)` and `b ~ U[0, 2*pi)`, so that
/// `E[z(u) . z(v)] = exp(-gamma * ||u - v||^2)`.
///
/// Draw order is fixed (all of `W` row by row, then `b`) to keep the map a
/// pure function of the seed.
pub fn rff_map(x: ArrayView2<f64>, gamma: f64, n_features: usize, seed: u64) -> Array2<f64> {
    assert!(gamma > 0.0, "rff needs gamma > 0");
    assert!(n_features >= 1, "rff needs at least one feature");
    let p = x.ncols();
    let mut rng = rng_from(seed);
    let normal = Normal::new(0.0, (2.0 * gamma).sqrt()).expect("positive std");
    let w = Array2::from_shape_fn((n_features, p), |_| normal.sample(&mut rng));
    let b: Vec<f64> = (0..n_features)
        .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
        .collect();
    let scale = (2.0 / n_features as f64).sqrt();
    let mut z = Array2::zeros((x.nrows(), n_features));
    for (i, row) in x.rows().into_iter().enumerate() {
        for j in 0..n_features {
            let dot: f64 = w.row(j).iter().zip(row.iter()).map(|(a, b)| a * b).sum();
            z[(i, j)] = scale * (dot + b[j]).cos();
        }
    }
    z
}

/// k-means on the random Fourier feature map of `x`.
pub fn rff_kernel_kmeans(
    x: ArrayView2<f64>,
    k: usize,
    gamma: f64,
    n_features: usize,
    seed: u64,
) -> Vec<u32> {
    let z = rff_map(x, gamma, n_features, mix_seed(seed, 0));
    kmeans_fit(z.view(), k, mix_seed(seed, 1))
}
