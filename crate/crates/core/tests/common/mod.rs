#![allow(dead_code)]

use circflow::oracle::DenseMatrix;
use circflow::CirculationMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random valid matrix built directly from triplets, independently of the
/// generators. Each column picks about `density * (n - 1)` sellers, a
/// spending share in `[0, 1]`, and splits it by normalized uniform weights.
/// The diagonal is written explicitly as `1 - spent` (plain summation), so
/// column sums land within a few ulps of 1.
pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, density: f64) -> CirculationMatrix {
    let mut triplets = Vec::new();
    for j in 0..n {
        let sellers: Vec<usize> = (0..n).filter(|&i| i != j && rng.random::<f64>() < density).collect();
        let sigma = if sellers.is_empty() { 0.0 } else { rng.random::<f64>() };
        let w: Vec<f64> = sellers.iter().map(|_| rng.random::<f64>() + 1e-3).collect();
        let wsum: f64 = w.iter().sum();
        let mut spent = 0.0;
        for (&i, wi) in sellers.iter().zip(&w) {
            let f = sigma * wi / wsum;
            spent += f;
            triplets.push((i, j, f));
        }
        triplets.push((j, j, (1.0 - spent).max(0.0)));
    }
    CirculationMatrix::checked_from_triplets(n, triplets).expect("random matrix is valid")
}

/// Random matrix with every entry positive, hence primitive.
pub fn positive_matrix(rng: &mut ChaCha8Rng, n: usize) -> CirculationMatrix {
    let mut columns = Vec::with_capacity(n);
    for _ in 0..n {
        let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
        let s: f64 = w.iter().sum();
        columns.push(w.into_iter().map(|v| v / s).collect::<Vec<f64>>());
    }
    CirculationMatrix::checked_from_triplets(
        n,
        columns
            .iter()
            .enumerate()
            .flat_map(|(j, c)| c.iter().enumerate().map(move |(i, &v)| (i, j, v))),
    )
    .expect("positive matrix is valid")
}

pub fn random_wealth(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

pub fn dense(m: &CirculationMatrix) -> DenseMatrix {
    DenseMatrix::from_sparse(m).unwrap()
}

/// Column-scatter product in plain `f64`.
pub fn scatter_step(m: &CirculationMatrix, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; m.n()];
    for (i, j, v) in m.entries() {
        y[i] += v * x[j];
    }
    y
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
