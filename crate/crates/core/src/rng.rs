use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::nn::Matrix;

/// Portable, seedable generator used everywhere randomness is needed.
pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `rows x cols` matrix of independent standard normal draws.
pub fn standard_normal_matrix(rng: &mut SeededRng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| StandardNormal.sample(rng))
        .collect();
    Matrix::from_vec(rows, cols, data).expect("sized to fit")
}

/// Uniform draw on the open interval `(lo, hi)`.
pub fn open_uniform(rng: &mut SeededRng, lo: f64, hi: f64) -> f64 {
    let dist = Uniform::new(lo, hi).expect("lo < hi");
    loop {
        // the half-open sampler can return the excluded lower bound
        let v: f64 = dist.sample(rng);
        if v > lo {
            return v;
        }
    }
}

/// Fisher-Yates permutation of `0..n`.
pub fn permutation(rng: &mut SeededRng, n: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx
}
