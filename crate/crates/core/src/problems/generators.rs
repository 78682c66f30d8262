//! Seeded synthetic instances. All randomness comes from ChaCha20
//! (`rand_chacha::ChaCha20Rng::seed_from_u64`), which is stable across
//! platforms and crate versions.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{PadmmError, Result};

pub fn rng_from_seed(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn normal(rng: &mut ChaCha20Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn signed_uniform(rng: &mut ChaCha20Rng, lo: f64, hi: f64) -> f64 {
    let mag = rng.random_range(lo..=hi);
    if rng.random_bool(0.5) {
        mag
    } else {
        -mag
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseRegressionInstance {
    pub a: DMatrix<f64>,
    pub y0: DVector<f64>,
    pub x_true: DVector<f64>,
}

/// `𝒜` with i.i.d. `N(0, 1/m)` entries, `x_true` with `k_nnz` nonzeros of
/// magnitude in `[0.5, 1.5]` and random sign, `y₀ = 𝒜x_true + noise`.
pub fn gen_sparse_regression(m: usize, n: usize, k_nnz: usize, noise_sd: f64, seed: u64) -> Result<SparseRegressionInstance> {
    if k_nnz > n {
        return Err(PadmmError::InvalidInput(format!("k_nnz = {k_nnz} exceeds n = {n}")));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(PadmmError::InvalidInput(format!("noise_sd must be nonnegative, got {noise_sd}")));
    }
    let mut rng = rng_from_seed(seed);
    let scale = 1.0 / (m as f64).sqrt();
    let a = DMatrix::<f64>::zeros(m, n).map(|_| normal(&mut rng) * scale);
    let mut x_true = DVector::zeros(n);
    let mut support: Vec<usize> = sample(&mut rng, n, k_nnz).into_vec();
    support.sort_unstable();
    for j in support {
        x_true[j] = signed_uniform(&mut rng, 0.5, 1.5);
    }
    let noise = DVector::from_fn(m, |_, _| normal(&mut rng));
    let y0 = &a * &x_true + noise * noise_sd;
    Ok(SparseRegressionInstance { a, y0, x_true })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlrInstance {
    pub a: DMatrix<f64>,
    pub x1: DMatrix<f64>,
    pub x2: DMatrix<f64>,
    pub y: DMatrix<f64>,
}

/// `X₁ = UVᵀ` with Gaussian `U ∈ ℝ^{m×r}`, `V ∈ ℝ^{n×r}`; `X₂` with `s`
/// nonzeros of magnitude in `[1, 2]`; `Y` affine along each row, so its column
/// differences are constant; `𝒜 = X₁ + X₂ + Y`.
pub fn gen_slr_instance(m: usize, n: usize, r: usize, s: usize, seed: u64) -> Result<SlrInstance> {
    if r > m.min(n) {
        return Err(PadmmError::InvalidInput(format!("r = {r} exceeds min({m}, {n})")));
    }
    if s > m * n {
        return Err(PadmmError::InvalidInput(format!("s = {s} exceeds m*n = {}", m * n)));
    }
    let mut rng = rng_from_seed(seed);
    let u = DMatrix::<f64>::zeros(m, r).map(|_| normal(&mut rng));
    let v = DMatrix::<f64>::zeros(n, r).map(|_| normal(&mut rng));
    let x1 = &u * v.transpose();
    let mut x2 = DMatrix::zeros(m, n);
    let mut pos: Vec<usize> = sample(&mut rng, m * n, s).into_vec();
    pos.sort_unstable();
    for p in pos {
        x2[(p % m, p / m)] = signed_uniform(&mut rng, 1.0, 2.0);
    }
    let offsets: Vec<f64> = (0..m).map(|_| 0.5 * normal(&mut rng)).collect();
    let slopes: Vec<f64> = (0..m).map(|_| 0.5 * normal(&mut rng)).collect();
    let y = DMatrix::from_fn(m, n, |i, j| offsets[i] + slopes[i] * j as f64 / n as f64);
    let a = &x1 + &x2 + &y;
    Ok(SlrInstance { a, x1, x2, y })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    /// ChaCha20 seeded with 42 through `seed_from_u64`; pins the stream so
    /// generated instances stay reproducible.
    #[test]
    fn rng_fixture_seed_42() {
        let mut rng = rng_from_seed(42);
        let got = [rng.next_u64(), rng.next_u64(), rng.next_u64()];
        assert_eq!(got, RNG_SEED_42_FIRST_THREE);
    }

    const RNG_SEED_42_FIRST_THREE: [u64; 3] = [9482535800248027256, 7566832397956113305, 1804347359131428821];
}
