//! Seeded deterministic sampling helpers.
//!
//! Every random draw in the toolkit flows through a ChaCha20 generator seeded
//! from an explicit `u64`, so reports quoting their seed are reproducible
//! byte for byte across runs and platforms.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::matrix::ComplexMatrix;

pub fn rng_from_seed(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Standard normal via Box-Muller; two uniform draws per call.
pub fn standard_normal(rng: &mut ChaCha20Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Complex Gaussian with independent N(0, 1) real and imaginary parts.
pub fn random_complex(rng: &mut ChaCha20Rng) -> Complex64 {
    Complex64::new(standard_normal(rng), standard_normal(rng))
}

pub fn random_vector(rng: &mut ChaCha20Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| random_complex(rng)).collect()
}

/// Dense n x n complex Gaussian matrix.
pub fn random_matrix(rng: &mut ChaCha20Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| random_complex(rng))
}

/// Random Hermitian matrix `(G + G*) / 2`.
pub fn random_hermitian(rng: &mut ChaCha20Rng, n: usize) -> ComplexMatrix {
    let g = random_matrix(rng, n);
    g.add(&g.adjoint()).scale(Complex64::new(0.5, 0.0))
}

/// Random matrix with an exact null space of dimension `null_dim`, built by
/// zeroing columns of a Gaussian factor in a rotated basis.
pub fn rank_deficient_matrix(rng: &mut ChaCha20Rng, n: usize, null_dim: usize) -> ComplexMatrix {
    assert!(null_dim <= n);
    let a = random_matrix(rng, n);
    let b = random_matrix(rng, n);
    let mut d = ComplexMatrix::zeros(n, n);
    for i in 0..n.saturating_sub(null_dim) {
        d[(i, i)] = Complex64::ONE;
    }
    a.mul(&d).mul(&b)
}

/// Hermitian positive definite matrix with eigenvalues spread log-uniformly
/// over `[lambda_min, lambda_max]`, so its condition number is controlled.
pub fn random_metric(
    rng: &mut ChaCha20Rng,
    n: usize,
    lambda_min: f64,
    lambda_max: f64,
) -> ComplexMatrix {
    assert!(lambda_min > 0.0 && lambda_max >= lambda_min);
    // Unitary factor from the polar phase of a Gaussian matrix.
    let g = random_matrix(rng, n);
    let tol = crate::spectral::ToleranceConfig::default();
    let q = crate::spectral::polar(&g, &tol)
        .expect("polar of a finite matrix")
        .isometry;
    let log_lo = lambda_min.ln();
    let log_hi = lambda_max.ln();
    let mut lambdas: Vec<f64> = (0..n)
        .map(|_| (log_lo + (log_hi - log_lo) * rng.random::<f64>()).exp())
        .collect();
    // Pin the extremes so the requested condition number is attained.
    if n >= 1 {
        lambdas[0] = lambda_min;
    }
    if n >= 2 {
        lambdas[n - 1] = lambda_max;
    }
    crate::spectral::hermitian_from_eig(&lambdas, &q)
}
