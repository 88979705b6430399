//! Seeded generators for random states, operators and distributions.
//!
//! Every generator takes an explicit RNG; nothing here touches global state.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::operator::{ComplexMatrix, DensityOperator, HermitianOperator};

pub type LabRng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> LabRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Independent generator for sub-task `stream` of a run seeded with `seed`.
pub fn sub_rng(seed: u64, stream: u64) -> LabRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes two words into a well-spread seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// Spherically symmetric random unit vector in C^dim.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| gaussian_complex(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

pub fn random_pure<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityOperator {
    DensityOperator::pure(&random_unit_vector(dim, rng))
}

/// Mixed state obtained by tracing out a `env_dim`-dimensional environment
/// from a random pure state on `dim * env_dim`.
pub fn random_density<R: Rng + ?Sized>(dim: usize, env_dim: usize, rng: &mut R) -> DensityOperator {
    let psi = random_unit_vector(dim * env_dim, rng);
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..env_dim {
                acc += psi[i * env_dim + k] * psi[j * env_dim + k].conj();
            }
            m[(i, j)] = acc;
        }
    }
    DensityOperator::new(m.hermitian_part()).expect("reduced state of a unit vector is a density operator")
}

/// GUE-like random Hermitian matrix.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] = gaussian_complex(rng);
        }
    }
    HermitianOperator::from_hermitian_part(&m)
}

/// Uniform draw from the probability simplex (flat Dirichlet).
pub fn random_distribution<R: Rng + ?Sized>(size: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..size).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix
/// (modified Gram-Schmidt with phase fixing).
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<Complex64> = (0..dim).map(|_| gaussian_complex(rng)).collect();
        for u in &cols {
            let overlap: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, a) in v.iter_mut().zip(u) {
                *x -= overlap * a;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (c, col) in cols.iter().enumerate() {
        for (r, z) in col.iter().enumerate() {
            m[(r, c)] = *z;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_streams_are_reproducible_and_distinct() {
        let a: u64 = sub_rng(7, 1).random();
        let b: u64 = sub_rng(7, 1).random();
        let c: u64 = sub_rng(7, 2).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(derive_seed(0, 0), derive_seed(0, 1));
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = rng_from_seed(1);
        let u = random_unitary(5, &mut rng);
        let g = u.dagger().matmul(&u).unwrap();
        assert!(g.max_abs_diff(&ComplexMatrix::identity(5)) < 1e-12);
    }

    #[test]
    fn random_distribution_sums_to_one() {
        let mut rng = rng_from_seed(2);
        let p = random_distribution(9, &mut rng);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x >= 0.0));
    }
}
