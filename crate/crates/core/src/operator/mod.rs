//! Dense Hermitian operator algebra: validated operators, spectral
//! decomposition, trace norm and von Neumann entropy.
//!
//! All entropies are in bits. Dimensions are capped at [`MAX_DIM`].

mod eigen;
mod matrix;

pub use eigen::Spectrum;
pub use matrix::ComplexMatrix;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported Hilbert-space dimension (six qubits).
pub const MAX_DIM: usize = 64;

/// Max-entry tolerance on `m - m^dagger`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted as round-off.
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Allowed deviation of the trace from one.
pub const TRACE_TOL: f64 = 1e-10;

/// Square matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        if matrix.rows() > MAX_DIM {
            return Err(Error::DimensionCapExceeded(matrix.rows(), MAX_DIM));
        }
        let defect = matrix.hermiticity_defect();
        if !(defect <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
        })
    }

    /// Takes the Hermitian part of a matrix that is Hermitian by
    /// construction (products like `A B A^dagger`, weighted sums).
    pub(crate) fn from_hermitian_part(matrix: &ComplexMatrix) -> Self {
        debug_assert!(matrix.is_square());
        Self {
            matrix: matrix.hermitian_part(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim, dim),
        }
    }

    /// Rank-one projector onto the normalized direction of `v`.
    pub fn projector(v: &[Complex64]) -> Self {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let unit: Vec<Complex64> = v.iter().map(|z| z / norm).collect();
        Self::from_hermitian_part(&ComplexMatrix::outer(&unit))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            matrix: self.matrix.scale(s),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self::from_hermitian_part(&self.matrix.add(&other.matrix)?))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self::from_hermitian_part(&self.matrix.sub(&other.matrix)?))
    }

    /// `self + s * other`
    pub fn add_scaled(&self, other: &Self, s: f64) -> Result<Self> {
        self.check_dim(other)?;
        let mut m = self.matrix.clone();
        m.add_scaled_in_place(&other.matrix, s);
        Ok(Self { matrix: m })
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }

    /// Real part of tr(self * other); exact for Hermitian pairs.
    pub fn expectation(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self.matrix.trace_product(&other.matrix)?.re)
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.kron(&other.matrix),
        }
    }

    /// `a * self * a^dagger`
    pub fn conjugate_by(&self, a: &ComplexMatrix) -> Result<Self> {
        let m = a.matmul(&self.matrix)?.matmul(&a.dagger())?;
        Ok(Self::from_hermitian_part(&m))
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        eig_hermitian(self)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.spectrum()?.values)
    }

    /// Applies `f` to the spectrum: V diag(f(lambda)) V^dagger.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let s = self.spectrum()?;
        Ok(Self::from_hermitian_part(&s.reconstruct_with(f)))
    }

    /// Sum of absolute eigenvalues.
    pub fn trace_norm(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().map(|x| x.abs()).sum())
    }

    /// Partial trace over the second factor of a `dim_a * dim_b` space.
    pub fn partial_trace_second(&self, dim_a: usize, dim_b: usize) -> Result<Self> {
        Ok(Self {
            matrix: partial_trace_second(&self.matrix, dim_a, dim_b)?,
        })
    }

    /// Partial trace over the first factor of a `dim_a * dim_b` space.
    pub fn partial_trace_first(&self, dim_a: usize, dim_b: usize) -> Result<Self> {
        Ok(Self {
            matrix: partial_trace_first(&self.matrix, dim_a, dim_b)?,
        })
    }
}

/// Positive semidefinite, unit-trace Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    op: HermitianOperator,
}

impl DensityOperator {
    /// Same as [`validate_density`].
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        validate_density(matrix)
    }

    /// Validates an operator produced by this crate's own arithmetic
    /// (mixtures, tensor products, conjugation by isometries).
    pub(crate) fn from_operator(op: HermitianOperator) -> Result<Self> {
        validate_density(op.matrix)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: HermitianOperator::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// |v><v| for a (not necessarily normalized) nonzero vector.
    pub fn pure(v: &[Complex64]) -> Self {
        Self {
            op: HermitianOperator::projector(v),
        }
    }

    /// |i><i| in dimension `dim`.
    pub fn basis_state(dim: usize, i: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[i] = Complex64::new(1.0, 0.0);
        Self::pure(&v)
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        validate_density(ComplexMatrix::from_diagonal(probs))
    }

    /// Convex combination `sum_i w_i rho_i`; weights must sum to one.
    pub fn mixture(weights: &[f64], states: &[DensityOperator]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::SizeMismatch(weights.len(), states.len()));
        }
        let dim = states[0].dim();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (w, s) in weights.iter().zip(states) {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch(dim, s.dim()));
            }
            acc.add_scaled_in_place(s.matrix(), *w);
        }
        Self::from_operator(HermitianOperator::from_hermitian_part(&acc))
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.op.matrix()
    }

    pub fn as_hermitian(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn into_hermitian(self) -> HermitianOperator {
        self.op
    }

    /// Eigenvalues clamped to [0, 1], descending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self
            .op
            .eigenvalues()?
            .into_iter()
            .map(|x| x.clamp(0.0, 1.0))
            .collect())
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            op: self.op.kron(&other.op),
        }
    }

    pub fn partial_trace_second(&self, dim_a: usize, dim_b: usize) -> Result<Self> {
        Self::from_operator(self.op.partial_trace_second(dim_a, dim_b)?)
    }

    pub fn partial_trace_first(&self, dim_a: usize, dim_b: usize) -> Result<Self> {
        Self::from_operator(self.op.partial_trace_first(dim_a, dim_b)?)
    }
}

impl Serialize for DensityOperator {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.matrix().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityOperator {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let m = ComplexMatrix::deserialize(deserializer)?;
        validate_density(m).map_err(serde::de::Error::custom)
    }
}

/// Checks Hermiticity, then positivity, then unit trace.
pub fn validate_density(m: ComplexMatrix) -> Result<DensityOperator> {
    let op = HermitianOperator::new(m)?;
    let lowest = op.eigenvalues()?.last().copied().unwrap_or(0.0);
    if lowest < -POSITIVITY_TOL {
        return Err(Error::NotPositive(lowest));
    }
    let tr = op.trace();
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(Error::TraceNotOne(tr));
    }
    Ok(DensityOperator { op })
}

/// Eigenvalues (descending) and orthonormal eigenvectors.
pub fn eig_hermitian(h: &HermitianOperator) -> Result<Spectrum> {
    eigen::jacobi_eigh(h.matrix())
}

/// D(rho, sigma) = 1/2 ||rho - sigma||_1
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let diff = rho.op.sub(&sigma.op)?;
    Ok((0.5 * diff.trace_norm()?).clamp(0.0, 1.0))
}

/// Kronecker product of two operators of the same kind.
pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor(b)
}

pub trait Tensor {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for HermitianOperator {
    fn tensor(&self, other: &Self) -> Self {
        self.kron(other)
    }
}

impl Tensor for DensityOperator {
    fn tensor(&self, other: &Self) -> Self {
        self.kron(other)
    }
}

/// S(rho) = -sum lambda log2 lambda, with 0 log 0 = 0.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    let s: f64 = rho
        .eigenvalues()?
        .into_iter()
        .filter(|&x| x > 0.0)
        .map(|x| -x * x.log2())
        .sum();
    Ok(s.clamp(0.0, (rho.dim() as f64).log2()))
}

fn partial_trace_second(m: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<ComplexMatrix> {
    if m.rows() != dim_a * dim_b || !m.is_square() {
        return Err(Error::DimensionMismatch(m.rows(), dim_a * dim_b));
    }
    let mut out = ComplexMatrix::zeros(dim_a, dim_a);
    for i in 0..dim_a {
        for j in 0..dim_a {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..dim_b {
                acc += m[(i * dim_b + k, j * dim_b + k)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

fn partial_trace_first(m: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<ComplexMatrix> {
    if m.rows() != dim_a * dim_b || !m.is_square() {
        return Err(Error::DimensionMismatch(m.rows(), dim_a * dim_b));
    }
    let mut out = ComplexMatrix::zeros(dim_b, dim_b);
    for i in 0..dim_b {
        for j in 0..dim_b {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..dim_a {
                acc += m[(k * dim_b + i, k * dim_b + j)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_hermitian, rng_from_seed};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn maximally_mixed_qubit_is_valid() {
        let m = ComplexMatrix::identity(2).scale(0.5);
        let rho = validate_density(m).unwrap();
        assert_eq!(rho.dim(), 2);
    }

    #[test]
    fn negative_eigenvalue_reported() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -0.001]]).unwrap();
        match validate_density(m) {
            Err(Error::NotPositive(x)) => assert!((x + 0.001).abs() < 1e-15),
            other => panic!("expected NotPositive, got {other:?}"),
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = ComplexMatrix::from_rows(vec![
            vec![c(0.5, 0.0), c(0.0, 0.5)],
            vec![c(0.0, 0.5), c(0.5, 0.0)],
        ])
        .unwrap();
        assert!(matches!(validate_density(m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn bad_trace_rejected() {
        let m = ComplexMatrix::from_diagonal(&[0.5, 0.4]);
        assert!(matches!(validate_density(m), Err(Error::TraceNotOne(t)) if (t - 0.9).abs() < 1e-12));
    }

    #[test]
    fn oversized_rejected() {
        let m = ComplexMatrix::identity(65).scale(1.0 / 65.0);
        assert!(matches!(validate_density(m), Err(Error::DimensionCapExceeded(65, 64))));
    }

    #[test]
    fn pauli_z_and_identity_spectra() {
        let z = HermitianOperator::new(ComplexMatrix::from_diagonal(&[1.0, -1.0])).unwrap();
        assert_eq!(eig_hermitian(&z).unwrap().values, vec![1.0, -1.0]);
        let id = HermitianOperator::identity(4);
        assert_eq!(eig_hermitian(&id).unwrap().values, vec![1.0; 4]);
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut rng = rng_from_seed(11);
        for _ in 0..20 {
            let h = random_hermitian(8, &mut rng);
            let s = eig_hermitian(&h).unwrap();
            assert!(s.reconstruct().max_abs_diff(h.matrix()) < 1e-9);
            let gram = s.vectors.dagger().matmul(&s.vectors).unwrap();
            assert!(gram.max_abs_diff(&ComplexMatrix::identity(8)) < 1e-9);
            assert!(s.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eigensolver_is_bit_deterministic() {
        let mut rng = rng_from_seed(5);
        let h = random_hermitian(16, &mut rng);
        let a = eig_hermitian(&h).unwrap();
        let b = eig_hermitian(&h.clone()).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn large_dimension_reconstructs() {
        let mut rng = rng_from_seed(3);
        let h = random_hermitian(64, &mut rng);
        let s = eig_hermitian(&h).unwrap();
        assert!(s.reconstruct().max_abs_diff(h.matrix()) < 1e-9);
    }

    #[test]
    fn trace_distance_basic_cases() {
        let rho = DensityOperator::basis_state(2, 0);
        let sigma = DensityOperator::basis_state(2, 1);
        assert_eq!(trace_distance(&rho, &rho).unwrap(), 0.0);
        assert!((trace_distance(&rho, &sigma).unwrap() - 1.0).abs() < 1e-15);
        let mixed = DensityOperator::maximally_mixed(3);
        assert!(matches!(trace_distance(&rho, &mixed), Err(Error::DimensionMismatch(2, 3))));
    }

    #[test]
    fn tensor_of_mixed_qubits() {
        let half = DensityOperator::maximally_mixed(2);
        let four = tensor(&half, &half);
        assert!(four.matrix().max_abs_diff(DensityOperator::maximally_mixed(4).matrix()) < 1e-15);
    }

    #[test]
    fn tensor_of_projectors_is_rank_one() {
        let p = DensityOperator::pure(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let pp = tensor(&p, &p);
        let ev = pp.eigenvalues().unwrap();
        assert_eq!(pp.dim(), 4);
        assert!((ev[0] - 1.0).abs() < 1e-14);
        assert!(ev[1..].iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn tensor_trace_is_multiplicative() {
        let mut rng = rng_from_seed(21);
        for _ in 0..10 {
            let a = random_hermitian(3, &mut rng);
            let b = random_hermitian(4, &mut rng);
            let k = tensor(&a, &b);
            // independent oracle: direct multiplication of traces
            let expected = a.trace() * b.trace();
            assert!((k.trace() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_values() {
        let pure = DensityOperator::basis_state(3, 1);
        assert_eq!(von_neumann_entropy(&pure).unwrap(), 0.0);
        for n in [2usize, 4, 8] {
            let s = von_neumann_entropy(&DensityOperator::maximally_mixed(n)).unwrap();
            assert!((s - (n as f64).log2()).abs() < 1e-12);
        }
        let rho = DensityOperator::diagonal(&[0.25, 0.75]).unwrap();
        // binary entropy h(0.25) evaluated by hand: 0.25*2 + 0.75*log2(4/3)
        let h = 0.5 + 0.75 * (4.0f64 / 3.0).log2();
        assert!((von_neumann_entropy(&rho).unwrap() - h).abs() < 1e-12);
        assert!((h - 0.811278).abs() < 1e-6);
    }

    #[test]
    fn partial_traces_of_product() {
        let mut rng = rng_from_seed(8);
        let a = random_density(2, 2, &mut rng);
        let b = random_density(3, 3, &mut rng);
        let ab = a.kron(&b);
        assert!(ab.partial_trace_second(2, 3).unwrap().matrix().max_abs_diff(a.matrix()) < 1e-12);
        assert!(ab.partial_trace_first(2, 3).unwrap().matrix().max_abs_diff(b.matrix()) < 1e-12);
    }
}
