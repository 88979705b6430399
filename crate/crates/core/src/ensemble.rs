//! Classical-quantum ensembles and the trace-distance, Holevo and
//! measurement-induced security criteria computed from them.
//!
//! Keys are indexed `0..2^n`. Bit position 0 is the most significant bit, so
//! for a two-bit key `k1 k2` the index is `2 * k1 + k2`.

use serde::Serialize;

use crate::detection::{square_root_measurement, Povm};
use crate::distributions::{
    entropy_deficit, mutual_information, product_of_marginals, shannon_entropy, variational_distance,
    ProbabilityDistribution,
};
use crate::error::{Error, Result};
use crate::operator::{trace_distance, von_neumann_entropy, DensityOperator, MAX_DIM};

/// Cap on the explicit joint operator used by [`criterion_d_joint`].
pub const JOINT_DIM_CAP: usize = MAX_DIM;

/// Largest key length an ensemble may carry.
pub const MAX_KEY_BITS: u32 = 16;

/// Prior over 2^n keys together with one state per key.
#[derive(Debug, Clone, PartialEq)]
pub struct CQEnsemble {
    n: u32,
    prior: ProbabilityDistribution,
    states: Vec<DensityOperator>,
}

impl CQEnsemble {
    pub fn new(n: u32, prior: ProbabilityDistribution, states: Vec<DensityOperator>) -> Result<Self> {
        if n > MAX_KEY_BITS {
            return Err(Error::InvalidEnsemble(format!("key length {n} exceeds {MAX_KEY_BITS} bits")));
        }
        let size = 1usize << n;
        if prior.len() != size {
            return Err(Error::InvalidEnsemble(format!("prior has {} entries, expected 2^{n} = {size}", prior.len())));
        }
        if states.len() != size {
            return Err(Error::InvalidEnsemble(format!("{} states given, expected 2^{n} = {size}", states.len())));
        }
        let dim = states[0].dim();
        if let Some((i, s)) = states.iter().enumerate().find(|(_, s)| s.dim() != dim) {
            return Err(Error::InvalidEnsemble(format!("state {i} has dimension {}, expected {dim}", s.dim())));
        }
        Ok(Self { n, prior, states })
    }

    pub fn uniform(n: u32, states: Vec<DensityOperator>) -> Result<Self> {
        Self::new(n, ProbabilityDistribution::uniform(1usize << n), states)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn key_count(&self) -> usize {
        self.states.len()
    }

    pub fn state_dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn prior(&self) -> &ProbabilityDistribution {
        &self.prior
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn is_uniform_prior(&self) -> bool {
        let u = 1.0 / self.key_count() as f64;
        self.prior.probs().iter().all(|&p| (p - u).abs() <= 1e-12)
    }

    /// Value of bit `pos` (0 = most significant) of key index `k`.
    pub fn key_bit(&self, k: usize, pos: usize) -> u8 {
        key_bit(k, pos, self.n)
    }
}

pub(crate) fn key_bit(k: usize, pos: usize, n: u32) -> u8 {
    ((k >> (n as usize - 1 - pos)) & 1) as u8
}

/// rho_E = sum_k p0(k) rho_E^k
pub fn average_state(e: &CQEnsemble) -> DensityOperator {
    DensityOperator::mixture(e.prior.probs(), &e.states).expect("mixture of valid states is a valid state")
}

/// rho_KE = sum_k p0(k) |k><k| (x) rho_E^k
pub fn joint_state(e: &CQEnsemble) -> Result<DensityOperator> {
    let n_keys = e.key_count();
    check_joint_cap(e)?;
    let blocks: Vec<DensityOperator> = (0..n_keys)
        .map(|k| DensityOperator::basis_state(n_keys, k).kron(&e.states[k]))
        .collect();
    DensityOperator::mixture(e.prior.probs(), &blocks)
}

/// rho_K (x) rho_E
pub fn product_state(e: &CQEnsemble) -> Result<DensityOperator> {
    check_joint_cap(e)?;
    let rho_k = DensityOperator::diagonal(e.prior.probs())?;
    Ok(rho_k.kron(&average_state(e)))
}

fn check_joint_cap(e: &CQEnsemble) -> Result<()> {
    let dim = e.key_count() * e.state_dim();
    if dim > JOINT_DIM_CAP {
        return Err(Error::DimensionCapExceeded(dim, JOINT_DIM_CAP));
    }
    Ok(())
}

/// d = 1/2 || rho_KE - rho_K (x) rho_E ||_1, from the explicit joint operator.
pub fn criterion_d_joint(e: &CQEnsemble) -> Result<f64> {
    trace_distance(&joint_state(e)?, &product_state(e)?)
}

/// d = 1/2 sum_k p0(k) || rho_E^k - rho_E ||_1
pub fn criterion_d_decomposed(e: &CQEnsemble) -> f64 {
    weighted_distance_to(e, &average_state(e)).0
}

/// Prior-weighted distance to the maximally mixed state I/d_E, with the
/// per-key values 1/2 || rho_E^k - I/d_E ||_1.
pub fn criterion_d_ideal_reference(e: &CQEnsemble) -> (f64, Vec<f64>) {
    weighted_distance_to(e, &DensityOperator::maximally_mixed(e.state_dim()))
}

fn weighted_distance_to(e: &CQEnsemble, reference: &DensityOperator) -> (f64, Vec<f64>) {
    let per_key: Vec<f64> = e
        .states
        .iter()
        .map(|s| trace_distance(s, reference).expect("ensemble states share one dimension"))
        .collect();
    let total = per_key.iter().zip(e.prior.probs()).map(|(d, p)| d * p).sum::<f64>();
    (total.clamp(0.0, 1.0), per_key)
}

/// d' = 1/2 sum_k || p0(k) rho_E^k - rho_E / N ||_1
pub fn criterion_d_prime(e: &CQEnsemble) -> f64 {
    let avg = average_state(e);
    let inv_n = 1.0 / e.key_count() as f64;
    let total: f64 = e
        .states
        .iter()
        .zip(e.prior.probs())
        .map(|(s, &p)| {
            let diff = s.as_hermitian().scale(p).add_scaled(avg.as_hermitian(), -inv_n).expect("same dimension");
            diff.trace_norm().expect("eigensolver converges on small Hermitian input")
        })
        .sum();
    (0.5 * total).clamp(0.0, 1.0)
}

/// chi = S(rho_E) - sum_k p0(k) S(rho_E^k), in bits.
pub fn holevo_chi(e: &CQEnsemble) -> f64 {
    let avg = von_neumann_entropy(&average_state(e)).expect("entropy of a valid state");
    let cond: f64 = e
        .states
        .iter()
        .zip(e.prior.probs())
        .map(|(s, &p)| p * von_neumann_entropy(s).expect("entropy of a valid state"))
        .sum();
    let chi = avg - cond;
    if chi < 0.0 && chi > -1e-10 {
        0.0
    } else {
        chi
    }
}

/// Statistics of a measurement applied to every state of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasuredCriteria {
    /// v(p(y|k) p0(k), p(y) p0(k)).
    pub delta: f64,
    /// Outcome-averaged n - H(K | Y = y).
    pub entropy_deficit: f64,
    pub per_outcome_deficits: Vec<f64>,
    pub mutual_information: f64,
    pub outcome_probabilities: Vec<f64>,
    /// p(k | y) for each outcome y. Outcomes of zero probability carry the
    /// prior.
    pub cpd_table: Vec<ProbabilityDistribution>,
}

/// Joint distribution p(k, y) = p0(k) tr(M_y rho_E^k), indexed `k * m + y`.
pub fn measurement_joint(e: &CQEnsemble, m: &Povm) -> Result<ProbabilityDistribution> {
    if m.dim() != e.state_dim() {
        return Err(Error::DimensionMismatch(m.dim(), e.state_dim()));
    }
    let mut probs = Vec::with_capacity(e.key_count() * m.len());
    for (s, &p) in e.states.iter().zip(e.prior.probs()) {
        for el in m.elements() {
            let t = el.expectation(s.as_hermitian())?.max(0.0);
            probs.push(p * t);
        }
    }
    ProbabilityDistribution::from_weights(probs)
}

pub fn measured_criteria(e: &CQEnsemble, m: &Povm) -> Result<MeasuredCriteria> {
    let joint = measurement_joint(e, m)?;
    let sizes = (e.key_count(), m.len());
    let product = product_of_marginals(&joint, sizes)?;
    let delta = variational_distance(&joint, &product)?;
    let mi = mutual_information(&joint, sizes)?;
    let n_out = m.len();
    let mut outcome_probabilities = vec![0.0; n_out];
    for k in 0..e.key_count() {
        for y in 0..n_out {
            outcome_probabilities[y] += joint.probs()[k * n_out + y];
        }
    }
    let mut cpd_table = Vec::with_capacity(n_out);
    let mut per_outcome_deficits = Vec::with_capacity(n_out);
    let mut entropy_deficit_avg = 0.0;
    for (y, &py) in outcome_probabilities.iter().enumerate() {
        let cpd = if py > 0.0 {
            ProbabilityDistribution::from_weights((0..e.key_count()).map(|k| joint.probs()[k * n_out + y]).collect())?
        } else {
            e.prior.clone()
        };
        let deficit = entropy_deficit(&cpd);
        entropy_deficit_avg += py * deficit;
        per_outcome_deficits.push(deficit);
        cpd_table.push(cpd);
    }
    Ok(MeasuredCriteria {
        delta,
        entropy_deficit: entropy_deficit_avg,
        per_outcome_deficits,
        mutual_information: mi,
        outcome_probabilities,
        cpd_table,
    })
}

/// Deviation of key-subset marginals from uniform.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetGap {
    /// max over subset values of |p(k~) - 2^-|K~||
    pub max_gap: f64,
    /// the same deviation averaged over the 2^|K~| subset values
    pub avg_gap: f64,
    pub marginal: Vec<f64>,
}

/// Marginalizes a distribution over n-bit keys onto the bit positions in
/// `subset_mask` (0 = most significant) and compares with uniform.
pub fn semantic_security_gap(cpd: &ProbabilityDistribution, subset_mask: &[usize]) -> Result<SubsetGap> {
    if subset_mask.is_empty() {
        return Err(Error::EmptySubset);
    }
    let size = cpd.len();
    if !size.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("distribution size {size} is not a power of two")));
    }
    let n = size.trailing_zeros();
    let mut positions = subset_mask.to_vec();
    positions.sort_unstable();
    positions.dedup();
    if let Some(&bad) = positions.iter().find(|&&p| p >= n as usize) {
        return Err(Error::InvalidArgument(format!("bit position {bad} outside 0..{n}")));
    }
    let m = positions.len();
    let mut marginal = vec![0.0; 1 << m];
    for (k, &p) in cpd.probs().iter().enumerate() {
        let mut idx = 0usize;
        for &pos in &positions {
            idx = (idx << 1) | key_bit(k, pos, n) as usize;
        }
        marginal[idx] += p;
    }
    let u = 1.0 / marginal.len() as f64;
    let gaps: Vec<f64> = marginal.iter().map(|&p| (p - u).abs()).collect();
    Ok(SubsetGap {
        max_gap: gaps.iter().copied().fold(0.0, f64::max),
        avg_gap: gaps.iter().sum::<f64>() / gaps.len() as f64,
        marginal,
    })
}

/// All criteria for one ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriteriaRecord {
    pub n: u32,
    pub state_dim: usize,
    pub uniform_prior: bool,
    pub d: f64,
    /// Joint-operator form; absent when N * d_E exceeds the cap.
    pub d_joint: Option<f64>,
    /// |d_joint - d| when both forms are available.
    pub forms_agreement_residual: Option<f64>,
    pub d_ideal_reference: f64,
    pub d_ideal_reference_per_key: Vec<f64>,
    pub d_prime: f64,
    pub chi: f64,
    /// Classical distance induced by the square-root measurement.
    pub delta_e: f64,
    /// Outcome-averaged entropy deficit under the same measurement.
    pub i_e_deficit: f64,
    pub measured_mutual_information: f64,
    pub p1_bound_notes: Vec<String>,
}

pub fn criteria_record(e: &CQEnsemble) -> Result<CriteriaRecord> {
    let d = criterion_d_decomposed(e);
    let d_joint = match criterion_d_joint(e) {
        Ok(v) => Some(v),
        Err(Error::DimensionCapExceeded(..)) => None,
        Err(err) => return Err(err),
    };
    let (d_ideal_reference, d_ideal_reference_per_key) = criterion_d_ideal_reference(e);
    let srm = square_root_measurement(e)?;
    let measured = measured_criteria(e, &srm.povm)?;
    let mut notes = vec![
        "delta_e = v(p(y|k)p0(k), p(y)p0(k)) without an extra factor 1/2, so that delta_e <= d".to_string(),
        "max_E |p(E) - q(E)| = v(P,Q); a factor 2v overstates it by two".to_string(),
        "delta_e and i_e_deficit use the square-root measurement; other measurements may give more".to_string(),
    ];
    if !e.is_uniform_prior() {
        notes.push("non-uniform prior: d and d' differ in general".to_string());
    }
    Ok(CriteriaRecord {
        n: e.n,
        state_dim: e.state_dim(),
        uniform_prior: e.is_uniform_prior(),
        d,
        d_joint,
        forms_agreement_residual: d_joint.map(|j| (j - d).abs()),
        d_ideal_reference,
        d_ideal_reference_per_key,
        d_prime: criterion_d_prime(e),
        chi: holevo_chi(e),
        delta_e: measured.delta,
        i_e_deficit: measured.entropy_deficit,
        measured_mutual_information: measured.mutual_information,
        p1_bound_notes: notes,
    })
}

/// Entropy of the prior, the ceiling for chi and for any mutual information.
pub fn prior_entropy(e: &CQEnsemble) -> f64 {
    shannon_entropy(&e.prior)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::Povm;
    use crate::random::{random_density, random_distribution, random_pure, rng_from_seed};
    use crate::operator::ComplexMatrix;

    fn orthogonal_one_bit() -> CQEnsemble {
        CQEnsemble::uniform(1, vec![DensityOperator::basis_state(2, 0), DensityOperator::basis_state(2, 1)]).unwrap()
    }

    fn random_ensemble(n: u32, dim: usize, seed: u64) -> CQEnsemble {
        let mut rng = rng_from_seed(seed);
        let states = (0..1usize << n).map(|_| random_density(dim, dim, &mut rng)).collect();
        CQEnsemble::uniform(n, states).unwrap()
    }

    #[test]
    fn constructor_checks_counts_and_dims() {
        let s = DensityOperator::maximally_mixed(2);
        assert!(CQEnsemble::uniform(1, vec![s.clone()]).is_err());
        assert!(CQEnsemble::uniform(1, vec![s.clone(), DensityOperator::maximally_mixed(3)]).is_err());
        assert!(CQEnsemble::new(1, ProbabilityDistribution::uniform(4), vec![s.clone(), s]).is_err());
    }

    #[test]
    fn key_bits_are_msb_first() {
        let e = random_ensemble(2, 2, 1);
        // index 2 = k1 k2 = 10
        assert_eq!(e.key_bit(2, 0), 1);
        assert_eq!(e.key_bit(2, 1), 0);
    }

    #[test]
    fn average_of_equal_states() {
        let mut rng = rng_from_seed(2);
        let rho = random_density(3, 3, &mut rng);
        let e = CQEnsemble::uniform(2, vec![rho.clone(); 4]).unwrap();
        assert!(average_state(&e).matrix().max_abs_diff(rho.matrix()) < 1e-14);
        assert!(criterion_d_joint(&e).unwrap() < 1e-12);
        assert!(criterion_d_decomposed(&e) < 1e-12);
        assert!(criterion_d_prime(&e) < 1e-12);
        assert!(holevo_chi(&e).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_pair() {
        let e = orthogonal_one_bit();
        let avg = average_state(&e);
        assert!(avg.matrix().max_abs_diff(&ComplexMatrix::from_diagonal(&[0.5, 0.5])) < 1e-15);
        // rho_KE - rho_K (x) rho_E = diag(1/4, -1/4, -1/4, 1/4) by hand
        assert!((criterion_d_joint(&e).unwrap() - 0.5).abs() < 1e-12);
        assert!((criterion_d_decomposed(&e) - 0.5).abs() < 1e-12);
        assert!((holevo_chi(&e) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_pure_states_carry_n_bits() {
        let n = 3u32;
        let states = (0..8).map(|k| DensityOperator::basis_state(8, k)).collect();
        let e = CQEnsemble::uniform(n, states).unwrap();
        assert!((holevo_chi(&e) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn joint_cap_enforced() {
        let e = random_ensemble(3, 16, 4);
        assert!(matches!(criterion_d_joint(&e), Err(Error::DimensionCapExceeded(128, 64))));
        let rec = criteria_record(&e).unwrap();
        assert!(rec.d_joint.is_none());
    }

    #[test]
    fn forms_agree_on_random_ensembles() {
        for seed in 0..10 {
            let e = random_ensemble(2, 4, seed);
            let joint = criterion_d_joint(&e).unwrap();
            let dec = criterion_d_decomposed(&e);
            assert!((joint - dec).abs() < 1e-9, "{joint} vs {dec}");
            assert!((criterion_d_prime(&e) - dec).abs() < 1e-9);
        }
    }

    #[test]
    fn forms_agree_with_nonuniform_prior() {
        let mut rng = rng_from_seed(31);
        let states = (0..4).map(|_| random_density(3, 2, &mut rng)).collect();
        let prior = ProbabilityDistribution::new(random_distribution(4, &mut rng)).unwrap();
        let e = CQEnsemble::new(2, prior, states).unwrap();
        assert!((criterion_d_joint(&e).unwrap() - criterion_d_decomposed(&e)).abs() < 1e-9);
    }

    #[test]
    fn d_prime_for_point_mass_prior() {
        let mut rng = rng_from_seed(17);
        let states = vec![random_pure(2, &mut rng), random_pure(2, &mut rng)];
        let e = CQEnsemble::new(1, ProbabilityDistribution::point_mass(2, 0), states).unwrap();
        // direct evaluation: rho_E = rho_0, so the terms are
        // 1/2 ||rho_0 - rho_0/2||_1 + 1/2 ||0 - rho_0/2||_1 = 1/4 + 1/4
        assert!((criterion_d_prime(&e) - 0.5).abs() < 1e-12);
        assert!(criterion_d_decomposed(&e) < 1e-12);
    }

    #[test]
    fn chi_bounded_by_n() {
        for seed in 0..10 {
            let e = random_ensemble(2, 3, 100 + seed);
            let chi = holevo_chi(&e);
            assert!((0.0..=2.0 + 1e-12).contains(&chi));
        }
    }

    #[test]
    fn trivial_measurement_reveals_nothing() {
        let e = random_ensemble(2, 3, 5);
        let m = measured_criteria(&e, &Povm::trivial(3)).unwrap();
        assert!(m.delta.abs() < 1e-15);
        assert!(m.entropy_deficit.abs() < 1e-12);
        assert_eq!(m.cpd_table.len(), 1);
        assert!(variational_distance(&m.cpd_table[0], e.prior()).unwrap() < 1e-15);
    }

    #[test]
    fn eigenbasis_measurement_gives_point_masses() {
        let e = orthogonal_one_bit();
        let m = measured_criteria(&e, &Povm::computational(2)).unwrap();
        assert_eq!(m.cpd_table[0].probs(), &[1.0, 0.0]);
        assert_eq!(m.cpd_table[1].probs(), &[0.0, 1.0]);
        assert!((m.mutual_information - 1.0).abs() < 1e-12);
        assert!((m.delta - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let e = orthogonal_one_bit();
        assert!(matches!(measured_criteria(&e, &Povm::trivial(3)), Err(Error::DimensionMismatch(3, 2))));
    }

    #[test]
    fn subset_gap_cases() {
        let u = ProbabilityDistribution::uniform(8);
        assert_eq!(semantic_security_gap(&u, &[0, 2]).unwrap().max_gap, 0.0);
        let point = ProbabilityDistribution::point_mass(8, 5);
        let g = semantic_security_gap(&point, &[1]).unwrap();
        assert!((g.max_gap - 0.5).abs() < 1e-15);
        assert!(matches!(semantic_security_gap(&u, &[]), Err(Error::EmptySubset)));
        assert!(semantic_security_gap(&u, &[3]).is_err());
    }

    #[test]
    fn subset_gap_brute_force() {
        let mut rng = rng_from_seed(6);
        let cpd = ProbabilityDistribution::new(random_distribution(16, &mut rng)).unwrap();
        let mask = [1usize, 3];
        let g = semantic_security_gap(&cpd, &mask).unwrap();
        // marginalize by testing each key's bits as a 4-char string
        let mut marg = [0.0; 4];
        for k in 0..16usize {
            let bits = format!("{k:04b}");
            let b1 = (bits.as_bytes()[1] - b'0') as usize;
            let b3 = (bits.as_bytes()[3] - b'0') as usize;
            marg[b1 * 2 + b3] += cpd.probs()[k];
        }
        let max = marg.iter().map(|p| (p - 0.25).abs()).fold(0.0, f64::max);
        assert!((g.max_gap - max).abs() < 1e-15);
        let full = semantic_security_gap(&cpd, &[0, 1, 2, 3]).unwrap();
        assert!(full.max_gap >= (cpd.max() - 1.0 / 16.0).abs() - 1e-15);
    }
}
