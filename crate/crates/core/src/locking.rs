//! Two-bit BB84 information locking.
//!
//! Each key `k1 k2` is encoded in two qubits as an equal mixture of two
//! product states. The first qubit carries `k1` as a basis choice; which
//! element of that basis was sent picks the basis holding `k2` on the second
//! qubit. Without `k1` the four states are hard to tell apart, with it `k2`
//! can be read off exactly.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::{average_state, criteria_record, criterion_d_ideal_reference, CQEnsemble, CriteriaRecord};
use crate::error::{Error, Result};
use crate::operator::{trace_distance, DensityOperator};
use crate::random::sub_rng;

/// The four BB84 qubit states. One/Three and Two/Four are orthonormal
/// pairs at 45 degrees to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bb84State {
    One,
    Two,
    Three,
    Four,
}

impl Bb84State {
    pub const ALL: [Bb84State; 4] = [Bb84State::One, Bb84State::Two, Bb84State::Three, Bb84State::Four];

    pub fn label(self) -> u8 {
        match self {
            Bb84State::One => 1,
            Bb84State::Two => 2,
            Bb84State::Three => 3,
            Bb84State::Four => 4,
        }
    }

    pub fn vector(self) -> [Complex64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64| Complex64::new(re, 0.0);
        match self {
            Bb84State::One => [c(1.0), c(0.0)],
            Bb84State::Two => [c(h), c(h)],
            Bb84State::Three => [c(0.0), c(1.0)],
            Bb84State::Four => [c(h), c(-h)],
        }
    }

    pub fn basis(self) -> Bb84Basis {
        match self {
            Bb84State::One | Bb84State::Three => Bb84Basis::Rectilinear,
            Bb84State::Two | Bb84State::Four => Bb84Basis::Diagonal,
        }
    }

    /// Position inside its own basis: 0 for One and Two, 1 for Three and Four.
    pub fn index_in_basis(self) -> usize {
        match self {
            Bb84State::One | Bb84State::Two => 0,
            Bb84State::Three | Bb84State::Four => 1,
        }
    }

    /// |<a|b>|^2 from the exact table: 1 for equal states, 0 within a basis,
    /// 1/2 across bases.
    pub fn overlap_sq(self, other: Bb84State) -> f64 {
        if self == other {
            1.0
        } else if self.basis() == other.basis() {
            0.0
        } else {
            0.5
        }
    }

    pub fn projector(self) -> DensityOperator {
        DensityOperator::pure(&self.vector())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bb84Basis {
    /// States One and Three.
    Rectilinear,
    /// States Two and Four.
    Diagonal,
}

impl Bb84Basis {
    pub fn elements(self) -> [Bb84State; 2] {
        match self {
            Bb84Basis::Rectilinear => [Bb84State::One, Bb84State::Three],
            Bb84Basis::Diagonal => [Bb84State::Two, Bb84State::Four],
        }
    }

    pub fn conjugate(self) -> Self {
        match self {
            Bb84Basis::Rectilinear => Bb84Basis::Diagonal,
            Bb84Basis::Diagonal => Bb84Basis::Rectilinear,
        }
    }

    /// Basis that carries key bit `bit` on the first qubit.
    fn for_bit(bit: u8) -> Self {
        if bit == 1 {
            Bb84Basis::Rectilinear
        } else {
            Bb84Basis::Diagonal
        }
    }

    fn for_index(index: usize) -> Self {
        if index == 0 {
            Bb84Basis::Rectilinear
        } else {
            Bb84Basis::Diagonal
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LockingVariant {
    /// Key 00 encoded as 1/2 (P4 x P3 + P4 x P4).
    AsPrinted,
    /// Key 00 encoded as 1/2 (P2 x P3 + P4 x P4), following the pattern of
    /// the other three keys.
    SymmetricCorrected,
    /// Every key encoded as 1/2 (P1 x P1 + P3 x P3); carries no information.
    Control,
}

impl LockingVariant {
    pub fn label(self) -> &'static str {
        match self {
            LockingVariant::AsPrinted => "as_printed",
            LockingVariant::SymmetricCorrected => "symmetric_corrected",
            LockingVariant::Control => "control",
        }
    }

    /// The two product terms (first qubit, second qubit) for `key = 2 k1 + k2`.
    pub fn terms(self, key: usize) -> [(Bb84State, Bb84State); 2] {
        use Bb84State::*;
        match (self, key) {
            (LockingVariant::Control, _) => [(One, One), (Three, Three)],
            (_, 3) => [(One, One), (Three, Two)],
            (_, 2) => [(One, Three), (Three, Four)],
            (_, 1) => [(Two, One), (Four, Two)],
            (LockingVariant::AsPrinted, _) => [(Four, Three), (Four, Four)],
            (LockingVariant::SymmetricCorrected, _) => [(Two, Three), (Four, Four)],
        }
    }
}

impl std::str::FromStr for LockingVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as_printed" => Ok(LockingVariant::AsPrinted),
            "symmetric_corrected" => Ok(LockingVariant::SymmetricCorrected),
            "control" => Ok(LockingVariant::Control),
            other => Err(Error::Parse(format!("unknown locking variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LockingEnsemble {
    pub variant: LockingVariant,
    pub ensemble: CQEnsemble,
}

fn product_mixture(terms: &[Vec<Bb84State>]) -> DensityOperator {
    let states: Vec<DensityOperator> = terms
        .iter()
        .map(|seq| {
            seq.iter()
                .skip(1)
                .fold(seq[0].projector(), |acc, s| acc.kron(&s.projector()))
        })
        .collect();
    let w = vec![1.0 / states.len() as f64; states.len()];
    DensityOperator::mixture(&w, &states).expect("mixture of valid product states")
}

pub fn build_locking_ensemble(variant: LockingVariant) -> LockingEnsemble {
    let states = (0..4)
        .map(|k| {
            let terms: Vec<Vec<Bb84State>> = variant.terms(k).iter().map(|&(a, b)| vec![a, b]).collect();
            product_mixture(&terms)
        })
        .collect();
    LockingEnsemble {
        variant,
        ensemble: CQEnsemble::uniform(2, states).expect("four two-qubit states"),
    }
}

/// Largest key length for the chained builder (2^n qubit dimension <= 64).
pub const MAX_CHAINED_BITS: u32 = 6;

/// Experimental n-bit generalization.
///
/// Qubit 1 is a uniformly random element of the basis selected by `k1`.
/// Qubit i > 1 lies in the rectilinear basis if qubit i-1 was the first
/// element of its basis and in the diagonal basis otherwise; `k_i = 1`
/// selects the first element. For n = 2 this is the symmetric-corrected
/// ensemble.
pub fn build_chained_locking(n: u32) -> Result<CQEnsemble> {
    if n == 0 || n > MAX_CHAINED_BITS {
        return Err(Error::InvalidArgument(format!("chained locking needs 1 <= n <= {MAX_CHAINED_BITS}, got {n}")));
    }
    let states = (0..1usize << n)
        .map(|k| {
            let bit = |pos: u32| ((k >> (n - 1 - pos)) & 1) as u8;
            let terms: Vec<Vec<Bb84State>> = Bb84Basis::for_bit(bit(0))
                .elements()
                .iter()
                .map(|&first| {
                    let mut seq = vec![first];
                    for pos in 1..n {
                        let basis = Bb84Basis::for_index(seq.last().expect("non-empty").index_in_basis());
                        let pick = if bit(pos) == 1 { 0 } else { 1 };
                        seq.push(basis.elements()[pick]);
                    }
                    seq
                })
                .collect();
            product_mixture(&terms)
        })
        .collect();
    CQEnsemble::uniform(n, states)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdealComparison {
    /// 1/2 E_K || rho_E^k - I/4 ||_1
    pub value: f64,
    pub per_key: Vec<f64>,
}

pub fn ideal_comparison_value(le: &LockingEnsemble) -> IdealComparison {
    let (value, per_key) = criterion_d_ideal_reference(&le.ensemble);
    IdealComparison { value, per_key }
}

/// Measure qubit 1 in `first_basis`, then qubit 2 in the basis assigned to
/// the first outcome, and map the outcome pair to a guess for `k2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnlockingStrategy {
    pub known_k1: u8,
    pub first_basis: Bb84Basis,
    pub second_basis: [Bb84Basis; 2],
    /// `decode[o1][o2]` is the guess for k2.
    pub decode: [[u8; 2]; 2],
    pub closed_form_success: f64,
}

impl UnlockingStrategy {
    fn outcome_probability(&self, variant: LockingVariant, k2: u8, o1: usize, o2: usize) -> f64 {
        let key = 2 * self.known_k1 as usize + k2 as usize;
        let e1 = self.first_basis.elements()[o1];
        let e2 = self.second_basis[o1].elements()[o2];
        variant
            .terms(key)
            .iter()
            .map(|&(a, b)| 0.5 * e1.overlap_sq(a) * e2.overlap_sq(b))
            .sum()
    }

    /// Fills in the maximum a posteriori decode table and its success
    /// probability under a uniform k2.
    fn with_map_decode(mut self, variant: LockingVariant) -> Self {
        let mut success = 0.0;
        for o1 in 0..2 {
            for o2 in 0..2 {
                let p0 = self.outcome_probability(variant, 0, o1, o2);
                let p1 = self.outcome_probability(variant, 1, o1, o2);
                let guess = if p1 > p0 { 1 } else { 0 };
                self.decode[o1][o2] = guess;
                success += 0.5 * p0.max(p1);
            }
        }
        self.closed_form_success = success;
        self
    }
}

/// Best two-stage basis strategy for `k2` given `k1`, found by enumerating
/// all eight basis choices with decoding read off the term table. Ties go
/// to the first strategy enumerated.
pub fn unlocking_strategy(variant: LockingVariant, known_k1: u8) -> UnlockingStrategy {
    let bases = [Bb84Basis::Rectilinear, Bb84Basis::Diagonal];
    let mut best: Option<UnlockingStrategy> = None;
    for first_basis in bases {
        for b0 in bases {
            for b1 in bases {
                let s = UnlockingStrategy {
                    known_k1,
                    first_basis,
                    second_basis: [b0, b1],
                    decode: [[0; 2]; 2],
                    closed_form_success: 0.0,
                }
                .with_map_decode(variant);
                if best.as_ref().is_none_or(|b| s.closed_form_success > b.closed_form_success) {
                    best = Some(s);
                }
            }
        }
    }
    best.expect("eight candidates")
}

/// The unlocking strategy with every second-qubit basis swapped for its
/// conjugate.
pub fn conjugate_strategy(variant: LockingVariant, known_k1: u8) -> UnlockingStrategy {
    let s = unlocking_strategy(variant, known_k1);
    UnlockingStrategy {
        second_basis: [s.second_basis[0].conjugate(), s.second_basis[1].conjugate()],
        ..s
    }
    .with_map_decode(variant)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KpaOutcome {
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub closed_form_success: f64,
    pub strategy: UnlockingStrategy,
}

/// Samples `trials` rounds of: uniform k2, uniform mixture term, Born-rule
/// outcomes for the two qubits under `strategy`, then decoding.
pub fn simulate_strategy<R: Rng + ?Sized>(
    variant: LockingVariant,
    strategy: &UnlockingStrategy,
    trials: u64,
    rng: &mut R,
) -> Result<KpaOutcome> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let mut successes = 0;
    for _ in 0..trials {
        let k2: u8 = rng.random_range(0..2);
        let key = 2 * strategy.known_k1 as usize + k2 as usize;
        let (a, b) = variant.terms(key)[rng.random_range(0..2)];
        let first = strategy.first_basis.elements()[0];
        let o1 = if rng.random::<f64>() < first.overlap_sq(a) { 0 } else { 1 };
        let second = strategy.second_basis[o1].elements()[0];
        let o2 = if rng.random::<f64>() < second.overlap_sq(b) { 0 } else { 1 };
        if strategy.decode[o1][o2] == k2 {
            successes += 1;
        }
    }
    Ok(KpaOutcome {
        trials,
        successes,
        success_rate: successes as f64 / trials as f64,
        closed_form_success: strategy.closed_form_success,
        strategy: strategy.clone(),
    })
}

/// Known-plaintext attack on k2 given k1, using the unlocking strategy.
/// The generator is the sub-stream `known_k1` of `seed`.
pub fn kpa_simulate(le: &LockingEnsemble, known_k1: u8, trials: u64, seed: u64) -> Result<KpaOutcome> {
    if known_k1 > 1 {
        return Err(Error::InvalidArgument(format!("k1 must be 0 or 1, got {known_k1}")));
    }
    let strategy = unlocking_strategy(le.variant, known_k1);
    simulate_strategy(le.variant, &strategy, trials, &mut sub_rng(seed, known_k1 as u64))
}

/// Same attack with the conjugate second-qubit bases.
pub fn kpa_simulate_conjugate(le: &LockingEnsemble, known_k1: u8, trials: u64, seed: u64) -> Result<KpaOutcome> {
    if known_k1 > 1 {
        return Err(Error::InvalidArgument(format!("k1 must be 0 or 1, got {known_k1}")));
    }
    let strategy = conjugate_strategy(le.variant, known_k1);
    simulate_strategy(le.variant, &strategy, trials, &mut sub_rng(seed, 2 + known_k1 as u64))
}

/// True when the eigenvalues are (1/2, 1/2, 0, 0) within `tol`.
pub fn has_half_half_spectrum(rho: &DensityOperator, tol: f64) -> Result<bool> {
    let ev = rho.eigenvalues()?;
    Ok(ev.len() == 4
        && (ev[0] - 0.5).abs() <= tol
        && (ev[1] - 0.5).abs() <= tol
        && ev[2].abs() <= tol
        && ev[3].abs() <= tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KpaSummary {
    pub known_k1: u8,
    pub unlocking: KpaOutcome,
    pub conjugate_control: KpaOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LockingReport {
    pub variant: LockingVariant,
    pub criteria: CriteriaRecord,
    pub ideal_comparison: IdealComparison,
    /// 1/2 + ideal comparison value: the success bound suggested by reading
    /// the trace criterion as a distinguishing advantage.
    pub composition: f64,
    pub kpa: Vec<KpaSummary>,
    /// Smallest closed-form unlocking success over k1.
    pub kpa_closed_form_min: f64,
    /// Keys whose state has eigenvalues (1/2, 1/2, 0, 0).
    pub half_half_spectrum: Vec<bool>,
    pub average_state_distance_from_mixed: f64,
    pub notes: Vec<String>,
}

impl LockingReport {
    /// Properties that must hold for the variant; a non-empty list is a
    /// hard failure.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.criteria.d >= 1.0 - 1e-6 {
            out.push(format!("d = {} is not below 1", self.criteria.d));
        }
        for (k, ok) in self.half_half_spectrum.iter().enumerate() {
            let expected = self.variant != LockingVariant::AsPrinted || k != 0;
            if *ok != expected {
                out.push(format!("key {k:02b}: unexpected spectrum"));
            }
        }
        if self.variant == LockingVariant::SymmetricCorrected {
            if (self.composition - 1.0).abs() > 1e-10 {
                out.push(format!("composition {} differs from 1", self.composition));
            }
            for s in &self.kpa {
                if s.unlocking.closed_form_success != 1.0 || s.unlocking.successes != s.unlocking.trials {
                    out.push(format!("k1 = {}: unlocking did not recover k2 with certainty", s.known_k1));
                }
            }
        }
        out
    }
}

pub fn locking_report(le: &LockingEnsemble, trials: u64, seed: u64) -> Result<LockingReport> {
    let criteria = criteria_record(&le.ensemble)?;
    let ideal_comparison = ideal_comparison_value(le);
    let kpa = (0..2u8)
        .map(|k1| {
            Ok(KpaSummary {
                known_k1: k1,
                unlocking: kpa_simulate(le, k1, trials, seed)?,
                conjugate_control: kpa_simulate_conjugate(le, k1, trials, seed)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let kpa_closed_form_min = kpa
        .iter()
        .map(|s| s.unlocking.closed_form_success)
        .fold(f64::INFINITY, f64::min);
    let half_half_spectrum = le
        .ensemble
        .states()
        .iter()
        .map(|s| has_half_half_spectrum(s, 1e-10))
        .collect::<Result<Vec<_>>>()?;
    let average_state_distance_from_mixed = trace_distance(&average_state(&le.ensemble), &DensityOperator::maximally_mixed(4))?;
    let mut notes = vec![format!("variant {}", le.variant.label())];
    if le.variant == LockingVariant::AsPrinted {
        notes.push("key 00 state P4 x (P3 + P4)/2 is not an equal mixture of orthogonal terms; its spectrum is not (1/2, 1/2, 0, 0)".into());
    }
    Ok(LockingReport {
        variant: le.variant,
        composition: 0.5 + ideal_comparison.value,
        criteria,
        ideal_comparison,
        kpa,
        kpa_closed_form_min,
        half_half_spectrum,
        average_state_distance_from_mixed,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{criterion_d_decomposed, holevo_chi};
    use crate::operator::ComplexMatrix;

    fn inner(a: [Complex64; 2], b: [Complex64; 2]) -> Complex64 {
        a[0].conj() * b[0] + a[1].conj() * b[1]
    }

    #[test]
    fn overlap_table_matches_vectors() {
        for a in Bb84State::ALL {
            for b in Bb84State::ALL {
                let exact = inner(a.vector(), b.vector()).norm_sqr();
                assert!((exact - a.overlap_sq(b)).abs() < 1e-12, "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn states_are_normalized_and_valid() {
        for variant in [LockingVariant::AsPrinted, LockingVariant::SymmetricCorrected, LockingVariant::Control] {
            let le = build_locking_ensemble(variant);
            assert_eq!(le.ensemble.state_dim(), 4);
            for s in le.ensemble.states() {
                assert!((s.as_hermitian().trace() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spectra() {
        let sym = build_locking_ensemble(LockingVariant::SymmetricCorrected);
        for s in sym.ensemble.states() {
            assert!(has_half_half_spectrum(s, 1e-10).unwrap());
        }
        let printed = build_locking_ensemble(LockingVariant::AsPrinted);
        for k in 1..4 {
            assert!(has_half_half_spectrum(&printed.ensemble.states()[k], 1e-10).unwrap());
        }
        // P4 x (P3 + P4)/2 has eigenvalues of (P3 + P4)/2: (2 +- sqrt 2)/4
        let ev = printed.ensemble.states()[0].eigenvalues().unwrap();
        let hi = (2.0 + 2f64.sqrt()) / 4.0;
        assert!((ev[0] - hi).abs() < 1e-10);
        assert!((ev[1] - (1.0 - hi)).abs() < 1e-10);
    }

    #[test]
    fn first_qubit_marginals_of_key_00() {
        let printed = build_locking_ensemble(LockingVariant::AsPrinted);
        let m = printed.ensemble.states()[0].partial_trace_second(2, 2).unwrap();
        assert!(m.matrix().max_abs_diff(Bb84State::Four.projector().matrix()) < 1e-12);
        let sym = build_locking_ensemble(LockingVariant::SymmetricCorrected);
        let m = sym.ensemble.states()[0].partial_trace_second(2, 2).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[&[0.5, 0.0], &[0.0, 0.5]]).unwrap();
        assert!(m.matrix().max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn ideal_comparison() {
        let sym = ideal_comparison_value(&build_locking_ensemble(LockingVariant::SymmetricCorrected));
        for v in &sym.per_key {
            assert!((v - 0.5).abs() < 1e-10);
        }
        assert!((sym.value - 0.5).abs() < 1e-10);
        let printed = ideal_comparison_value(&build_locking_ensemble(LockingVariant::AsPrinted));
        for v in &printed.per_key[1..] {
            assert!((v - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn average_states() {
        let mixed = DensityOperator::maximally_mixed(4);
        let sym = build_locking_ensemble(LockingVariant::SymmetricCorrected);
        assert!(trace_distance(&average_state(&sym.ensemble), &mixed).unwrap() < 1e-12);
        assert!((criterion_d_decomposed(&sym.ensemble) - 0.5).abs() < 1e-10);
        let printed = build_locking_ensemble(LockingVariant::AsPrinted);
        assert!(trace_distance(&average_state(&printed.ensemble), &mixed).unwrap() > 1e-3);
        assert!(criterion_d_decomposed(&printed.ensemble) < 1.0 - 1e-6);
    }

    #[test]
    fn unlocking_is_exact_for_symmetric_variant() {
        let le = build_locking_ensemble(LockingVariant::SymmetricCorrected);
        for k1 in 0..2 {
            let out = kpa_simulate(&le, k1, 20_000, 5).unwrap();
            assert_eq!(out.closed_form_success, 1.0);
            assert_eq!(out.successes, out.trials);
        }
        let s = unlocking_strategy(LockingVariant::SymmetricCorrected, 1);
        assert_eq!(s.first_basis, Bb84Basis::Rectilinear);
        assert_eq!(s.second_basis, [Bb84Basis::Rectilinear, Bb84Basis::Diagonal]);
    }

    #[test]
    fn conjugate_bases_give_a_coin_flip() {
        let le = build_locking_ensemble(LockingVariant::SymmetricCorrected);
        let trials = 40_000u64;
        let sigma = (0.25 / trials as f64).sqrt();
        for k1 in 0..2 {
            let out = kpa_simulate_conjugate(&le, k1, trials, 6).unwrap();
            assert_eq!(out.closed_form_success, 0.5);
            assert!((out.success_rate - 0.5).abs() <= 3.0 * sigma, "{}", out.success_rate);
        }
    }

    #[test]
    fn control_variant_leaks_nothing() {
        let le = build_locking_ensemble(LockingVariant::Control);
        assert!(criterion_d_decomposed(&le.ensemble).abs() < 1e-12);
        assert!(holevo_chi(&le.ensemble).abs() < 1e-10);
        for k1 in 0..2 {
            assert_eq!(unlocking_strategy(LockingVariant::Control, k1).closed_form_success, 0.5);
        }
    }

    #[test]
    fn as_printed_key_zero_is_not_fully_unlocked() {
        let s = unlocking_strategy(LockingVariant::AsPrinted, 0);
        assert!(s.closed_form_success < 1.0);
        assert_eq!(unlocking_strategy(LockingVariant::AsPrinted, 1).closed_form_success, 1.0);
    }

    #[test]
    fn trials_must_be_positive() {
        let le = build_locking_ensemble(LockingVariant::SymmetricCorrected);
        assert!(kpa_simulate(&le, 0, 0, 0).is_err());
        assert!(kpa_simulate(&le, 2, 10, 0).is_err());
    }

    #[test]
    fn chained_two_bits_matches_symmetric_variant() {
        let chained = build_chained_locking(2).unwrap();
        let sym = build_locking_ensemble(LockingVariant::SymmetricCorrected);
        for (a, b) in chained.states().iter().zip(sym.ensemble.states()) {
            assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-14);
        }
        assert!(build_chained_locking(0).is_err());
        assert!(build_chained_locking(7).is_err());
    }

    #[test]
    fn chained_states_have_rank_two() {
        let e = build_chained_locking(3).unwrap();
        for s in e.states() {
            let ev = s.eigenvalues().unwrap();
            assert!((ev[0] - 0.5).abs() < 1e-10 && (ev[1] - 0.5).abs() < 1e-10);
            assert!(ev[2..].iter().all(|x| x.abs() < 1e-10));
        }
    }

    #[test]
    fn report_for_symmetric_variant() {
        let r = locking_report(&build_locking_ensemble(LockingVariant::SymmetricCorrected), 1000, 0).unwrap();
        assert!((r.composition - 1.0).abs() < 1e-10);
        assert_eq!(r.kpa_closed_form_min, 1.0);
        assert!(r.invariant_violations().is_empty(), "{:?}", r.invariant_violations());
        let p = locking_report(&build_locking_ensemble(LockingVariant::AsPrinted), 1000, 0).unwrap();
        assert!(p.invariant_violations().is_empty(), "{:?}", p.invariant_violations());
        assert!(!p.half_half_spectrum[0]);
    }

    #[test]
    fn variant_parsing() {
        for v in [LockingVariant::AsPrinted, LockingVariant::SymmetricCorrected, LockingVariant::Control] {
            assert_eq!(v.label().parse::<LockingVariant>().unwrap(), v);
        }
        assert!("other".parse::<LockingVariant>().is_err());
    }
}
