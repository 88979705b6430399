//! Classical distributions: distances, entropies, the event-gap identity,
//! the Markov conversion and the extremal spike constructions.
//!
//! Entropic quantities are in bits.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allowed deviation of the total mass from one.
pub const SUM_TOL: f64 = 1e-10;

/// Largest support enumerated by [`GapMode::Exhaustive`].
pub const MAX_EXHAUSTIVE_SIZE: usize = 24;

/// Largest key length whose spike distribution is materialized.
pub const MAX_MATERIALIZED_BITS: u32 = 16;

const SPIKE_ITERATIONS: usize = 200;
const SPIKE_RESIDUAL_TOL: f64 = 1e-12;
const SPIKE_EQUALITY_TOL: f64 = 1e-9;

/// Nonnegative vector summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbabilityDistribution {
    probs: Vec<f64>,
}

impl ProbabilityDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        if let Some((i, &x)) = probs.iter().enumerate().find(|(_, x)| !(**x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidDistribution(format!("entry {i} is {x}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!("sums to {total}")));
        }
        Ok(Self { probs })
    }

    /// Normalizes nonnegative weights; tiny negative round-off is clamped.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let clamped: Vec<f64> = weights.into_iter().map(|w| if w < 0.0 && w > -1e-12 { 0.0 } else { w }).collect();
        let total: f64 = clamped.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidDistribution(format!("total weight {total}")));
        }
        Self::new(clamped.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(size: usize) -> Self {
        Self {
            probs: vec![1.0 / size as f64; size],
        }
    }

    pub fn point_mass(size: usize, at: usize) -> Self {
        let mut probs = vec![0.0; size];
        probs[at] = 1.0;
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn max(&self) -> f64 {
        self.probs.iter().copied().fold(0.0, f64::max)
    }

    /// p(E) for an event given as a list of indices.
    pub fn event_probability(&self, event: &[usize]) -> f64 {
        event.iter().map(|&i| self.probs[i]).sum()
    }
}

impl<'de> Deserialize<'de> for ProbabilityDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let probs = Vec::<f64>::deserialize(deserializer)?;
        Self::new(probs).map_err(serde::de::Error::custom)
    }
}

fn check_sizes(p: &ProbabilityDistribution, q: &ProbabilityDistribution) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::SizeMismatch(p.len(), q.len()));
    }
    Ok(())
}

/// v(P, Q) = 1/2 sum |p_i - q_i|
pub fn variational_distance(p: &ProbabilityDistribution, q: &ProbabilityDistribution) -> Result<f64> {
    check_sizes(p, q)?;
    let s: f64 = p.probs.iter().zip(&q.probs).map(|(a, b)| (a - b).abs()).sum();
    Ok((0.5 * s).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapMode {
    /// The event {i : p_i > q_i}.
    Greedy,
    /// Every subset of the sample space.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventGap {
    pub gap: f64,
    pub witness_event: Vec<usize>,
}

/// max_E |p(E) - q(E)| with a witness event.
///
/// The maximum equals v(P, Q) itself (not 2v).
pub fn max_event_gap(p: &ProbabilityDistribution, q: &ProbabilityDistribution, mode: GapMode) -> Result<EventGap> {
    check_sizes(p, q)?;
    match mode {
        GapMode::Greedy => {
            let witness_event: Vec<usize> = (0..p.len()).filter(|&i| p.probs[i] > q.probs[i]).collect();
            let gap = witness_event.iter().map(|&i| p.probs[i] - q.probs[i]).sum();
            Ok(EventGap { gap, witness_event })
        }
        GapMode::Exhaustive => {
            let n = p.len();
            if n > MAX_EXHAUSTIVE_SIZE {
                return Err(Error::DimensionCapExceeded(n, MAX_EXHAUSTIVE_SIZE));
            }
            let diff: Vec<f64> = p.probs.iter().zip(&q.probs).map(|(a, b)| a - b).collect();
            let mut best = 0.0;
            let mut best_mask = 0u32;
            for mask in 0u32..(1u32 << n) {
                let mut s = 0.0;
                let mut bits = mask;
                while bits != 0 {
                    let i = bits.trailing_zeros() as usize;
                    s += diff[i];
                    bits &= bits - 1;
                }
                if s.abs() > best {
                    best = s.abs();
                    best_mask = mask;
                }
            }
            let witness_event = (0..n).filter(|&i| best_mask & (1 << i) != 0).collect();
            Ok(EventGap {
                gap: best,
                witness_event,
            })
        }
    }
}

/// Binary entropy h(x) in bits.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }
}

/// H(P) = -sum p log2 p
pub fn shannon_entropy(p: &ProbabilityDistribution) -> f64 {
    let h: f64 = p.probs.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum();
    h.clamp(0.0, (p.len() as f64).log2())
}

/// log2 N - H(P): the information gain of P over the uniform distribution.
pub fn entropy_deficit(p: &ProbabilityDistribution) -> f64 {
    ((p.len() as f64).log2() - shannon_entropy(p)).max(0.0)
}

/// Row (k) and column (y) marginals of a joint indexed `k * ny + y`.
pub fn marginals(joint: &ProbabilityDistribution, sizes: (usize, usize)) -> Result<(Vec<f64>, Vec<f64>)> {
    let (nk, ny) = sizes;
    if nk * ny != joint.len() {
        return Err(Error::SizeMismatch(joint.len(), nk * ny));
    }
    let mut pk = vec![0.0; nk];
    let mut py = vec![0.0; ny];
    for k in 0..nk {
        for y in 0..ny {
            let v = joint.probs[k * ny + y];
            pk[k] += v;
            py[y] += v;
        }
    }
    Ok((pk, py))
}

/// Product of the joint's marginals, in the joint's layout.
pub fn product_of_marginals(joint: &ProbabilityDistribution, sizes: (usize, usize)) -> Result<ProbabilityDistribution> {
    let (pk, py) = marginals(joint, sizes)?;
    let probs = pk.iter().flat_map(|a| py.iter().map(move |b| a * b)).collect();
    ProbabilityDistribution::from_weights(probs)
}

/// I(K;Y) in bits for a joint indexed `k * ny + y`.
pub fn mutual_information(joint: &ProbabilityDistribution, sizes: (usize, usize)) -> Result<f64> {
    let (pk, py) = marginals(joint, sizes)?;
    let ny = sizes.1;
    let mut i = 0.0;
    for (k, &a) in pk.iter().enumerate() {
        for (y, &b) in py.iter().enumerate() {
            let pxy = joint.probs[k * ny + y];
            if pxy > 0.0 {
                i += pxy * (pxy / (a * b)).log2();
            }
        }
    }
    Ok(i.max(0.0))
}

/// D(P || Q) in bits.
pub fn kl_divergence(p: &ProbabilityDistribution, q: &ProbabilityDistribution) -> Result<f64> {
    check_sizes(p, q)?;
    let mut s = 0.0;
    for (i, (&a, &b)) in p.probs.iter().zip(&q.probs).enumerate() {
        if a > 0.0 {
            if b <= 0.0 {
                return Err(Error::Infinite(i));
            }
            s += a * (a / b).log2();
        }
    }
    Ok(s.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    MutualInformation,
    VariationalDistance,
}

impl ConstraintKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::MutualInformation => "mutual_information",
            Self::VariationalDistance => "variational_distance",
        }
    }
}

/// Spike-plus-uniform-tail distribution with maximal p1 under one
/// single-number constraint, alongside the closed-form approximation it is
/// compared against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpikeConstruction {
    pub n: u32,
    pub constraint_kind: ConstraintKind,
    pub constraint_exponent: f64,
    /// 2^-exponent: the entropy deficit or the distance from uniform.
    pub constraint_value: f64,
    /// The constraint evaluated at the returned distribution.
    pub achieved_value: f64,
    pub resulting_p1: f64,
    /// Mass of each of the N - 1 tail entries, as log2.
    pub log2_tail_each: f64,
    /// For mutual information: 2^-(l' + log2 n). For variational
    /// distance: 2^-l - 1/N.
    pub reference_p1: f64,
    /// For mutual information: l' + log2 n. For variational distance: l.
    pub reference_exponent: f64,
    pub reference_formula: String,
    /// resulting_p1 / reference_p1
    pub ratio_to_reference: f64,
    /// Set when the optimum and the reference formula disagree by more than
    /// 1e-12 (always reported for the variational-distance construction).
    pub discrepancy: bool,
    pub iterations: usize,
    /// Present when n <= 16.
    pub resulting_distribution: Option<ProbabilityDistribution>,
}

/// log2(1 - 2^-n), accurate for large n.
fn log2_one_minus_inv_size(n: u32) -> f64 {
    (-(-(n as f64)).exp2()).ln_1p() / std::f64::consts::LN_2
}

/// n - H(spike) for spike mass p1 and uniform tail over N - 1 entries.
///
/// Written as `p1 n - h(p1) - (1 - p1) log2(1 - 1/N)`, which avoids
/// subtracting two numbers close to n.
pub fn spike_entropy_deficit(n: u32, p1: f64) -> f64 {
    (p1 * n as f64 - binary_entropy(p1) - (1.0 - p1) * log2_one_minus_inv_size(n)).max(0.0)
}

fn spike_distribution(n: u32, p1: f64) -> Option<ProbabilityDistribution> {
    if n > MAX_MATERIALIZED_BITS {
        return None;
    }
    let size = 1usize << n;
    let mut probs = vec![(1.0 - p1) / (size - 1).max(1) as f64; size];
    probs[0] = p1;
    if size == 1 {
        probs[0] = 1.0;
    }
    ProbabilityDistribution::new(probs).ok()
}

fn spike_log2_tail(n: u32, p1: f64) -> f64 {
    // log2((1 - p1) / (N - 1)) = log2(1 - p1) - n - log2(1 - 1/N)
    (1.0 - p1).log2() - n as f64 - log2_one_minus_inv_size(n)
}

/// Spike whose entropy deficit n - H(P) equals 2^-l'.
///
/// The deficit is increasing in p1 on [1/N, 1], so p1 is found by bisection.
pub fn spike_for_mutual_information(n: u32, l_prime: f64) -> Result<SpikeConstruction> {
    if n == 0 {
        return Err(Error::Infeasible("key length must be at least one bit".into()));
    }
    if l_prime.is_nan() {
        return Err(Error::Infeasible("l' is NaN".into()));
    }
    let target = (-l_prime).exp2();
    if target >= n as f64 {
        return Err(Error::Infeasible(format!(
            "entropy deficit 2^-{l_prime} = {target} is not below n = {n}"
        )));
    }
    let uniform_p1 = (-(n as f64)).exp2();
    let (mut lo, mut hi) = (uniform_p1, 1.0f64);
    let mut iterations = 0;
    if target > 0.0 {
        while iterations < SPIKE_ITERATIONS {
            iterations += 1;
            let mid = 0.5 * (lo + hi);
            let r = spike_entropy_deficit(n, mid) - target;
            if r < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if r.abs() <= SPIKE_RESIDUAL_TOL * target.clamp(1e-300, 1.0) || hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
    }
    let p1 = if target > 0.0 { 0.5 * (lo + hi) } else { uniform_p1 };
    let achieved = spike_entropy_deficit(n, p1);
    if (achieved - target).abs() > SPIKE_EQUALITY_TOL {
        return Err(Error::RootSearchFailure(achieved - target));
    }
    let reference_exponent = l_prime + (n as f64).log2();
    let reference_p1 = (-reference_exponent).exp2();
    Ok(SpikeConstruction {
        n,
        constraint_kind: ConstraintKind::MutualInformation,
        constraint_exponent: l_prime,
        constraint_value: target,
        achieved_value: achieved,
        resulting_p1: p1,
        log2_tail_each: spike_log2_tail(n, p1),
        reference_p1,
        reference_exponent,
        reference_formula: "p1 ~ 2^-(l' + log2 n)".into(),
        ratio_to_reference: p1 / reference_p1,
        discrepancy: (p1 - reference_p1).abs() > 1e-12,
        iterations,
        resulting_distribution: spike_distribution(n, p1),
    })
}

/// Spike with maximal p1 subject to v(P, U) = 2^-l.
///
/// Only p1 sits above 1/N, so v(P, U) = p1 - 1/N and the optimum is
/// p1 = 1/N + 2^-l. The formula 2^-l - 1/N is reported next to it.
pub fn spike_for_variational_distance(n: u32, l: f64) -> Result<SpikeConstruction> {
    if n == 0 {
        return Err(Error::Infeasible("key length must be at least one bit".into()));
    }
    if l.is_nan() {
        return Err(Error::Infeasible("l is NaN".into()));
    }
    let inv_size = (-(n as f64)).exp2();
    let target = (-l).exp2();
    if target > 1.0 - inv_size + 1e-15 {
        return Err(Error::Infeasible(format!(
            "distance 2^-{l} = {target} exceeds 1 - 1/N = {}",
            1.0 - inv_size
        )));
    }
    let p1 = (inv_size + target).min(1.0);
    let achieved = match spike_distribution(n, p1) {
        Some(ref dist) => variational_distance(dist, &ProbabilityDistribution::uniform(dist.len()))?,
        None => p1 - inv_size,
    };
    let reference_p1 = target - inv_size;
    Ok(SpikeConstruction {
        n,
        constraint_kind: ConstraintKind::VariationalDistance,
        constraint_exponent: l,
        constraint_value: target,
        achieved_value: achieved,
        resulting_p1: p1,
        log2_tail_each: spike_log2_tail(n, p1),
        reference_p1,
        reference_exponent: l,
        reference_formula: "p1 = 2^-l - 1/N".into(),
        ratio_to_reference: p1 / reference_p1,
        discrepancy: (p1 - reference_p1).abs() > 1e-12,
        iterations: 0,
        resulting_distribution: spike_distribution(n, p1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarkovBound {
    pub threshold: f64,
    pub probability_bound: f64,
}

/// For nonnegative X with E[X] <= avg: P(X >= c avg) <= 1/c.
pub fn markov_individual_bound(average_bound: f64, exceed_factor: f64) -> Result<MarkovBound> {
    if !(average_bound >= 0.0) {
        return Err(Error::InvalidArgument(format!("average bound {average_bound} must be nonnegative")));
    }
    if !(exceed_factor > 1.0) {
        return Err(Error::InvalidArgument(format!("exceed factor {exceed_factor} must exceed 1")));
    }
    Ok(MarkovBound {
        threshold: exceed_factor * average_bound,
        probability_bound: 1.0 / exceed_factor,
    })
}

/// Largest mass of the pushforward of `p` under `f` (given as `f[i]`).
pub fn pushforward_max(p: &ProbabilityDistribution, f: &[usize]) -> Result<f64> {
    if f.len() != p.len() {
        return Err(Error::SizeMismatch(p.len(), f.len()));
    }
    let mut mass: HashMap<usize, f64> = HashMap::new();
    for (&x, &y) in p.probs.iter().zip(f) {
        *mass.entry(y).or_insert(0.0) += x;
    }
    Ok(mass.into_values().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_distribution, rng_from_seed};
    use rand::Rng;

    fn dist(v: &[f64]) -> ProbabilityDistribution {
        ProbabilityDistribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_invalid_vectors() {
        assert!(ProbabilityDistribution::new(vec![]).is_err());
        assert!(ProbabilityDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(ProbabilityDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(ProbabilityDistribution::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn variational_distance_cases() {
        let p = dist(&[0.2, 0.3, 0.5]);
        assert_eq!(variational_distance(&p, &p).unwrap(), 0.0);
        for n in [2usize, 5, 16] {
            let v = variational_distance(&ProbabilityDistribution::point_mass(n, 0), &ProbabilityDistribution::uniform(n)).unwrap();
            assert!((v - (1.0 - 1.0 / n as f64)).abs() < 1e-15);
        }
        assert!(matches!(
            variational_distance(&p, &ProbabilityDistribution::uniform(2)),
            Err(Error::SizeMismatch(3, 2))
        ));
    }

    #[test]
    fn event_gap_edge_cases() {
        let p = dist(&[0.3, 0.7]);
        for mode in [GapMode::Greedy, GapMode::Exhaustive] {
            let g = max_event_gap(&p, &p, mode).unwrap();
            assert_eq!(g.gap, 0.0);
            assert!(g.witness_event.is_empty());
        }
        let a = dist(&[1.0, 0.0]);
        let b = dist(&[0.0, 1.0]);
        for mode in [GapMode::Greedy, GapMode::Exhaustive] {
            let g = max_event_gap(&a, &b, mode).unwrap();
            assert_eq!(g.gap, 1.0);
            assert_eq!(g.witness_event, vec![0]);
        }
    }

    #[test]
    fn event_gap_modes_agree_with_distance() {
        let mut rng = rng_from_seed(10);
        for _ in 0..50 {
            let p = dist(&random_distribution(10, &mut rng));
            let q = dist(&random_distribution(10, &mut rng));
            let v = variational_distance(&p, &q).unwrap();
            let greedy = max_event_gap(&p, &q, GapMode::Greedy).unwrap();
            let exhaustive = max_event_gap(&p, &q, GapMode::Exhaustive).unwrap();
            assert!((greedy.gap - v).abs() < 1e-12);
            assert!((exhaustive.gap - v).abs() < 1e-12);
            let recomputed = (p.event_probability(&exhaustive.witness_event) - q.event_probability(&exhaustive.witness_event)).abs();
            assert!((recomputed - exhaustive.gap).abs() < 1e-12);
        }
    }

    #[test]
    fn exhaustive_cap() {
        let u = ProbabilityDistribution::uniform(25);
        assert!(matches!(
            max_event_gap(&u, &u, GapMode::Exhaustive),
            Err(Error::DimensionCapExceeded(25, 24))
        ));
    }

    #[test]
    fn entropy_cases() {
        assert_eq!(shannon_entropy(&ProbabilityDistribution::point_mass(4, 2)), 0.0);
        assert!((shannon_entropy(&ProbabilityDistribution::uniform(8)) - 3.0).abs() < 1e-12);
        // h(1/4) = 1/4 * 2 + 3/4 * log2(4/3)
        let h = 0.5 + 0.75 * (4.0f64 / 3.0).log2();
        assert!((shannon_entropy(&dist(&[0.25, 0.75])) - h).abs() < 1e-15);
        assert!((h - 0.811278).abs() < 1e-6);
    }

    #[test]
    fn mutual_information_cases() {
        let product = dist(&[0.1 * 0.3, 0.1 * 0.7, 0.9 * 0.3, 0.9 * 0.7]);
        assert!(mutual_information(&product, (2, 2)).unwrap().abs() < 1e-12);
        // perfectly correlated uniform 3-bit pair
        let mut probs = vec![0.0; 64];
        for k in 0..8 {
            probs[k * 8 + k] = 1.0 / 8.0;
        }
        assert!((mutual_information(&dist(&probs), (8, 8)).unwrap() - 3.0).abs() < 1e-12);
        assert!(matches!(mutual_information(&product, (3, 2)), Err(Error::SizeMismatch(4, 6))));
    }

    #[test]
    fn mutual_information_two_paths() {
        // H(K) + H(Y) - H(K,Y), with marginals summed independently
        let mut rng = rng_from_seed(4);
        for _ in 0..20 {
            let joint = dist(&random_distribution(16, &mut rng));
            let mut pk = [0.0; 4];
            let mut py = [0.0; 4];
            for k in 0..4 {
                for y in 0..4 {
                    pk[k] += joint.probs()[k * 4 + y];
                    py[y] += joint.probs()[k * 4 + y];
                }
            }
            let h = |v: &[f64]| -> f64 { v.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum() };
            let expected = h(&pk) + h(&py) - h(joint.probs());
            assert!((mutual_information(&joint, (4, 4)).unwrap() - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn kl_cases() {
        let p = dist(&[0.4, 0.6]);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        assert!((kl_divergence(&dist(&[1.0, 0.0]), &dist(&[0.5, 0.5])).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(kl_divergence(&dist(&[0.5, 0.5]), &dist(&[1.0, 0.0])), Err(Error::Infinite(1))));
    }

    #[test]
    fn pinsker_in_bits() {
        let mut rng = rng_from_seed(9);
        for _ in 0..200 {
            let p = dist(&random_distribution(6, &mut rng));
            let q = dist(&random_distribution(6, &mut rng));
            let v = variational_distance(&p, &q).unwrap();
            assert!(2.0 * v * v <= kl_divergence(&p, &q).unwrap() + 1e-12);
        }
    }

    #[test]
    fn spike_mi_uniform_limit() {
        let s = spike_for_mutual_information(5, f64::INFINITY).unwrap();
        assert_eq!(s.resulting_p1, 1.0 / 32.0);
        assert_eq!(s.achieved_value, 0.0);
    }

    #[test]
    fn spike_mi_grid_oracle() {
        // exhaustive grid over spike masses at step 1e-7; pick the mass whose
        // deficit is closest to the target
        let (n, l_prime) = (8u32, 2.0);
        let target = 0.25;
        let size = 256.0;
        let mut best = (f64::INFINITY, 0.0);
        let steps = 10_000_000usize;
        for i in 0..=steps {
            let p1 = 1.0 / size + (1.0 - 1.0 / size) * i as f64 / steps as f64;
            let tail = (1.0 - p1) / (size - 1.0);
            let tail_term = if tail > 0.0 { -(size - 1.0) * tail * tail.log2() } else { 0.0 };
            let entropy = -p1 * p1.log2() + tail_term;
            let err = ((n as f64 - entropy) - target).abs();
            if err < best.0 {
                best = (err, p1);
            }
        }
        let s = spike_for_mutual_information(n, l_prime).unwrap();
        assert!((s.resulting_p1 - best.1).abs() < 1e-6, "{} vs {}", s.resulting_p1, best.1);
        assert!((s.achieved_value - target).abs() < 1e-9);
        let d = s.resulting_distribution.as_ref().unwrap();
        assert!(d.probs()[0] >= d.probs()[1]);
        assert!(d.probs()[1..].windows(2).all(|w| w[0] == w[1]));
        assert!(((n as f64 - shannon_entropy(d)) - target).abs() < 1e-9);
    }

    #[test]
    fn spike_mi_long_key() {
        let s = spike_for_mutual_information(4000, 21.0).unwrap();
        assert!((s.achieved_value - (-21.0f64).exp2()).abs() < 1e-9);
        assert!((s.reference_exponent - (21.0 + 4000f64.log2())).abs() < 1e-12);
        assert!((s.reference_exponent - 32.97).abs() < 0.01);
        assert!(s.resulting_distribution.is_none());
        assert!(s.ratio_to_reference > 0.5 && s.ratio_to_reference < 2.0);
    }

    #[test]
    fn spike_mi_infeasible() {
        assert!(matches!(spike_for_mutual_information(1, -1.0), Err(Error::Infeasible(_))));
        assert!(matches!(spike_for_mutual_information(0, 1.0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn spike_vd_cases() {
        let s = spike_for_variational_distance(2, 1.0).unwrap();
        assert!((s.resulting_p1 - 0.75).abs() < 1e-15);
        assert!((s.reference_p1 - 0.25).abs() < 1e-15);
        assert!(s.discrepancy);
        assert!((s.achieved_value - 0.5).abs() < 1e-12);

        let uniform = spike_for_variational_distance(3, f64::INFINITY).unwrap();
        assert_eq!(uniform.resulting_p1, 0.125);

        assert!(matches!(spike_for_variational_distance(1, 0.5), Err(Error::Infeasible(_))));
    }

    #[test]
    fn spike_vd_exhaustive_optimum_at_four_outcomes() {
        // grid over the whole simplex at N = 4, step 1/200
        let steps = 200usize;
        let mut best: f64 = 0.0;
        for a in 0..=steps {
            for b in 0..=steps - a {
                for c in 0..=steps - a - b {
                    let d = steps - a - b - c;
                    let p = [a, b, c, d].map(|x| x as f64 / steps as f64);
                    let v = 0.5 * p.iter().map(|x| (x - 0.25).abs()).sum::<f64>();
                    if (v - 0.5).abs() < 1e-12 {
                        best = best.max(p.iter().copied().fold(0.0, f64::max));
                    }
                }
            }
        }
        assert!((best - 0.75).abs() < 1e-12);
        assert!((spike_for_variational_distance(2, 1.0).unwrap().resulting_p1 - best).abs() < 1e-12);
    }

    #[test]
    fn markov_arithmetic() {
        let b = markov_individual_bound((-20.0f64).exp2(), 1024.0).unwrap();
        assert_eq!(b.threshold, (-10.0f64).exp2());
        assert_eq!(b.probability_bound, (-10.0f64).exp2());
        assert!(markov_individual_bound(0.1, 1.0).is_err());
        assert!(markov_individual_bound(-0.1, 2.0).is_err());
    }

    #[test]
    fn markov_monte_carlo() {
        let mut rng = rng_from_seed(77);
        let samples = 100_000;
        for &(mean, c) in &[(0.5, 2.0), (1.0, 4.0), (0.01, 10.0)] {
            let bound = markov_individual_bound(mean, c).unwrap();
            let mut exceed = 0usize;
            for _ in 0..samples {
                // exponential with the given mean
                let u: f64 = rng.random();
                let x = -mean * (1.0 - u).ln();
                if x >= bound.threshold {
                    exceed += 1;
                }
            }
            let frac = exceed as f64 / samples as f64;
            let sigma = (bound.probability_bound * (1.0 - bound.probability_bound) / samples as f64).sqrt();
            assert!(frac <= bound.probability_bound + 3.0 * sigma, "{frac}");
        }
    }

    #[test]
    fn pushforward_cases() {
        let p = dist(&[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(pushforward_max(&p, &[0, 1, 2, 3]).unwrap(), 0.4);
        assert!((pushforward_max(&p, &[7, 7, 7, 7]).unwrap() - 1.0).abs() < 1e-15);
        assert!(pushforward_max(&p, &[0, 1]).is_err());
    }

    #[test]
    fn pushforward_never_below_max() {
        let mut rng = rng_from_seed(13);
        for _ in 0..1000 {
            let p = dist(&random_distribution(16, &mut rng));
            let f: Vec<usize> = (0..16).map(|_| rng.random_range(0..16)).collect();
            // enumeration oracle
            let mut mass = [0.0; 16];
            for (i, &y) in f.iter().enumerate() {
                mass[y] += p.probs()[i];
            }
            let oracle = mass.iter().copied().fold(0.0, f64::max);
            let got = pushforward_max(&p, &f).unwrap();
            assert!((got - oracle).abs() < 1e-15);
            assert!(got >= p.max());
        }
    }
}
