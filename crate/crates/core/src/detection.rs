//! Quantum measurements and state discrimination.
//!
//! Binary discrimination uses the Helstrom projector. M-ary minimum-error
//! discrimination starts from the square-root measurement and refines it
//! with the fixed-point map
//!
//! ```text
//! Pi_k <- G^{-1/2} B_k Pi_k B_k G^{-1/2},   G = sum_k B_k Pi_k B_k
//! ```
//!
//! with `B_k = p_k rho_k`, which preserves completeness and positivity. The
//! same map with `B_j = I + eps R_j`, `R_j` the gradient of the mutual
//! information, drives the accessible-information search over rank-one
//! POVMs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distributions::ProbabilityDistribution;
use crate::ensemble::{average_state, key_bit, CQEnsemble};
use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, DensityOperator, HermitianOperator, POSITIVITY_TOL};
use crate::random::{gaussian_complex, sub_rng};

/// Tolerance on `sum_y M_y - I`.
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Outcome cap for any POVM.
pub const MAX_OUTCOMES: usize = 256;

/// Eigenvalues below this are treated as zero when inverting on a support.
const SUPPORT_TOL: f64 = 1e-12;

/// Finite set of positive semidefinite operators summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    elements: Vec<HermitianOperator>,
}

impl Povm {
    pub fn new(elements: Vec<HermitianOperator>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::InvalidPovm("no elements".into()));
        };
        if elements.len() > MAX_OUTCOMES {
            return Err(Error::InvalidPovm(format!("{} outcomes exceed the cap of {MAX_OUTCOMES}", elements.len())));
        }
        let dim = first.dim();
        let mut total = HermitianOperator::zeros(dim);
        for (i, el) in elements.iter().enumerate() {
            if el.dim() != dim {
                return Err(Error::InvalidPovm(format!("element {i} has dimension {}", el.dim())));
            }
            let lowest = el.eigenvalues()?.last().copied().unwrap_or(0.0);
            if lowest < -POSITIVITY_TOL {
                return Err(Error::InvalidPovm(format!("element {i} has eigenvalue {lowest:e}")));
            }
            total = total.add(el)?;
        }
        let defect = total.matrix().max_abs_diff(&ComplexMatrix::identity(dim));
        if defect > COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!("elements sum to identity only within {defect:e}")));
        }
        Ok(Self { dim, elements })
    }

    /// The single-outcome measurement {I}.
    pub fn trivial(dim: usize) -> Self {
        Self {
            dim,
            elements: vec![HermitianOperator::identity(dim)],
        }
    }

    /// Projective measurement in the computational basis.
    pub fn computational(dim: usize) -> Self {
        Self::projective(&ComplexMatrix::identity(dim)).expect("identity columns are orthonormal")
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn projective(basis: &ComplexMatrix) -> Result<Self> {
        let elements = (0..basis.cols()).map(|c| HermitianOperator::projector(&basis.column(c))).collect();
        Self::new(elements)
    }

    /// Rank-one POVM {|v_j><v_j|}; the vectors must already resolve the
    /// identity.
    pub fn rank_one(vectors: &[Vec<Complex64>]) -> Result<Self> {
        let elements = vectors
            .iter()
            .map(|v| HermitianOperator::from_hermitian_part(&ComplexMatrix::outer(v)))
            .collect();
        Self::new(elements)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    /// Outcome distribution tr(M_y rho).
    pub fn outcome_distribution(&self, rho: &DensityOperator) -> Result<ProbabilityDistribution> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, rho.dim()));
        }
        let probs = self
            .elements
            .iter()
            .map(|m| m.expectation(rho.as_hermitian()).map(|x| x.max(0.0)))
            .collect::<Result<Vec<_>>>()?;
        ProbabilityDistribution::from_weights(probs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Helstrom,
    SquareRoot,
    Iterative,
    BruteForce,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminationResult {
    pub success_probability: f64,
    pub povm: Povm,
    pub method: Method,
    pub converged: bool,
    pub iterations: usize,
}

/// Optimal two-state discrimination with prior `prior` on `rho`.
///
/// The first POVM element (guess `rho`) projects onto the positive part of
/// `prior rho - (1 - prior) sigma`.
pub fn helstrom_binary(rho: &DensityOperator, sigma: &DensityOperator, prior: f64) -> Result<DiscriminationResult> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    if !(0.0..=1.0).contains(&prior) {
        return Err(Error::InvalidArgument(format!("prior {prior} outside [0, 1]")));
    }
    let gamma = rho.as_hermitian().scale(prior).add_scaled(sigma.as_hermitian(), -(1.0 - prior))?;
    let spectrum = gamma.spectrum()?;
    let positive = HermitianOperator::from_hermitian_part(&spectrum.reconstruct_with(|x| if x > 0.0 { 1.0 } else { 0.0 }));
    let rest = HermitianOperator::identity(rho.dim()).sub(&positive)?;
    let gain: f64 = spectrum.values.iter().filter(|&&x| x > 0.0).sum();
    let success = ((1.0 - prior) + gain).clamp(0.0, 1.0);
    Ok(DiscriminationResult {
        success_probability: success,
        povm: Povm::new(vec![positive, rest])?,
        method: Method::Helstrom,
        converged: true,
        iterations: 0,
    })
}

/// Best qubit projective measurement found by an angle grid of
/// `grid x grid` Bloch directions followed by a pattern-search polish.
///
/// Uses expectation values only; it is the check on [`helstrom_binary`].
pub fn brute_force_qubit(rho: &DensityOperator, sigma: &DensityOperator, prior: f64, grid: usize) -> Result<DiscriminationResult> {
    if rho.dim() != 2 || sigma.dim() != 2 {
        return Err(Error::InvalidArgument("brute-force projective search is limited to qubits".into()));
    }
    let success = |theta: f64, phi: f64| -> f64 {
        let psi = bloch_vector(theta, phi);
        let p = expectation_on(&psi, rho.matrix());
        let q = expectation_on(&psi, sigma.matrix());
        prior * p + (1.0 - prior) * (1.0 - q)
    };
    let grid = grid.max(2);
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..grid {
        let theta = std::f64::consts::PI * (i as f64 + 0.5) / grid as f64;
        for j in 0..grid {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / grid as f64;
            let s = success(theta, phi);
            if s > best.0 {
                best = (s, theta, phi);
            }
        }
    }
    let (mut value, mut theta, mut phi) = best;
    let mut step = std::f64::consts::PI / grid as f64;
    let mut iterations = 0;
    while step > 1e-12 && iterations < 10_000 {
        iterations += 1;
        let mut improved = false;
        for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let s = success(theta + dt, phi + dp);
            if s > value {
                value = s;
                theta += dt;
                phi += dp;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let psi = bloch_vector(theta, phi);
    let first = HermitianOperator::projector(&psi);
    let second = HermitianOperator::identity(2).sub(&first)?;
    let mut povm = Povm::new(vec![first, second])?;
    // guessing without measuring
    let blind = prior.max(1.0 - prior);
    if blind > value {
        value = blind;
        let (a, b) = if prior >= 0.5 {
            (HermitianOperator::identity(2), HermitianOperator::zeros(2))
        } else {
            (HermitianOperator::zeros(2), HermitianOperator::identity(2))
        };
        povm = Povm::new(vec![a, b])?;
    }
    Ok(DiscriminationResult {
        success_probability: value,
        povm,
        method: Method::BruteForce,
        converged: step <= 1e-12,
        iterations,
    })
}

fn bloch_vector(theta: f64, phi: f64) -> [Complex64; 2] {
    [
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    ]
}

fn expectation_on(psi: &[Complex64], m: &ComplexMatrix) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..psi.len() {
        for j in 0..psi.len() {
            acc += psi[i].conj() * m[(i, j)] * psi[j];
        }
    }
    acc.re
}

/// p_k rho_k for every key.
fn weighted_states(e: &CQEnsemble) -> Vec<HermitianOperator> {
    e.states()
        .iter()
        .zip(e.prior().probs())
        .map(|(s, &p)| s.as_hermitian().scale(p))
        .collect()
}

fn success_of(weighted: &[HermitianOperator], elements: &[HermitianOperator]) -> f64 {
    weighted
        .iter()
        .zip(elements)
        .map(|(a, m)| a.expectation(m).expect("same dimension"))
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// Pseudo-inverse square root on the support of a positive operator.
fn inverse_sqrt_on_support(op: &HermitianOperator) -> Result<HermitianOperator> {
    let scale = op.eigenvalues()?.first().copied().unwrap_or(0.0).max(0.0);
    let cut = SUPPORT_TOL * scale.max(1.0);
    op.map_spectrum(|x| if x > cut { 1.0 / x.sqrt() } else { 0.0 })
}

/// `S X_k S` for each k, with `I - sum` folded into the first element so the
/// result resolves the identity exactly.
fn complete(elements: Vec<HermitianOperator>) -> Result<Vec<HermitianOperator>> {
    let dim = elements[0].dim();
    let mut total = HermitianOperator::zeros(dim);
    for el in &elements {
        total = total.add(el)?;
    }
    let remainder = HermitianOperator::identity(dim).sub(&total)?;
    let mut out = elements;
    out[0] = out[0].add(&remainder)?;
    // large inverse square roots amplify round-off into small negative eigenvalues
    let mut clipped = false;
    for m in out.iter_mut() {
        if m.eigenvalues()?.last().is_some_and(|&x| x < 0.0) {
            *m = m.map_spectrum(|x| x.max(0.0))?;
            clipped = true;
        }
    }
    if clipped {
        let mut g = HermitianOperator::zeros(dim);
        for el in &out {
            g = g.add(el)?;
        }
        let s = g.map_spectrum(|x| 1.0 / x.sqrt())?;
        out = out.iter().map(|m| m.conjugate_by(s.matrix())).collect::<Result<_>>()?;
    }
    Ok(out)
}

/// Pretty-good measurement M_k = rho^{-1/2} p_k rho_k rho^{-1/2}.
///
/// The inverse is taken on the support of rho; the kernel projector is
/// added to the first element.
pub fn square_root_measurement(e: &CQEnsemble) -> Result<DiscriminationResult> {
    let weighted = weighted_states(e);
    let s = inverse_sqrt_on_support(average_state(e).as_hermitian())?;
    let raw = weighted
        .iter()
        .map(|a| a.conjugate_by(s.matrix()))
        .collect::<Result<Vec<_>>>()?;
    let elements = complete(raw)?;
    let success = success_of(&weighted, &elements);
    Ok(DiscriminationResult {
        success_probability: success,
        povm: Povm::new(elements)?,
        method: Method::SquareRoot,
        converged: true,
        iterations: 0,
    })
}

/// One step of `Pi_k <- G^{-1/2} B_k Pi_k B_k^dagger G^{-1/2}`.
fn reweight(generators: &[ComplexMatrix], elements: &[HermitianOperator]) -> Result<Vec<HermitianOperator>> {
    let raw = generators
        .iter()
        .zip(elements)
        .map(|(b, m)| m.conjugate_by(b))
        .collect::<Result<Vec<_>>>()?;
    let dim = elements[0].dim();
    let mut g = HermitianOperator::zeros(dim);
    for r in &raw {
        g = g.add(r)?;
    }
    let s = inverse_sqrt_on_support(&g)?;
    let mapped = raw.iter().map(|r| r.conjugate_by(s.matrix())).collect::<Result<Vec<_>>>()?;
    complete(mapped)
}

/// Default iteration cap for [`minimum_error_iterate`].
pub const DEFAULT_MAX_ITERS: usize = 500;
/// Default relative-improvement stopping threshold.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Fixed-point refinement of the square-root measurement towards the
/// minimum-error measurement.
///
/// Each step tries the undamped map `B_k = p_k rho_k`; when that fails to
/// improve, damped steps `B_k = I + eps p_k rho_k` with shrinking `eps`
/// are tried. The best measurement seen is returned, so the result never
/// falls below the square-root measurement.
pub fn minimum_error_iterate(e: &CQEnsemble, max_iters: usize, tol: f64) -> Result<DiscriminationResult> {
    let start = square_root_measurement(e)?;
    let weighted = weighted_states(e);
    let dim = e.state_dim();
    let undamped: Vec<ComplexMatrix> = weighted.iter().map(|a| a.matrix().clone()).collect();
    let mut elements = start.povm.elements().to_vec();
    let mut value = start.success_probability;
    let mut converged = false;
    let mut iterations = 0;
    let mut eps = 1.0;
    let mut small_steps = 0;
    while iterations < max_iters {
        iterations += 1;
        let mut candidate = reweight(&undamped, &elements)?;
        let mut cand_value = success_of(&weighted, &candidate);
        if cand_value <= value {
            // damped ascent
            let mut accepted = false;
            while eps > 1e-6 {
                let gens: Vec<ComplexMatrix> = weighted
                    .iter()
                    .map(|a| HermitianOperator::identity(dim).add_scaled(a, eps).map(HermitianOperator::into_matrix))
                    .collect::<Result<_>>()?;
                candidate = reweight(&gens, &elements)?;
                cand_value = success_of(&weighted, &candidate);
                if cand_value > value {
                    accepted = true;
                    eps = (eps * 2.0).min(1e3);
                    break;
                }
                eps *= 0.25;
            }
            if !accepted {
                converged = true;
                break;
            }
        }
        let improvement = cand_value - value;
        elements = candidate;
        value = cand_value;
        // slow tails are common near rank-deficient optima
        small_steps = if improvement <= tol * value.max(f64::MIN_POSITIVE) { small_steps + 1 } else { 0 };
        if small_steps >= 5 {
            converged = true;
            break;
        }
    }
    // the map cannot reach the blind guess from a full-rank start
    let (best_key, &blind) = e
        .prior()
        .probs()
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    if blind > value {
        value = blind;
        elements = vec![HermitianOperator::zeros(dim); e.key_count()];
        elements[best_key] = HermitianOperator::identity(dim);
    }
    Ok(DiscriminationResult {
        success_probability: value,
        povm: Povm::new(elements)?,
        method: Method::Iterative,
        converged,
        iterations,
    })
}

/// Search budget for the accessible-information lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Random starts, in addition to the deterministic ones.
    pub restarts: usize,
    pub max_iters: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            restarts: 4,
            max_iters: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccessibleInfoBound {
    /// Mutual information of the best measurement found. A lower bound on
    /// the accessible information.
    pub bits: f64,
    pub povm: Povm,
    pub budget: SearchBudget,
    pub starts: usize,
    /// Index of the start that produced `povm`; lowest index wins ties.
    pub best_start: usize,
    pub total_iterations: usize,
}

/// Rank-one measurement kept as vectors with `sum_j |v_j><v_j| = I`.
struct RankOneFrame {
    vectors: Vec<Vec<Complex64>>,
}

impl RankOneFrame {
    /// Normalizes arbitrary nonzero vectors by `S^{-1/2}`, `S = sum |v><v|`.
    fn from_raw(raw: Vec<Vec<Complex64>>, dim: usize) -> Result<Self> {
        let mut s = ComplexMatrix::zeros(dim, dim);
        for v in &raw {
            for i in 0..dim {
                for j in 0..dim {
                    s[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        let inv = inverse_sqrt_on_support(&HermitianOperator::from_hermitian_part(&s))?;
        let vectors = raw
            .iter()
            .map(|v| mat_vec(inv.matrix(), v))
            .filter(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-300)
            .collect();
        Ok(Self { vectors })
    }

    fn to_povm(&self) -> Result<Povm> {
        Povm::rank_one(&self.vectors)
    }
}

fn mat_vec(m: &ComplexMatrix, v: &[Complex64]) -> Vec<Complex64> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// rho_k v_j, indexed [j][k].
type FrameImages = Vec<Vec<Vec<Complex64>>>;

/// Mutual information of a rank-one frame, plus the likelihood table
/// t[j][k] = <v_j|rho_k|v_j> and the products rho_k v_j.
fn frame_information(
    states: &[ComplexMatrix],
    prior: &[f64],
    frame: &RankOneFrame,
) -> (f64, Vec<Vec<f64>>, FrameImages) {
    let mut info = 0.0;
    let mut table = Vec::with_capacity(frame.vectors.len());
    let mut images = Vec::with_capacity(frame.vectors.len());
    for v in &frame.vectors {
        let imgs: Vec<Vec<Complex64>> = states.iter().map(|rho| mat_vec(rho, v)).collect();
        let t: Vec<f64> = imgs.iter().map(|img| inner(v, img).re.max(0.0)).collect();
        let py: f64 = t.iter().zip(prior).map(|(a, p)| a * p).sum();
        if py > 0.0 {
            for (a, p) in t.iter().zip(prior) {
                if *a > 0.0 && *p > 0.0 {
                    info += p * a * (a / py).log2();
                }
            }
        }
        table.push(t);
        images.push(imgs);
    }
    (info.max(0.0), table, images)
}

/// Ascent on I(K;Y) over rank-one POVMs from one starting frame.
fn ascend(states: &[ComplexMatrix], prior: &[f64], mut frame: RankOneFrame, max_iters: usize) -> Result<(f64, RankOneFrame, usize)> {
    let dim = states[0].rows();
    let (mut value, mut table, mut images) = frame_information(states, prior, &frame);
    let mut step = 0.5;
    let mut iterations = 0;
    let mut stalls = 0;
    while iterations < max_iters {
        iterations += 1;
        // R_j v_j with R_j = sum_k p_k log2(t_jk / p_j) rho_k
        let mut raw = Vec::with_capacity(frame.vectors.len());
        let mut norms = Vec::with_capacity(frame.vectors.len());
        for (j, v) in frame.vectors.iter().enumerate() {
            let t = &table[j];
            let py: f64 = t.iter().zip(prior).map(|(a, p)| a * p).sum();
            let mut rv = vec![Complex64::new(0.0, 0.0); dim];
            let mut bound = 0.0;
            for (k, img) in images[j].iter().enumerate() {
                if prior[k] == 0.0 || py <= 0.0 {
                    continue;
                }
                let w = prior[k] * (t[k].max(1e-300) / py).log2().max(-700.0);
                bound += w.abs();
                for (r, x) in rv.iter_mut().zip(img) {
                    *r += x * w;
                }
            }
            raw.push((v.clone(), rv));
            norms.push(bound);
        }
        let scale = norms.iter().copied().fold(0.0, f64::max).max(1e-12);
        let mut accepted = false;
        while step > 1e-8 {
            let eps = step / scale;
            let cand_raw: Vec<Vec<Complex64>> = raw
                .iter()
                .map(|(v, rv)| v.iter().zip(rv).map(|(a, b)| a + b * eps).collect())
                .collect();
            let cand = RankOneFrame::from_raw(cand_raw, dim)?;
            let (cand_value, cand_table, cand_images) = frame_information(states, prior, &cand);
            if cand_value > value {
                let gain = cand_value - value;
                frame = cand;
                value = cand_value;
                table = cand_table;
                images = cand_images;
                accepted = true;
                step = (step * 1.5).min(1.0);
                stalls = if gain < 1e-13 { stalls + 1 } else { 0 };
                break;
            }
            step *= 0.5;
        }
        if !accepted || stalls >= 5 {
            break;
        }
    }
    Ok((value, frame, iterations))
}

/// Multistart local search for the accessible information over rank-one
/// POVMs with at most d_E^2 outcomes.
///
/// Starts: the rank-one refinement of the square-root measurement, the
/// eigenbasis of rho_E, then `budget.restarts` random frames of d_E^2
/// Gaussian vectors, each drawn from its own stream of `seed`. The result is
/// a lower bound on the accessible information.
pub fn accessible_info_lower_bound(e: &CQEnsemble, budget: SearchBudget, seed: u64) -> Result<AccessibleInfoBound> {
    let dim = e.state_dim();
    let max_outcomes = (dim * dim).min(MAX_OUTCOMES);
    let states: Vec<ComplexMatrix> = e.states().iter().map(|s| s.matrix().clone()).collect();
    let prior = e.prior().probs();

    let mut starts: Vec<RankOneFrame> = Vec::new();
    let srm = square_root_measurement(e)?;
    let mut refined = Vec::new();
    for el in srm.povm.elements() {
        let s = el.spectrum()?;
        for (c, &lambda) in s.values.iter().enumerate() {
            if lambda > SUPPORT_TOL {
                refined.push(s.vectors.column(c).into_iter().map(|z| z * lambda.sqrt()).collect::<Vec<_>>());
            }
        }
    }
    if refined.len() <= max_outcomes {
        starts.push(RankOneFrame::from_raw(refined, dim)?);
    }
    let avg = average_state(e).as_hermitian().spectrum()?;
    starts.push(RankOneFrame::from_raw((0..dim).map(|c| avg.vectors.column(c)).collect(), dim)?);
    for r in 0..budget.restarts {
        let mut rng = sub_rng(seed, r as u64);
        let raw = (0..max_outcomes)
            .map(|_| (0..dim).map(|_| gaussian_complex(&mut rng)).collect())
            .collect();
        starts.push(RankOneFrame::from_raw(raw, dim)?);
    }

    let mut best: Option<(f64, RankOneFrame, usize)> = None;
    let mut total_iterations = 0;
    let n_starts = starts.len();
    for (i, start) in starts.into_iter().enumerate() {
        let (value, frame, iters) = ascend(&states, prior, start, budget.max_iters)?;
        total_iterations += iters;
        if best.as_ref().is_none_or(|(b, _, _)| value > *b) {
            best = Some((value, frame, i));
        }
    }
    let (bits, frame, best_start) = best.expect("at least one start");
    Ok(AccessibleInfoBound {
        bits,
        povm: frame.to_povm()?,
        budget,
        starts: n_starts,
        best_start,
        total_iterations,
    })
}

/// Restricts an ensemble to the keys whose bits at `known_bits` equal
/// `known_values`, renormalizing the prior. The remaining bits keep their
/// relative order.
pub fn conditioned_ensemble(e: &CQEnsemble, known_bits: &[usize], known_values: &[u8]) -> Result<CQEnsemble> {
    if known_bits.len() != known_values.len() {
        return Err(Error::SizeMismatch(known_bits.len(), known_values.len()));
    }
    let n = e.n() as usize;
    let mut seen = vec![false; n];
    for &b in known_bits {
        if b >= n || seen[b] {
            return Err(Error::InvalidArgument(format!("bad or repeated bit position {b}")));
        }
        seen[b] = true;
    }
    if known_values.iter().any(|&v| v > 1) {
        return Err(Error::InvalidArgument("bit values must be 0 or 1".into()));
    }
    let mut weights = Vec::new();
    let mut states = Vec::new();
    for k in 0..e.key_count() {
        if known_bits.iter().zip(known_values).all(|(&b, &v)| e.key_bit(k, b) == v) {
            weights.push(e.prior().probs()[k]);
            states.push(e.states()[k].clone());
        }
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroMassCondition);
    }
    let prior = ProbabilityDistribution::from_weights(weights)?;
    CQEnsemble::new((n - known_bits.len()) as u32, prior, states)
}

/// Known-bit attack on a subset of the key versus reduction of a full-key
/// measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetAttack {
    /// Average over the known values of the optimal success on the
    /// conditioned ensemble.
    pub conditioned_success: f64,
    /// Success on the unknown bits when the known bits and the outcome of
    /// the full-key measurement are combined by maximum a posteriori
    /// guessing.
    pub reduced_success: f64,
    pub full_key_success: f64,
}

/// Compares the direct attack on the unknown bits with post-processing of
/// the full-key minimum-error measurement.
pub fn subset_attack(e: &CQEnsemble, known_bits: &[usize], max_iters: usize, tol: f64) -> Result<SubsetAttack> {
    let full = minimum_error_iterate(e, max_iters, tol)?;
    let n = e.n();
    let unknown: Vec<usize> = (0..n as usize).filter(|b| !known_bits.contains(b)).collect();
    let m = full.povm.len();
    let prior = e.prior().probs();
    let mut conditioned_success = 0.0;
    let mut reduced_success = 0.0;
    for assignment in 0..1usize << known_bits.len() {
        let values: Vec<u8> = (0..known_bits.len())
            .map(|i| ((assignment >> (known_bits.len() - 1 - i)) & 1) as u8)
            .collect();
        let keys: Vec<usize> = (0..e.key_count())
            .filter(|&k| known_bits.iter().zip(&values).all(|(&b, &v)| key_bit(k, b, n) == v))
            .collect();
        let mass: f64 = keys.iter().map(|&k| prior[k]).sum();
        if mass <= 0.0 {
            continue;
        }
        let cond = conditioned_ensemble(e, known_bits, &values)?;
        let opt = if unknown.is_empty() {
            1.0
        } else {
            minimum_error_iterate(&cond, max_iters, tol)?.success_probability
        };
        conditioned_success += mass * opt;
        // sum_y max_k p(k, y) over keys consistent with the known values
        for el in full.povm.elements().iter().take(m) {
            let mut best: f64 = 0.0;
            for &k in &keys {
                let joint = prior[k] * el.expectation(e.states()[k].as_hermitian())?;
                best = best.max(joint);
            }
            reduced_success += best;
        }
    }
    Ok(SubsetAttack {
        conditioned_success,
        reduced_success,
        full_key_success: full.success_probability,
    })
}
