//! Randomized verification of the inequalities relating d, delta, chi and
//! the accessible information.
//!
//! Checked relations, all entropies in bits:
//!
//! ```text
//! lemma 1     2 delta^2 <= I(K;Y)
//! lemma 2     2 d^2     <= 2^n I_ac
//! lemma 3     2 d^2     <= chi
//! theorem 1   chi       <= 8 d n + 2 h(2d)        (when 2d <= 1)
//! exponents   l - log2 n - 4 <= l'' <= 2 l,   l = -log2 d,  l'' = -log2 chi
//! ```
//!
//! Lemma 2 only has a lower bound on I_ac to work with, so a violation of
//! the bound computed from it is inconclusive rather than a failure.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::{accessible_info_lower_bound, square_root_measurement, SearchBudget};
use crate::distributions::{binary_entropy, mutual_information, product_of_marginals, variational_distance, ProbabilityDistribution};
use crate::ensemble::{criterion_d_decomposed, holevo_chi, measurement_joint, CQEnsemble};
use crate::error::{Error, Result};
use crate::locking::{build_locking_ensemble, LockingVariant};
use crate::operator::DensityOperator;
use crate::random::{derive_seed, random_density, random_distribution, random_pure, rng_from_seed, LabRng};

/// Tolerance for checks on purely classical quantities.
pub const CLASSICAL_TOL: f64 = 1e-10;
/// Tolerance for checks involving eigendecompositions.
pub const OPERATOR_TOL: f64 = 1e-9;
/// Exponent-relation instances closer than this to either side are flagged.
pub const NEAR_BOUNDARY: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    NotApplicable,
    NotRun,
}

impl Verdict {
    fn from_margin(margin: f64, tol: f64) -> Self {
        if margin >= -tol {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    fn worst(a: Self, b: Self) -> Self {
        let rank = |v: Self| match v {
            Verdict::Fail => 0,
            Verdict::Inconclusive => 1,
            Verdict::Pass => 2,
            Verdict::NotApplicable => 3,
            Verdict::NotRun => 4,
        };
        if rank(a) <= rank(b) {
            a
        } else {
            b
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
            Verdict::NotApplicable => "not_applicable",
            Verdict::NotRun => "not_run",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma1Check {
    pub delta: f64,
    pub mutual_information: f64,
    pub verdict: Verdict,
    /// I - 2 delta^2
    pub margin: f64,
    /// I - (2 / ln 2) delta^2, the sharp Pinsker constant in bits.
    pub tight_margin: f64,
}

/// 2 delta^2 <= I(K;Y) for a joint over `sizes = (keys, outcomes)`.
pub fn check_lemma1(joint: &ProbabilityDistribution, sizes: (usize, usize)) -> Result<Lemma1Check> {
    let product = product_of_marginals(joint, sizes)?;
    let delta = variational_distance(joint, &product)?;
    let info = mutual_information(joint, sizes)?;
    let margin = info - 2.0 * delta * delta;
    Ok(Lemma1Check {
        delta,
        mutual_information: info,
        verdict: Verdict::from_margin(margin, CLASSICAL_TOL),
        margin,
        tight_margin: info - 2.0 / std::f64::consts::LN_2 * delta * delta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma3Check {
    pub d: f64,
    pub chi: f64,
    pub verdict: Verdict,
    /// chi - 2 d^2
    pub margin: f64,
}

pub fn check_lemma3(e: &CQEnsemble) -> Lemma3Check {
    lemma3_from(criterion_d_decomposed(e), holevo_chi(e))
}

fn lemma3_from(d: f64, chi: f64) -> Lemma3Check {
    let margin = chi - 2.0 * d * d;
    Lemma3Check {
        d,
        chi,
        verdict: Verdict::from_margin(margin, OPERATOR_TOL),
        margin,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem1Check {
    pub d: f64,
    pub chi: f64,
    pub lower_verdict: Verdict,
    pub lower_margin: f64,
    /// 8 d n + 2 h(2d); absent when 2d > 1.
    pub upper_bound: Option<f64>,
    pub upper_verdict: Verdict,
    pub upper_margin: Option<f64>,
    pub verdict: Verdict,
}

pub fn check_theorem1(e: &CQEnsemble) -> Theorem1Check {
    theorem1_from(criterion_d_decomposed(e), holevo_chi(e), e.n())
}

fn theorem1_from(d: f64, chi: f64, n: u32) -> Theorem1Check {
    let lower = lemma3_from(d, chi);
    let (upper_bound, upper_margin, upper_verdict) = if 2.0 * d <= 1.0 {
        let bound = 8.0 * d * n as f64 + 2.0 * binary_entropy(2.0 * d);
        let margin = bound - chi;
        (Some(bound), Some(margin), Verdict::from_margin(margin, OPERATOR_TOL))
    } else {
        (None, None, Verdict::NotApplicable)
    };
    Theorem1Check {
        d,
        chi,
        lower_verdict: lower.verdict,
        lower_margin: lower.margin,
        upper_bound,
        upper_verdict,
        upper_margin,
        verdict: Verdict::worst(lower.verdict, upper_verdict),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma2Check {
    pub d: f64,
    pub accessible_info_lower_bound: f64,
    pub budget: SearchBudget,
    /// Pass or inconclusive, never fail.
    pub verdict: Verdict,
    /// 2^n I_hat - 2 d^2
    pub margin: f64,
}

/// 2 d^2 <= 2^n I_ac, tested with a lower bound on I_ac.
pub fn check_lemma2(e: &CQEnsemble, budget: SearchBudget, seed: u64) -> Result<Lemma2Check> {
    let d = criterion_d_decomposed(e);
    let bound = accessible_info_lower_bound(e, budget, seed)?;
    Ok(lemma2_from(d, bound.bits, e.key_count(), budget))
}

fn lemma2_from(d: f64, i_hat: f64, key_count: usize, budget: SearchBudget) -> Lemma2Check {
    let margin = key_count as f64 * i_hat - 2.0 * d * d;
    Lemma2Check {
        d,
        accessible_info_lower_bound: i_hat,
        budget,
        verdict: if margin >= -OPERATOR_TOL {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        },
        margin,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentCheck {
    pub l: Option<f64>,
    pub l_double_prime: Option<f64>,
    pub verdict: Verdict,
    /// l'' - (l - log2 n - 4)
    pub lower_margin: Option<f64>,
    /// 2 l - l''
    pub upper_margin: Option<f64>,
    pub near_boundary: bool,
    /// Why the instance is out of scope, when it is.
    pub out_of_scope: Option<String>,
}

/// l - log2 n - 4 <= l'' <= 2 l for l = -log2 d, l'' = -log2 chi.
///
/// Values of d or chi outside (0, 1], or n < l, are out of scope and yield
/// a not-applicable verdict rather than an error.
pub fn check_exponent_relation(d_value: f64, chi_value: f64, n: u32) -> ExponentCheck {
    let out = |reason: String| ExponentCheck {
        l: None,
        l_double_prime: None,
        verdict: Verdict::NotApplicable,
        lower_margin: None,
        upper_margin: None,
        near_boundary: false,
        out_of_scope: Some(reason),
    };
    if !(d_value > 0.0 && d_value <= 1.0) {
        return out(format!("d = {d_value:e} outside (0, 1]"));
    }
    if !(chi_value > 0.0 && chi_value <= 1.0) {
        return out(format!("chi = {chi_value:e} outside (0, 1]"));
    }
    if n == 0 {
        return out("n = 0".into());
    }
    let l = -d_value.log2();
    let lpp = -chi_value.log2();
    if (n as f64) < l {
        return out(format!("n = {n} < l = {l}"));
    }
    let lower_margin = lpp - (l - (n as f64).log2() - 4.0);
    let upper_margin = 2.0 * l - lpp;
    let pass = lower_margin >= -OPERATOR_TOL && upper_margin >= -OPERATOR_TOL;
    ExponentCheck {
        l: Some(l),
        l_double_prime: Some(lpp),
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        lower_margin: Some(lower_margin),
        upper_margin: Some(upper_margin),
        near_boundary: lower_margin.min(upper_margin) < NEAR_BOUNDARY,
        out_of_scope: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecipeKind {
    /// Reduced states of random pure states on dim^2.
    RandomMixed,
    RandomPure,
    /// Diagonal states with random likelihoods and a random prior.
    CommutingClassical,
    /// Two-bit locking ensemble; the seed parity picks the variant.
    Locking,
    /// Diagonal states whose likelihood has one heavy outcome.
    SpikeClassical,
    /// Key k encoded as basis state |k>.
    OrthogonalPure,
}

impl RecipeKind {
    pub const ALL: [RecipeKind; 6] = [
        RecipeKind::RandomMixed,
        RecipeKind::RandomPure,
        RecipeKind::CommutingClassical,
        RecipeKind::Locking,
        RecipeKind::SpikeClassical,
        RecipeKind::OrthogonalPure,
    ];

    pub fn label(self) -> &'static str {
        match self {
            RecipeKind::RandomMixed => "random_mixed",
            RecipeKind::RandomPure => "random_pure",
            RecipeKind::CommutingClassical => "commuting_classical",
            RecipeKind::Locking => "locking",
            RecipeKind::SpikeClassical => "spike_classical",
            RecipeKind::OrthogonalPure => "orthogonal_pure",
        }
    }
}

impl std::str::FromStr for RecipeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RecipeKind::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| Error::Parse(format!("unknown recipe kind {s:?}")))
    }
}

/// Generation recipe; together with a seed it determines the instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleRecipe {
    pub kind: RecipeKind,
    pub n: u32,
    pub dim: usize,
}

impl EnsembleRecipe {
    pub fn new(kind: RecipeKind, n: u32, dim: usize) -> Result<Self> {
        let r = Self { kind, n, dim };
        r.validate()?;
        Ok(r)
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > 6 {
            return Err(Error::InvalidArgument(format!("recipe key length {} outside 1..=6", self.n)));
        }
        if self.dim < 2 || self.dim > crate::operator::MAX_DIM {
            return Err(Error::InvalidArgument(format!("recipe dimension {} outside 2..=64", self.dim)));
        }
        match self.kind {
            RecipeKind::Locking if (self.n, self.dim) != (2, 4) => {
                Err(Error::InvalidArgument("locking recipes have n = 2 and dim = 4".into()))
            }
            RecipeKind::OrthogonalPure if self.dim < 1 << self.n => {
                Err(Error::InvalidArgument(format!("orthogonal recipes need dim >= 2^n = {}", 1 << self.n)))
            }
            _ => Ok(()),
        }
    }

    /// Locking variant used for a given seed, for locking recipes.
    pub fn locking_variant(&self, seed: u64) -> Option<LockingVariant> {
        (self.kind == RecipeKind::Locking).then_some(if seed.is_multiple_of(2) {
            LockingVariant::SymmetricCorrected
        } else {
            LockingVariant::AsPrinted
        })
    }

    pub fn generate(&self, seed: u64) -> Result<CQEnsemble> {
        self.validate()?;
        let mut rng = rng_from_seed(seed);
        let keys = 1usize << self.n;
        match self.kind {
            RecipeKind::RandomMixed => {
                let states = (0..keys).map(|_| random_density(self.dim, self.dim, &mut rng)).collect();
                CQEnsemble::uniform(self.n, states)
            }
            RecipeKind::RandomPure => {
                let states = (0..keys).map(|_| random_pure(self.dim, &mut rng)).collect();
                CQEnsemble::uniform(self.n, states)
            }
            RecipeKind::CommutingClassical => {
                let states = (0..keys)
                    .map(|_| DensityOperator::diagonal(&random_distribution(self.dim, &mut rng)))
                    .collect::<Result<_>>()?;
                let prior = ProbabilityDistribution::from_weights(random_distribution(keys, &mut rng))?;
                CQEnsemble::new(self.n, prior, states)
            }
            RecipeKind::Locking => {
                let variant = self.locking_variant(seed).expect("locking recipe");
                Ok(build_locking_ensemble(variant).ensemble)
            }
            RecipeKind::SpikeClassical => {
                let states = (0..keys)
                    .map(|k| {
                        let floor = 1.0 / self.dim as f64;
                        let p1 = floor + (1.0 - floor) * rng.random::<f64>();
                        let mut probs = vec![(1.0 - p1) / (self.dim - 1) as f64; self.dim];
                        probs[k % self.dim] = p1;
                        DensityOperator::diagonal(&probs)
                    })
                    .collect::<Result<_>>()?;
                CQEnsemble::uniform(self.n, states)
            }
            RecipeKind::OrthogonalPure => {
                let states = (0..keys).map(|k| DensityOperator::basis_state(self.dim, k)).collect();
                CQEnsemble::uniform(self.n, states)
            }
        }
    }
}

/// A spread of recipes over every kind with n <= 3 and d_E <= 8.
pub fn default_recipes() -> Vec<EnsembleRecipe> {
    let mut out = Vec::new();
    for kind in RecipeKind::ALL {
        match kind {
            RecipeKind::Locking => out.push(EnsembleRecipe { kind, n: 2, dim: 4 }),
            RecipeKind::OrthogonalPure => {
                for n in 1..=3 {
                    out.push(EnsembleRecipe { kind, n, dim: 1 << n });
                }
            }
            _ => {
                for n in 1..=3 {
                    for dim in [2, 4, 8] {
                        out.push(EnsembleRecipe { kind, n, dim });
                    }
                }
            }
        }
    }
    out
}

/// `count` recipes cycling through [`default_recipes`].
pub fn default_campaign(count: usize) -> Vec<EnsembleRecipe> {
    let base = default_recipes();
    (0..count).map(|i| base[i % base.len()]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Lemma1,
    Lemma2,
    Lemma3,
    Theorem1,
    ExponentRelation,
}

impl Check {
    pub const ALL: [Check; 5] = [Check::Lemma1, Check::Lemma2, Check::Lemma3, Check::Theorem1, Check::ExponentRelation];

    pub fn label(self) -> &'static str {
        match self {
            Check::Lemma1 => "lemma1",
            Check::Lemma2 => "lemma2",
            Check::Lemma3 => "lemma3",
            Check::Theorem1 => "theorem1",
            Check::ExponentRelation => "exponent_relation",
        }
    }

    /// A failure of this check is a bug, not a finding.
    pub fn is_hard(self) -> bool {
        matches!(self, Check::Lemma1 | Check::Lemma3 | Check::Theorem1)
    }
}

/// One campaign instance, flat so that it serializes to a single row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub instance_id: usize,
    pub kind: RecipeKind,
    pub variant: Option<LockingVariant>,
    pub n: u32,
    pub state_dim: usize,
    pub seed: u64,
    pub d: f64,
    /// delta under the square-root measurement.
    pub delta: f64,
    pub chi: f64,
    /// I(K;Y) under the square-root measurement.
    pub mutual_information: f64,
    pub i_ac_lower_bound: Option<f64>,
    pub search_restarts: Option<usize>,
    /// chi - I_hat; never below -1e-8 for a correct implementation.
    pub holevo_gap: Option<f64>,
    pub lemma1_verdict: Verdict,
    pub lemma1_margin: Option<f64>,
    pub lemma1_tight_margin: Option<f64>,
    pub lemma2_verdict: Verdict,
    pub lemma2_margin: Option<f64>,
    pub lemma3_verdict: Verdict,
    pub lemma3_margin: Option<f64>,
    pub theorem1_verdict: Verdict,
    pub theorem1_lower_margin: Option<f64>,
    pub theorem1_upper_margin: Option<f64>,
    pub exponent_verdict: Verdict,
    pub exponent_lower_margin: Option<f64>,
    pub exponent_upper_margin: Option<f64>,
    pub exponent_near_boundary: bool,
}

impl BoundsReport {
    pub fn verdict(&self, check: Check) -> Verdict {
        match check {
            Check::Lemma1 => self.lemma1_verdict,
            Check::Lemma2 => self.lemma2_verdict,
            Check::Lemma3 => self.lemma3_verdict,
            Check::Theorem1 => self.theorem1_verdict,
            Check::ExponentRelation => self.exponent_verdict,
        }
    }

    /// Smallest margin of the check, when it was evaluated.
    pub fn margin(&self, check: Check) -> Option<f64> {
        let min = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        };
        match check {
            Check::Lemma1 => self.lemma1_margin,
            Check::Lemma2 => self.lemma2_margin,
            Check::Lemma3 => self.lemma3_margin,
            Check::Theorem1 => min(self.theorem1_lower_margin, self.theorem1_upper_margin),
            Check::ExponentRelation => min(self.exponent_lower_margin, self.exponent_upper_margin),
        }
    }
}

/// Campaign settings shared by every instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub checks: Vec<Check>,
    pub budget: SearchBudget,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            checks: Check::ALL.to_vec(),
            budget: SearchBudget {
                restarts: 2,
                max_iters: 100,
            },
        }
    }
}

/// Seed of instance `index`; a prefix of a campaign reproduces the same
/// instances as the full campaign.
pub fn instance_seed(campaign_seed: u64, index: usize) -> u64 {
    derive_seed(campaign_seed, index as u64)
}

pub fn run_instance(index: usize, recipe: &EnsembleRecipe, config: &CampaignConfig, campaign_seed: u64) -> Result<BoundsReport> {
    let seed = instance_seed(campaign_seed, index);
    let e = recipe.generate(seed)?;
    let enabled = |c: Check| config.checks.contains(&c);
    let d = criterion_d_decomposed(&e);
    let chi = holevo_chi(&e);
    let srm = square_root_measurement(&e)?;
    let joint = measurement_joint(&e, &srm.povm)?;
    let sizes = (e.key_count(), srm.povm.len());
    let lemma1 = check_lemma1(&joint, sizes)?;
    let lemma2 = if enabled(Check::Lemma2) {
        let bound = accessible_info_lower_bound(&e, config.budget, derive_seed(seed, 1))?;
        Some(lemma2_from(d, bound.bits, e.key_count(), config.budget))
    } else {
        None
    };
    let lemma3 = lemma3_from(d, chi);
    let theorem1 = theorem1_from(d, chi, e.n());
    let exponent = check_exponent_relation(d, chi, e.n());
    let gate = |c: Check, v: Verdict| if enabled(c) { v } else { Verdict::NotRun };
    let keep = |c: Check, v: Option<f64>| if enabled(c) { v } else { None };
    Ok(BoundsReport {
        instance_id: index,
        kind: recipe.kind,
        variant: recipe.locking_variant(seed),
        n: e.n(),
        state_dim: e.state_dim(),
        seed,
        d,
        delta: lemma1.delta,
        chi,
        mutual_information: lemma1.mutual_information,
        i_ac_lower_bound: lemma2.map(|l| l.accessible_info_lower_bound),
        search_restarts: lemma2.map(|l| l.budget.restarts),
        holevo_gap: lemma2.map(|l| chi - l.accessible_info_lower_bound),
        lemma1_verdict: gate(Check::Lemma1, lemma1.verdict),
        lemma1_margin: keep(Check::Lemma1, Some(lemma1.margin)),
        lemma1_tight_margin: keep(Check::Lemma1, Some(lemma1.tight_margin)),
        lemma2_verdict: lemma2.map_or(Verdict::NotRun, |l| l.verdict),
        lemma2_margin: lemma2.map(|l| l.margin),
        lemma3_verdict: gate(Check::Lemma3, lemma3.verdict),
        lemma3_margin: keep(Check::Lemma3, Some(lemma3.margin)),
        theorem1_verdict: gate(Check::Theorem1, theorem1.verdict),
        theorem1_lower_margin: keep(Check::Theorem1, Some(theorem1.lower_margin)),
        theorem1_upper_margin: keep(Check::Theorem1, theorem1.upper_margin),
        exponent_verdict: gate(Check::ExponentRelation, exponent.verdict),
        exponent_lower_margin: keep(Check::ExponentRelation, exponent.lower_margin),
        exponent_upper_margin: keep(Check::ExponentRelation, exponent.upper_margin),
        exponent_near_boundary: enabled(Check::ExponentRelation) && exponent.near_boundary,
    })
}

/// Runs one instance per recipe, in parallel. Reports come back ordered by
/// instance id and depend only on the recipes, the config and the seed.
pub fn run_campaign(recipes: &[EnsembleRecipe], config: &CampaignConfig, seed: u64) -> Result<Vec<BoundsReport>> {
    recipes
        .par_iter()
        .enumerate()
        .map(|(i, r)| run_instance(i, r, config, seed))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CheckTally {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    pub not_applicable: usize,
    pub not_run: usize,
    pub worst_margin: Option<f64>,
}

impl CheckTally {
    fn add(&mut self, verdict: Verdict, margin: Option<f64>) {
        match verdict {
            Verdict::Pass => self.pass += 1,
            Verdict::Fail => self.fail += 1,
            Verdict::Inconclusive => self.inconclusive += 1,
            Verdict::NotApplicable => self.not_applicable += 1,
            Verdict::NotRun => self.not_run += 1,
        }
        if let Some(m) = margin {
            self.worst_margin = Some(self.worst_margin.map_or(m, |w| w.min(m)));
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub instances: usize,
    pub lemma1: CheckTally,
    pub lemma2: CheckTally,
    pub lemma3: CheckTally,
    pub theorem1: CheckTally,
    pub exponent_relation: CheckTally,
    pub exponent_near_boundary: usize,
    /// Largest I_hat - chi seen; positive values beyond 1e-8 are bugs.
    pub worst_holevo_excess: Option<f64>,
}

impl CampaignSummary {
    pub fn tally(&self, check: Check) -> &CheckTally {
        match check {
            Check::Lemma1 => &self.lemma1,
            Check::Lemma2 => &self.lemma2,
            Check::Lemma3 => &self.lemma3,
            Check::Theorem1 => &self.theorem1,
            Check::ExponentRelation => &self.exponent_relation,
        }
    }

    fn tally_mut(&mut self, check: Check) -> &mut CheckTally {
        match check {
            Check::Lemma1 => &mut self.lemma1,
            Check::Lemma2 => &mut self.lemma2,
            Check::Lemma3 => &mut self.lemma3,
            Check::Theorem1 => &mut self.theorem1,
            Check::ExponentRelation => &mut self.exponent_relation,
        }
    }

    /// Fails of the checks that must never fail.
    pub fn hard_failures(&self) -> usize {
        Check::ALL.iter().filter(|c| c.is_hard()).map(|&c| self.tally(c).fail).sum()
    }

    pub fn inconclusive_rate(&self) -> f64 {
        let t = &self.lemma2;
        let run = t.pass + t.inconclusive;
        if run == 0 {
            0.0
        } else {
            t.inconclusive as f64 / run as f64
        }
    }
}

pub fn summarize(reports: &[BoundsReport]) -> CampaignSummary {
    let mut s = CampaignSummary {
        instances: reports.len(),
        ..Default::default()
    };
    for r in reports {
        for c in Check::ALL {
            s.tally_mut(c).add(r.verdict(c), r.margin(c));
        }
        if r.exponent_near_boundary {
            s.exponent_near_boundary += 1;
        }
        if let Some(g) = r.holevo_gap {
            s.worst_holevo_excess = Some(s.worst_holevo_excess.map_or(-g, |w: f64| w.max(-g)));
        }
    }
    s
}

/// Joint over `nk x ny` outcomes interpolating between a random product and
/// a random joint, so that small and large dependence are both sampled.
pub fn random_joint(nk: usize, ny: usize, rng: &mut LabRng) -> ProbabilityDistribution {
    let pk = random_distribution(nk, rng);
    let py = random_distribution(ny, rng);
    let free = random_distribution(nk * ny, rng);
    let t: f64 = rng.random::<f64>().powi(2);
    let weights = (0..nk * ny)
        .map(|i| (1.0 - t) * pk[i / ny] * py[i % ny] + t * free[i])
        .collect();
    ProbabilityDistribution::from_weights(weights).expect("convex combination of distributions")
}

/// Lemma 1 on `count` random joints with sides in 2..=max_side.
pub fn lemma1_campaign(count: usize, max_side: usize, seed: u64) -> Result<Vec<Lemma1Check>> {
    if max_side < 2 {
        return Err(Error::InvalidArgument("max_side must be at least 2".into()));
    }
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(instance_seed(seed, i));
            let nk = rng.random_range(2..=max_side);
            let ny = rng.random_range(2..=max_side);
            check_lemma1(&random_joint(nk, ny, &mut rng), (nk, ny))
        })
        .collect()
}

pub fn write_json_lines<W: Write>(mut w: W, reports: &[BoundsReport]) -> Result<()> {
    for r in reports {
        let line = serde_json::to_string(r).map_err(|e| Error::Parse(e.to_string()))?;
        writeln!(w, "{line}").map_err(io_err)?;
    }
    Ok(())
}

pub fn write_csv<W: Write>(w: W, reports: &[BoundsReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in reports {
        out.serialize(r).map_err(|e| Error::Parse(e.to_string()))?;
    }
    out.flush().map_err(io_err)
}

fn io_err(e: std::io::Error) -> Error {
    Error::Parse(format!("write failed: {e}"))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.3e}"))
}

/// Aligned columns, one row per instance.
pub fn write_text<W: Write>(mut w: W, reports: &[BoundsReport]) -> Result<()> {
    let header = [
        "id", "kind", "n", "dim", "d", "chi", "i_ac_lb", "lemma1", "lemma2", "lemma3", "theorem1", "exponent", "min_margin",
    ];
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let min_margin = Check::ALL
                .iter()
                .filter(|&&c| c != Check::Lemma2)
                .filter_map(|&c| r.margin(c))
                .reduce(f64::min);
            vec![
                r.instance_id.to_string(),
                r.kind.label().to_string(),
                r.n.to_string(),
                r.state_dim.to_string(),
                format!("{:.6}", r.d),
                format!("{:.6}", r.chi),
                r.i_ac_lower_bound.map_or("-".into(), |x| format!("{x:.6}")),
                r.lemma1_verdict.label().to_string(),
                r.lemma2_verdict.label().to_string(),
                r.lemma3_verdict.label().to_string(),
                r.theorem1_verdict.label().to_string(),
                r.exponent_verdict.label().to_string(),
                fmt_opt(min_margin),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    writeln!(w, "{}", line(header.to_vec())).map_err(io_err)?;
    for row in &rows {
        writeln!(w, "{}", line(row.iter().map(String::as_str).collect())).map_err(io_err)?;
    }
    Ok(())
}

/// Per-check counts and worst margins as text lines.
pub fn write_summary_text<W: Write>(mut w: W, s: &CampaignSummary) -> Result<()> {
    writeln!(w, "instances {}", s.instances).map_err(io_err)?;
    for c in Check::ALL {
        let t = s.tally(c);
        writeln!(
            w,
            "{:<18} pass {:>6}  fail {:>4}  inconclusive {:>4}  n/a {:>5}  not_run {:>5}  worst_margin {}",
            c.label(),
            t.pass,
            t.fail,
            t.inconclusive,
            t.not_applicable,
            t.not_run,
            fmt_opt(t.worst_margin)
        )
        .map_err(io_err)?;
    }
    writeln!(w, "lemma2 inconclusive rate {:.4}", s.inconclusive_rate()).map_err(io_err)?;
    writeln!(w, "exponent near-boundary instances {}", s.exponent_near_boundary).map_err(io_err)?;
    Ok(())
}
