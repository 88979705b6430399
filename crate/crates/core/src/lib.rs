//! Numerical laboratory for trace-distance, Holevo and guessing-probability
//! security criteria of classical-quantum key ensembles.
//!
//! Entropies are in bits. Key bit 0 is the most significant bit of the key
//! index.

pub mod detection;
pub mod distributions;
pub mod ensemble;
pub mod error;
pub mod harness;
pub mod io;
pub mod locking;
pub mod operator;
pub mod random;

pub use detection::{
    accessible_info_lower_bound, brute_force_qubit, conditioned_ensemble, helstrom_binary, minimum_error_iterate,
    square_root_measurement, subset_attack, AccessibleInfoBound, DiscriminationResult, Method, Povm, SearchBudget,
};
pub use distributions::{
    binary_entropy, kl_divergence, max_event_gap, mutual_information, shannon_entropy, spike_for_mutual_information,
    spike_for_variational_distance, variational_distance, ConstraintKind, GapMode, ProbabilityDistribution,
    SpikeConstruction,
};
pub use ensemble::{
    average_state, criteria_record, criterion_d_decomposed, criterion_d_joint, criterion_d_prime, holevo_chi,
    CQEnsemble, CriteriaRecord,
};
pub use error::{Error, Result};
pub use harness::{run_campaign, BoundsReport, CampaignConfig, Check, EnsembleRecipe, RecipeKind, Verdict};
pub use io::{ensemble_to_json, parse_ensemble, EnsembleFile};
pub use locking::{build_locking_ensemble, kpa_simulate, locking_report, LockingEnsemble, LockingReport, LockingVariant};
pub use operator::{trace_distance, von_neumann_entropy, ComplexMatrix, DensityOperator, HermitianOperator};
