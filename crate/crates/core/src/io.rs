//! Ensemble files.
//!
//! ```json
//! {"n": 1, "prior": [0.5, 0.5], "states": [[[[1,0],[0,0]],[[0,0],[0,0]]], ...]}
//! ```
//!
//! Each state is a matrix literal of `[re, im]` pairs, row by row. A missing
//! prior means the uniform one.

use serde::{Deserialize, Serialize};

use crate::distributions::ProbabilityDistribution;
use crate::ensemble::CQEnsemble;
use crate::error::{Error, Result};
use crate::operator::{validate_density, ComplexMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleFile {
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Vec<f64>>,
    pub states: Vec<ComplexMatrix>,
}

impl EnsembleFile {
    pub fn from_ensemble(e: &CQEnsemble) -> Self {
        Self {
            n: e.n(),
            prior: Some(e.prior().probs().to_vec()),
            states: e.states().iter().map(|s| s.matrix().clone()).collect(),
        }
    }

    /// Validates every state, naming the first offending index.
    pub fn into_ensemble(self) -> Result<CQEnsemble> {
        let states = self
            .states
            .into_iter()
            .enumerate()
            .map(|(index, m)| validate_density(m).map_err(|e| Error::InvalidState { index, source: Box::new(e) }))
            .collect::<Result<Vec<_>>>()?;
        match self.prior {
            Some(p) => CQEnsemble::new(self.n, ProbabilityDistribution::new(p)?, states),
            None => CQEnsemble::uniform(self.n, states),
        }
    }
}

pub fn parse_ensemble(text: &str) -> Result<CQEnsemble> {
    let file: EnsembleFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_ensemble()
}

pub fn ensemble_to_json(e: &CQEnsemble) -> String {
    serde_json::to_string_pretty(&EnsembleFile::from_ensemble(e)).expect("ensemble files always serialize")
}
