//! Feature maps for least-squares value approximation.
//!
//! A feature map sends a state index to a length-k real vector. Rows may
//! be stored explicitly (loaded from JSON) or generated procedurally so
//! that huge nominal state spaces never materialize an n-by-k matrix.

use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::rng::Draws;

/// State-to-feature-row mapping. Row access is pure and deterministic.
#[derive(Debug, Clone)]
pub enum FeatureMap {
    /// One-hot rows; k equals the state count.
    Identity { n: usize },
    /// Explicit rows keyed by state index.
    Explicit { k: usize, rows: HashMap<usize, Vec<f64>> },
    /// Standard-normal rows generated from `(seed, state)`; any state index
    /// has a row, so this map covers arbitrary nominal spaces.
    Gaussian { k: usize, seed: u64 },
}

#[derive(Deserialize)]
struct FeatureFile {
    k: usize,
    rows: HashMap<String, Vec<f64>>,
}

impl FeatureMap {
    pub fn identity(n: usize) -> Self {
        FeatureMap::Identity { n }
    }

    pub fn gaussian(k: usize, seed: u64) -> Self {
        FeatureMap::Gaussian { k, seed }
    }

    pub fn explicit(k: usize, rows: HashMap<usize, Vec<f64>>) -> Result<Self> {
        for (&state, row) in &rows {
            if row.len() != k {
                return Err(Error::DimensionMismatch {
                    context: "feature row length",
                    expected: k,
                    got: row.len(),
                });
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "non-finite feature entry at state {state}"
                )));
            }
        }
        Ok(FeatureMap::Explicit { k, rows })
    }

    /// Parse the JSON form `{"k": int, "rows": {"state": [floats...]}}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: FeatureFile = serde_json::from_str(text)?;
        let mut rows = HashMap::with_capacity(file.rows.len());
        for (key, row) in file.rows {
            let state: usize = key
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad state key {key:?}")))?;
            rows.insert(state, row);
        }
        Self::explicit(file.k, rows)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Feature dimension k.
    pub fn dim(&self) -> usize {
        match self {
            FeatureMap::Identity { n } => *n,
            FeatureMap::Explicit { k, .. } => *k,
            FeatureMap::Gaussian { k, .. } => *k,
        }
    }

    /// The feature row of `state`.
    pub fn row(&self, state: usize) -> Result<Vec<f64>> {
        match self {
            FeatureMap::Identity { n } => {
                if state >= *n {
                    return Err(Error::StateOutOfRange { state, n: *n });
                }
                let mut row = vec![0.0; *n];
                row[state] = 1.0;
                Ok(row)
            }
            FeatureMap::Explicit { rows, .. } => {
                rows.get(&state).cloned().ok_or(Error::MissingFeatureRow(state))
            }
            FeatureMap::Gaussian { k, seed } => {
                let mut rng = Draws::keyed(*seed, state as u64);
                Ok((0..*k).map(|_| rng.normal()).collect())
            }
        }
    }

    /// Dot product of the feature row of `state` with a weight vector.
    pub fn apply(&self, state: usize, weights: &[f64]) -> Result<f64> {
        let row = self.row(state)?;
        if row.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                context: "feature row vs weights",
                expected: row.len(),
                got: weights.len(),
            });
        }
        Ok(row.iter().zip(weights).map(|(a, b)| a * b).sum())
    }
}
