//! State-value vectors and the relative residual error metric.

use crate::error::{Error, Result};

/// A length-n vector of state values together with a mask saying where an
/// estimate is actually defined. Entries outside the mask are stored as
/// zero and treated as zero by the error metric.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueVector {
    values: Vec<f64>,
    visited: Vec<bool>,
}

impl ValueVector {
    /// All entries defined.
    pub fn full(values: Vec<f64>) -> Self {
        let visited = vec![true; values.len()];
        Self { values, visited }
    }

    /// No entries defined yet.
    pub fn empty(n: usize) -> Self {
        Self { values: vec![0.0; n], visited: vec![false; n] }
    }

    pub fn from_parts(values: Vec<f64>, visited: Vec<bool>) -> Self {
        assert_eq!(values.len(), visited.len());
        for (i, (&v, &m)) in values.iter().zip(&visited).enumerate() {
            assert!(!m || v.is_finite(), "non-finite value at visited state {i}");
        }
        Self { values, visited }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Record an estimate and mark the state visited.
    pub fn set(&mut self, state: usize, value: f64) {
        assert!(value.is_finite(), "non-finite estimate at state {state}");
        self.values[state] = value;
        self.visited[state] = true;
    }

    /// The stored value, or zero when the state was never estimated.
    pub fn get(&self, state: usize) -> f64 {
        if self.visited[state] {
            self.values[state]
        } else {
            0.0
        }
    }

    pub fn is_visited(&self, state: usize) -> bool {
        self.visited[state]
    }

    pub fn visited_count(&self) -> usize {
        self.visited.iter().filter(|&&b| b).count()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn visited(&self) -> &[bool] {
        &self.visited
    }
}

/// Relative residual error between an estimate and the truth:
/// the Euclidean norm of the full length-n difference over the Euclidean
/// norm of the truth, with unvisited estimate entries taken as zero.
pub fn rel_residual_error(estimate: &ValueVector, truth: &ValueVector) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            context: "estimate vs truth lengths",
            expected: truth.len(),
            got: estimate.len(),
        });
    }
    let truth_norm_sq: f64 = truth.values().iter().map(|v| v * v).sum();
    if truth_norm_sq == 0.0 {
        return Err(Error::ZeroNormTruth);
    }
    let diff_sq: f64 = (0..truth.len())
        .map(|i| {
            let d = estimate.get(i) - truth.values()[i];
            d * d
        })
        .sum();
    Ok((diff_sq / truth_norm_sq).sqrt())
}
