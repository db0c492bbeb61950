//! Least-squares temporal differencing over a feature map.
//!
//! The sampled system accumulates one rank-one update per step:
//! `z <- gamma*lambda*z + phi(s)`, `A <- A + z (phi(s) - gamma phi(s'))^T`,
//! `b <- b + z r`, with the trace `z` reset at trajectory boundaries.
//! Solving `A w = b` then yields feature weights whose dot product with
//! `phi(n)` evaluates any state, visited or not. The per-step cost is
//! `O(k^2)` regardless of the state count.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::features::FeatureMap;
use crate::sample::StepRecord;
use crate::value::ValueVector;

/// Feature-space weights returned by the least-squares estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Self {
        Self(w)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Evaluate one state: `phi(state) . w`.
    pub fn value(&self, features: &FeatureMap, state: usize) -> Result<f64> {
        features.apply(state, &self.0)
    }

    /// Evaluate every state of a desk-scale space into a dense vector.
    pub fn values_dense(&self, features: &FeatureMap, n: usize) -> Result<ValueVector> {
        let mut out = Vec::with_capacity(n);
        for state in 0..n {
            out.push(features.apply(state, &self.0)?);
        }
        Ok(ValueVector::full(out))
    }
}

/// The sampled normal-equation accumulators `A`, `b` and the trace `z`.
#[derive(Debug, Clone)]
pub struct LstdAccumulators {
    k: usize,
    // row-major k*k
    a: Vec<f64>,
    b: Vec<f64>,
    z: Vec<f64>,
}

impl LstdAccumulators {
    pub fn new(k: usize) -> Self {
        Self { k, a: vec![0.0; k * k], b: vec![0.0; k], z: vec![0.0; k] }
    }

    /// Fold in one step. `phi_next` is the feature row of the successor,
    /// including an absorbing successor, which needs no special casing.
    pub fn step(
        &mut self,
        phi_state: &[f64],
        phi_next: &[f64],
        reward: f64,
        gamma: f64,
        lambda: f64,
        trajectory_end: bool,
    ) {
        let k = self.k;
        debug_assert_eq!(phi_state.len(), k);
        debug_assert_eq!(phi_next.len(), k);
        let decay = gamma * lambda;
        for (z, &phi) in self.z.iter_mut().zip(phi_state) {
            *z = decay * *z + phi;
        }
        for i in 0..k {
            let zi = self.z[i];
            let row = &mut self.a[i * k..(i + 1) * k];
            for (j, slot) in row.iter_mut().enumerate() {
                *slot += zi * (phi_state[j] - gamma * phi_next[j]);
            }
            self.b[i] += zi * reward;
        }
        if trajectory_end {
            self.z.iter_mut().for_each(|z| *z = 0.0);
        }
    }

    /// Solve `A w = b` by dense LU. A singular system is reported with its
    /// effective rank so the caller can shrink k or extend sampling.
    pub fn solve(&self) -> Result<WeightVector> {
        let k = self.k;
        let a = DMatrix::from_row_slice(k, k, &self.a);
        let b = DVector::from_column_slice(&self.b);
        match a.clone().lu().solve(&b) {
            Some(w) if w.iter().all(|x| x.is_finite()) => {
                Ok(WeightVector::new(w.iter().copied().collect()))
            }
            _ => Err(Error::RankDeficient { rank: a.rank(1e-10), needed: k }),
        }
    }

    pub fn trace(&self) -> &[f64] {
        &self.z
    }
}

/// Run LSTD(lambda) over a record stream and solve for the weights.
pub fn lstd_evaluate(
    records: &[StepRecord],
    features: &FeatureMap,
    gamma: f64,
    lambda: f64,
) -> Result<WeightVector> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("record stream is empty".into()));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    let mut acc = LstdAccumulators::new(features.dim());
    for record in records {
        let phi_state = features.row(record.state)?;
        let phi_next = features.row(record.next_state)?;
        acc.step(&phi_state, &phi_next, record.reward, gamma, lambda, record.is_trajectory_end);
    }
    acc.solve()
}
