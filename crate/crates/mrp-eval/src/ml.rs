//! Maximum-likelihood model building and evaluation.
//!
//! Transition and reward counts accumulate per visited state; the value
//! estimate plugs the count ratios into the exact linear system and solves
//! it directly, the classic model-based route.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sample::StepRecord;
use crate::value::ValueVector;

/// Visit, transition, and reward-sum counts over a record stream.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MlModel {
    transition_counts: Vec<HashMap<usize, u64>>,
    state_counts: Vec<u64>,
    reward_sums: Vec<f64>,
}

impl MlModel {
    pub fn new(n: usize) -> Self {
        Self {
            transition_counts: vec![HashMap::new(); n],
            state_counts: vec![0; n],
            reward_sums: vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.state_counts.len()
    }

    /// Record one observed step.
    pub fn update(&mut self, record: &StepRecord) -> Result<()> {
        let n = self.n();
        if record.state >= n || record.next_state >= n {
            return Err(Error::StateOutOfRange {
                state: record.state.max(record.next_state),
                n,
            });
        }
        *self.transition_counts[record.state].entry(record.next_state).or_insert(0) += 1;
        self.state_counts[record.state] += 1;
        self.reward_sums[record.state] += record.reward;
        Ok(())
    }

    /// Build a model from a whole stream.
    pub fn from_stream(records: &[StepRecord], n: usize) -> Result<Self> {
        let mut model = Self::new(n);
        for record in records {
            model.update(record)?;
        }
        Ok(model)
    }

    pub fn state_count(&self, state: usize) -> u64 {
        self.state_counts[state]
    }

    pub fn transition_count(&self, from: usize, to: usize) -> u64 {
        self.transition_counts[from].get(&to).copied().unwrap_or(0)
    }

    pub fn reward_sum(&self, state: usize) -> f64 {
        self.reward_sums[state]
    }

    /// Estimated transition probability, or `None` for an unvisited state.
    pub fn transition_prob(&self, from: usize, to: usize) -> Option<f64> {
        let total = self.state_counts[from];
        if total == 0 {
            return None;
        }
        Some(self.transition_count(from, to) as f64 / total as f64)
    }

    /// Estimated mean reward, or `None` for an unvisited state.
    pub fn reward_mean(&self, state: usize) -> Option<f64> {
        let total = self.state_counts[state];
        if total == 0 {
            return None;
        }
        Some(self.reward_sums[state] / total as f64)
    }

    /// Count consistency: transition counts out of each state sum to its
    /// visit count.
    pub fn counts_consistent(&self) -> bool {
        self.transition_counts
            .iter()
            .zip(&self.state_counts)
            .all(|(row, &total)| row.values().sum::<u64>() == total)
    }
}

/// Solve the estimated system `(I - gamma P_hat) v = r_hat` by dense LU.
///
/// Unvisited states get a self-loop with zero reward, which keeps the
/// system nonsingular and pins their value to zero; they are excluded from
/// the visited mask.
pub fn ml_value(model: &MlModel, gamma: f64) -> Result<ValueVector> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    let n = model.n();
    if model.state_counts.iter().all(|&c| c == 0) {
        return Err(Error::EmptyModel);
    }
    let mut a = DMatrix::<f64>::identity(n, n);
    let mut r = DVector::<f64>::zeros(n);
    for state in 0..n {
        let total = model.state_counts[state];
        if total == 0 {
            // self-loop row: (1 - gamma) on the diagonal, zero reward
            a[(state, state)] = 1.0 - gamma;
            continue;
        }
        for (&next, &count) in &model.transition_counts[state] {
            a[(state, next)] -= gamma * count as f64 / total as f64;
        }
        r[state] = model.reward_sums[state] / total as f64;
    }
    let solved = a
        .lu()
        .solve(&r)
        .ok_or_else(|| Error::SingularSystem("zero pivot in (I - gamma P_hat)".into()))?;
    let mut values = ValueVector::empty(n);
    for state in 0..n {
        if model.state_counts[state] > 0 {
            values.set(state, solved[state]);
        }
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rec(state: usize, reward: f64, next: usize) -> StepRecord {
        StepRecord { state, reward, next_state: next, trajectory_id: 0, is_trajectory_end: false }
    }

    #[test]
    fn single_update_counts() {
        let mut m = MlModel::new(2);
        m.update(&rec(0, 2.0, 1)).unwrap();
        assert_eq!(m.state_count(0), 1);
        assert_eq!(m.state_count(1), 0);
        assert_eq!(m.reward_sum(0), 2.0);
        assert_eq!(m.transition_count(0, 1), 1);
        assert!(m.counts_consistent());
    }

    #[test]
    fn probability_is_count_ratio() {
        let mut m = MlModel::new(2);
        for next in [1, 1, 1, 0] {
            m.update(&rec(0, 0.0, next)).unwrap();
        }
        assert_eq!(m.transition_prob(0, 1), Some(0.75));
        assert_eq!(m.transition_prob(0, 0), Some(0.25));
        assert_eq!(m.transition_prob(1, 0), None, "unvisited state is undefined");
    }

    #[test]
    fn deterministic_cycle_recovers_exact_values() {
        // a full pass over the 2-cycle reproduces P and r exactly, so the
        // estimate equals the exact solve: [4/3, 2/3] at gamma = 0.5
        let records = vec![rec(0, 1.0, 1), rec(1, 0.0, 0)];
        let m = MlModel::from_stream(&records, 2).unwrap();
        let v = ml_value(&m, 0.5).unwrap();
        assert_abs_diff_eq!(v.values()[0], 4.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.values()[1], 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn repeated_rewards_average() {
        let records = vec![rec(0, 1.0, 0), rec(0, 1.0, 0), rec(0, 1.0, 0)];
        let m = MlModel::from_stream(&records, 1).unwrap();
        let v = ml_value(&m, 0.8).unwrap();
        assert_abs_diff_eq!(v.values()[0], 5.0, epsilon = 1e-12);
    }

    #[test]
    fn unvisited_state_pinned_to_zero_and_unmasked() {
        let records = vec![rec(0, 1.0, 0)];
        let m = MlModel::from_stream(&records, 3).unwrap();
        let v = ml_value(&m, 0.8).unwrap();
        assert!(v.is_visited(0));
        assert!(!v.is_visited(1));
        assert!(!v.is_visited(2));
        assert_eq!(v.get(1), 0.0);
        assert_eq!(v.get(2), 0.0);
    }

    #[test]
    fn empty_model_rejected() {
        let m = MlModel::new(4);
        assert!(matches!(ml_value(&m, 0.8), Err(Error::EmptyModel)));
    }

    #[test]
    fn estimated_rows_are_stochastic() {
        let mut m = MlModel::new(3);
        for i in 0..1000u64 {
            m.update(&rec(0, 0.0, (i % 3) as usize)).unwrap();
        }
        let sum: f64 = (0..3).map(|j| m.transition_prob(0, j).unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(m.counts_consistent());
    }
}
