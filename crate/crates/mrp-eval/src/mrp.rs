//! The discounted Markov reward process model.
//!
//! A process is a row-stochastic transition matrix over `n` states, a
//! per-state reward distribution `(mean, stddev)`, and a discount factor
//! `gamma` strictly inside (0, 1). Rows are stored sparsely as
//! `(target, probability)` pairs. States whose row is a single self-loop
//! of probability one are flagged absorbing.

use crate::error::{Error, Result};

/// Row sums must match 1 within this tolerance.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Sparse row-stochastic transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
    // Per-row cumulative probabilities aligned with `rows`, for O(log d) draws.
    cdf: Vec<Vec<f64>>,
    absorbing: Vec<usize>,
    // computed once at construction; strategy validation reads it
    connected: bool,
}

impl TransitionMatrix {
    /// Validate and build from sparse rows. Entries with probability
    /// exactly zero are dropped so that the absorbing flag is structural:
    /// a state is absorbing iff its stored row is one self-loop entry.
    pub fn new(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::DimensionMismatch {
                context: "transition matrix must have at least one state",
                expected: 1,
                got: 0,
            });
        }
        let mut clean: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
        // row-sum violations are collected so the worst offender is the
        // one reported
        let mut worst_row: Option<(usize, f64)> = None;
        for (i, row) in rows.into_iter().enumerate() {
            let mut seen = vec![false; 0];
            seen.resize(n, false);
            let mut sum = 0.0;
            let mut kept: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (target, p) in row {
                if target >= n {
                    return Err(Error::TargetOutOfRange { row: i, target, n });
                }
                if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                    return Err(Error::ProbabilityOutOfRange { row: i, value: p });
                }
                if seen[target] {
                    return Err(Error::DuplicateTarget { row: i, target });
                }
                seen[target] = true;
                sum += p;
                if p > 0.0 {
                    kept.push((target, p));
                }
            }
            let gap = (sum - 1.0).abs();
            if gap > ROW_SUM_TOL && worst_row.is_none_or(|(_, s)| gap > (s - 1.0f64).abs()) {
                worst_row = Some((i, sum));
            }
            clean.push(kept);
        }
        if let Some((row, sum)) = worst_row {
            return Err(Error::RowSum { row, sum, tol: ROW_SUM_TOL });
        }
        let cdf = clean
            .iter()
            .map(|row| {
                let mut acc = 0.0;
                row.iter()
                    .map(|&(_, p)| {
                        acc += p;
                        acc
                    })
                    .collect()
            })
            .collect();
        let absorbing = clean
            .iter()
            .enumerate()
            .filter(|(i, row)| row.len() == 1 && row[0].0 == *i)
            .map(|(i, _)| i)
            .collect();
        let connected = compute_strong_connectivity(&clean);
        Ok(Self { n, rows: clean, cdf, absorbing, connected })
    }

    /// Build from a dense matrix; zero entries are dropped.
    pub fn from_dense(dense: &[Vec<f64>]) -> Result<Self> {
        let rows = dense
            .iter()
            .map(|row| row.iter().copied().enumerate().collect())
            .collect();
        Self::new(rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, state: usize) -> &[(usize, f64)] {
        &self.rows[state]
    }

    /// Dense probability of the transition `from -> to`.
    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.rows[from]
            .iter()
            .find(|&&(t, _)| t == to)
            .map_or(0.0, |&(_, p)| p)
    }

    /// States whose row is a single probability-one self-loop, ascending.
    pub fn absorbing(&self) -> &[usize] {
        &self.absorbing
    }

    pub fn is_absorbing(&self, state: usize) -> bool {
        self.absorbing.binary_search(&state).is_ok()
    }

    /// Draw a successor of `state` by inverting the row CDF at `u` in [0, 1).
    pub fn draw_from_row(&self, state: usize, u: f64) -> usize {
        let row = &self.rows[state];
        let cdf = &self.cdf[state];
        // u may land past the last cumulative value when the float row sum
        // is slightly below 1; clamp to the final entry.
        let k = cdf.partition_point(|&c| c <= u).min(row.len() - 1);
        row[k].0
    }

    /// Sparse matrix-vector product `P v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(t, p)| p * v[t]).sum())
            .collect()
    }

    /// True when the whole state graph is strongly connected. Computed at
    /// construction; used to screen the single-walk sampling strategy.
    pub fn strongly_connected(&self) -> bool {
        self.connected
    }
}

/// Everything reachable from state 0 forwards and backwards (the reverse
/// pass walks a flat CSR transpose).
fn compute_strong_connectivity(rows: &[Vec<(usize, f64)>]) -> bool {
    let n = rows.len();
    if n == 1 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1usize;
    while let Some(s) = stack.pop() {
        for &(t, _) in &rows[s] {
            if !seen[t] {
                seen[t] = true;
                count += 1;
                stack.push(t);
            }
        }
    }
    if count != n {
        return false;
    }
    let mut offsets = vec![0usize; n + 1];
    for row in rows {
        for &(t, _) in row {
            offsets[t + 1] += 1;
        }
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut sources = vec![0usize; offsets[n]];
    let mut cursor = offsets.clone();
    for (s, row) in rows.iter().enumerate() {
        for &(t, _) in row {
            sources[cursor[t]] = s;
            cursor[t] += 1;
        }
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1usize;
    while let Some(s) = stack.pop() {
        for &t in &sources[offsets[s]..offsets[s + 1]] {
            if !seen[t] {
                seen[t] = true;
                count += 1;
                stack.push(t);
            }
        }
    }
    count == n
}

/// How observed rewards relate to the per-state mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardNoise {
    /// Every observation equals the mean.
    Deterministic,
    /// Observations are mean + stddev * standard normal.
    Gaussian,
}

/// Per-state reward distribution: mean vector, stddev vector, noise kind.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardModel {
    mean: Vec<f64>,
    stddev: Vec<f64>,
    noise: RewardNoise,
}

impl RewardModel {
    pub fn new(mean: Vec<f64>, stddev: Vec<f64>, noise: RewardNoise) -> Result<Self> {
        if mean.len() != stddev.len() {
            return Err(Error::DimensionMismatch {
                context: "reward mean/stddev lengths",
                expected: mean.len(),
                got: stddev.len(),
            });
        }
        for (i, &m) in mean.iter().enumerate() {
            if !m.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite reward mean {m} at state {i}"
                )));
            }
        }
        for (i, &s) in stddev.iter().enumerate() {
            if s < 0.0 || !s.is_finite() {
                return Err(Error::NegativeStddev { state: i, value: s });
            }
            if noise == RewardNoise::Deterministic && s != 0.0 {
                return Err(Error::DeterministicNonzeroStddev(i));
            }
        }
        Ok(Self { mean, stddev, noise })
    }

    /// All-deterministic rewards with the given means.
    pub fn deterministic(mean: Vec<f64>) -> Self {
        let stddev = vec![0.0; mean.len()];
        Self { mean, stddev, noise: RewardNoise::Deterministic }
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn stddev(&self) -> &[f64] {
        &self.stddev
    }

    pub fn noise(&self) -> RewardNoise {
        self.noise
    }
}

/// A validated, immutable Markov reward process.
#[derive(Debug, Clone, PartialEq)]
pub struct Mrp {
    transitions: TransitionMatrix,
    rewards: RewardModel,
    gamma: f64,
}

impl Mrp {
    pub fn new(transitions: TransitionMatrix, rewards: RewardModel, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::GammaOutOfRange(gamma));
        }
        if transitions.n() != rewards.len() {
            return Err(Error::DimensionMismatch {
                context: "transition matrix vs reward model",
                expected: transitions.n(),
                got: rewards.len(),
            });
        }
        Ok(Self { transitions, rewards, gamma })
    }

    /// Convenience constructor from dense rows and deterministic rewards.
    pub fn from_dense(dense: &[Vec<f64>], reward_mean: Vec<f64>, gamma: f64) -> Result<Self> {
        let transitions = TransitionMatrix::from_dense(dense)?;
        let rewards = RewardModel::deterministic(reward_mean);
        Self::new(transitions, rewards, gamma)
    }

    pub fn n(&self) -> usize {
        self.transitions.n()
    }

    pub fn transitions(&self) -> &TransitionMatrix {
        &self.transitions
    }

    pub fn rewards(&self) -> &RewardModel {
        &self.rewards
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_state_self_loop_is_absorbing() {
        let mrp = Mrp::from_dense(&[vec![1.0]], vec![1.0], 0.8).unwrap();
        assert_eq!(mrp.transitions().absorbing(), &[0]);
        assert!(mrp.transitions().is_absorbing(0));
    }

    #[test]
    fn bad_row_sum_reports_row() {
        let err = TransitionMatrix::from_dense(&[vec![0.5, 0.6], vec![0.5, 0.5]]).unwrap_err();
        match err {
            Error::RowSum { row, sum, .. } => {
                assert_eq!(row, 0);
                assert!((sum - 1.1).abs() < 1e-12);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn worst_row_sum_violation_is_the_one_reported() {
        let err = TransitionMatrix::from_dense(&[
            vec![0.5, 0.6, 0.0],  // off by 0.1
            vec![0.2, 0.2, 0.2],  // off by 0.4: the worst
            vec![0.0, 0.0, 0.95], // off by 0.05
        ])
        .unwrap_err();
        match err {
            Error::RowSum { row, sum, .. } => {
                assert_eq!(row, 1);
                assert!((sum - 0.6).abs() < 1e-12);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn two_cycle_has_no_absorbing_states() {
        let mrp = Mrp::from_dense(
            &[vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![1.0, 0.0],
            0.5,
        )
        .unwrap();
        assert!(mrp.transitions().absorbing().is_empty());
        assert_eq!(mrp.transitions().prob(0, 1), 1.0);
        assert_eq!(mrp.transitions().prob(0, 0), 0.0);
    }

    #[test]
    fn gamma_must_be_in_open_unit_interval() {
        for gamma in [0.0, 1.0, -0.1, 1.5] {
            let err = Mrp::from_dense(&[vec![1.0]], vec![1.0], gamma).unwrap_err();
            assert!(matches!(err, Error::GammaOutOfRange(_)));
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let t = TransitionMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let r = RewardModel::deterministic(vec![1.0]);
        assert!(matches!(
            Mrp::new(t, r, 0.5),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_prob_entries_dropped_and_absorbing_detected() {
        let t = TransitionMatrix::new(vec![vec![(0, 1.0), (1, 0.0)], vec![(0, 1.0)]]).unwrap();
        assert_eq!(t.row(0), &[(0, 1.0)]);
        assert_eq!(t.absorbing(), &[0]);
    }

    #[test]
    fn duplicate_targets_rejected() {
        let err = TransitionMatrix::new(vec![vec![(0, 0.5), (0, 0.5)]]).unwrap_err();
        assert!(matches!(err, Error::DuplicateTarget { row: 0, target: 0 }));
    }

    #[test]
    fn target_out_of_range_rejected() {
        let err = TransitionMatrix::new(vec![vec![(3, 1.0)]]).unwrap_err();
        assert!(matches!(err, Error::TargetOutOfRange { target: 3, .. }));
    }

    #[test]
    fn draw_from_row_inverts_cdf() {
        let t = TransitionMatrix::new(vec![
            vec![(0, 0.25), (1, 0.75)],
            vec![(1, 1.0)],
        ])
        .unwrap();
        assert_eq!(t.draw_from_row(0, 0.0), 0);
        assert_eq!(t.draw_from_row(0, 0.2499), 0);
        assert_eq!(t.draw_from_row(0, 0.25), 1);
        assert_eq!(t.draw_from_row(0, 0.999), 1);
    }

    #[test]
    fn strong_connectivity() {
        let cycle = TransitionMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(cycle.strongly_connected());
        let chain = TransitionMatrix::new(vec![vec![(1, 1.0)], vec![(1, 1.0)]]).unwrap();
        assert!(!chain.strongly_connected());
    }

    #[test]
    fn deterministic_rewards_require_zero_stddev() {
        let err = RewardModel::new(vec![1.0], vec![0.5], RewardNoise::Deterministic).unwrap_err();
        assert!(matches!(err, Error::DeterministicNonzeroStddev(0)));
        assert!(RewardModel::new(vec![1.0], vec![0.5], RewardNoise::Gaussian).is_ok());
    }

    #[test]
    fn non_finite_reward_means_rejected() {
        assert!(RewardModel::new(vec![f64::NAN], vec![0.0], RewardNoise::Deterministic).is_err());
        assert!(
            RewardModel::new(vec![f64::INFINITY], vec![0.0], RewardNoise::Deterministic).is_err()
        );
    }

    #[test]
    fn model_types_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<TransitionMatrix>();
        assert_send_sync::<RewardModel>();
        assert_send_sync::<Mrp>();
        assert_send_sync::<crate::generate::ProceduralMrp>();
        assert_send_sync::<crate::inverse::SplitMatrix>();
        assert_send_sync::<crate::features::FeatureMap>();
        assert_send_sync::<crate::value::ValueVector>();
    }
}
