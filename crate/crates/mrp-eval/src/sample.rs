//! Trajectory sampling.
//!
//! All estimators consume sample data drawn from a process, either as a
//! stream of [`StepRecord`]s (temporal-difference and model-building
//! estimators) or by driving transitions directly (the walk estimators).
//! The [`MrpSampler`] trait is the common surface: an explicit [`Mrp`]
//! implements it, as does the lazily generated process in
//! [`crate::generate::ProceduralMrp`].

use crate::error::{Error, Result};
use crate::mrp::{Mrp, RewardNoise};
use crate::rng::{Draws, RngStream};

/// One observed step: the reward sampled at `state` and the successor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub state: usize,
    pub reward: f64,
    pub next_state: usize,
    pub trajectory_id: u64,
    pub is_trajectory_end: bool,
}

/// How trajectories are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingStrategy {
    /// Restart at a uniformly drawn state whenever an absorbing state is
    /// entered. Requires at least one absorbing state.
    AbsorbingRestarts,
    /// One unbroken trajectory from a uniformly drawn initial state.
    /// Requires that the walk cannot be trapped away from part of the
    /// chain (strong connectivity when no state is absorbing).
    SingleRandomWalk,
}

/// A process that can be sampled one transition at a time.
///
/// Implementations must be deterministic given the generator handle: the
/// same `(seed, stream)` always reproduces the same draws. Rewards and
/// successors are drawn separately because the walk estimators observe a
/// reward only at the state where a walk terminates.
pub trait MrpSampler {
    /// Nominal number of states (may be far larger than ever visited).
    fn nominal_states(&self) -> usize;

    /// Uniform draw over the restart support.
    fn draw_start(&self, rng: &mut Draws) -> usize;

    /// One transition out of `state`.
    fn next_state(&self, state: usize, rng: &mut Draws) -> usize;

    /// One reward observation at `state`.
    fn sample_reward(&self, state: usize, rng: &mut Draws) -> f64;

    fn is_absorbing(&self, state: usize) -> bool;

    fn has_absorbing(&self) -> bool;

    /// Check a sampling strategy against the structure of the process.
    fn validate_strategy(&self, strategy: SamplingStrategy) -> Result<()>;
}

impl MrpSampler for Mrp {
    fn nominal_states(&self) -> usize {
        self.n()
    }

    fn draw_start(&self, rng: &mut Draws) -> usize {
        rng.index(self.n())
    }

    fn next_state(&self, state: usize, rng: &mut Draws) -> usize {
        self.transitions().draw_from_row(state, rng.uniform())
    }

    fn sample_reward(&self, state: usize, rng: &mut Draws) -> f64 {
        let mean = self.rewards().mean()[state];
        match self.rewards().noise() {
            RewardNoise::Deterministic => mean,
            RewardNoise::Gaussian => mean + self.rewards().stddev()[state] * rng.normal(),
        }
    }

    fn is_absorbing(&self, state: usize) -> bool {
        self.transitions().is_absorbing(state)
    }

    fn has_absorbing(&self) -> bool {
        !self.transitions().absorbing().is_empty()
    }

    fn validate_strategy(&self, strategy: SamplingStrategy) -> Result<()> {
        let n_abs = self.transitions().absorbing().len();
        match strategy {
            SamplingStrategy::AbsorbingRestarts => {
                if n_abs == 0 {
                    return Err(Error::StrategyMismatch(
                        "absorbing restarts require at least one absorbing state".into(),
                    ));
                }
            }
            SamplingStrategy::SingleRandomWalk => {
                // A single walk is fine when nothing can trap it: either no
                // state is absorbing and the chain is strongly connected,
                // or every state is absorbing (the walk never moves).
                if n_abs == 0 {
                    if !self.transitions().strongly_connected() {
                        return Err(Error::StrategyMismatch(
                            "single walk requires a strongly connected chain".into(),
                        ));
                    }
                } else if n_abs != self.n() {
                    return Err(Error::StrategyMismatch(
                        "single walk would be trapped by an absorbing state".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Draw one `(next_state, reward)` pair out of `state`. The reward is
/// observed at `state`; the draw order is reward first, successor second.
pub fn sample_step<S: MrpSampler + ?Sized>(sampler: &S, state: usize, rng: &mut Draws) -> (usize, f64) {
    let reward = sampler.sample_reward(state, rng);
    let next = sampler.next_state(state, rng);
    (next, reward)
}

/// Emit exactly `total_steps` records under the given strategy.
///
/// Under absorbing restarts, a record whose successor is absorbing closes
/// its trajectory and the next record opens a new one at a uniformly drawn
/// state (which may itself be absorbing, giving a one-record trajectory).
/// Under the single-walk strategy all records share one trajectory id and
/// no record is flagged as an end.
pub fn sample_stream<S: MrpSampler + ?Sized>(
    sampler: &S,
    strategy: SamplingStrategy,
    total_steps: usize,
    stream: RngStream,
) -> Result<Vec<StepRecord>> {
    sampler.validate_strategy(strategy)?;
    let mut rng = stream.rng();
    let mut records = Vec::with_capacity(total_steps);
    let mut trajectory_id = 0u64;
    let mut state = usize::MAX; // forces an initial draw
    let mut need_start = true;
    while records.len() < total_steps {
        if need_start {
            state = sampler.draw_start(&mut rng);
            need_start = false;
        }
        let (next, reward) = sample_step(sampler, state, &mut rng);
        let ends = strategy == SamplingStrategy::AbsorbingRestarts && sampler.is_absorbing(next);
        records.push(StepRecord {
            state,
            reward,
            next_state: next,
            trajectory_id,
            is_trajectory_end: ends,
        });
        if ends {
            trajectory_id += 1;
            need_start = true;
        } else {
            state = next;
        }
    }
    Ok(records)
}

/// Validate the chaining invariant of a record stream: consecutive records
/// of the same trajectory connect, and trajectory changes happen only after
/// a record flagged as an end.
pub fn check_stream(records: &[StepRecord]) -> Result<()> {
    for (pos, pair) in records.windows(2).enumerate() {
        let (prev, cur) = (&pair[0], &pair[1]);
        if prev.is_trajectory_end {
            if cur.trajectory_id == prev.trajectory_id {
                return Err(Error::MalformedStream {
                    position: pos + 1,
                    reason: "trajectory id repeats after an end flag".into(),
                });
            }
        } else {
            if cur.trajectory_id != prev.trajectory_id {
                return Err(Error::MalformedStream {
                    position: pos + 1,
                    reason: "trajectory id changed without an end flag".into(),
                });
            }
            if cur.state != prev.next_state {
                return Err(Error::MalformedStream {
                    position: pos + 1,
                    reason: format!(
                        "chain break: next_state {} followed by state {}",
                        prev.next_state, cur.state
                    ),
                });
            }
        }
    }
    Ok(())
}
