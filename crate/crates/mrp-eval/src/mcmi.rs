//! Value estimation by Monte Carlo matrix inversion.
//!
//! Walks stop with probability `1 - gamma` at every step, so a walk from
//! state `n` terminates at `k` with probability proportional to the
//! `(n, k)` entry of `(I - gamma P)^{-1}`; the reward observed at the
//! terminal state is therefore an unbiased (up to the ratio) sample of
//! `(1 - gamma) v(n)`. Every visit inside a walk is the start of a fresh
//! sub-walk (the stopping draws are memoryless), so one walk yields one
//! estimate per visit: the visit counter `t` accumulates into the start
//! counter `s` and into the reward credit `v` at each walk boundary, and
//! the estimate for state `n` is `v(n) / ((1 - gamma) s(n))`.
//!
//! The sampling budget counts state visits, the unit in which every walk
//! makes progress (a walk absorbed at its first state consumes one visit
//! but no transition). Accumulators are keyed by a [`VisitedSet`], so
//! storage follows the states actually touched, never the nominal count.
//!
//! Entering an absorbing state terminates the walk immediately: its
//! terminal reward would be observed there no matter how long the walk
//! lingered, so cutting it short changes nothing statistically.

use crate::error::{Error, Result};
use crate::rng::{Draws, RngStream};
use crate::sample::MrpSampler;
use crate::stats::KahanSum;
use crate::value::ValueVector;
use crate::visited::VisitedSet;

/// The per-state walk counters: `t` counts visits within the current walk,
/// `s` accumulates sub-walk starts, `v` accumulates terminal-reward credit.
/// All three are keyed by dense [`VisitedSet`] positions.
#[derive(Debug, Clone, Default)]
pub struct WalkAccumulators {
    t: Vec<u64>,
    s: Vec<u64>,
    v: Vec<f64>,
}

impl WalkAccumulators {
    /// `t` for every visited position; all zeros between walks.
    pub fn t(&self) -> &[u64] {
        &self.t
    }

    /// Cumulative sub-walk starts per visited position.
    pub fn s(&self) -> &[u64] {
        &self.s
    }

    /// Cumulative terminal-reward credit per visited position.
    pub fn v(&self) -> &[f64] {
        &self.v
    }
}

/// Outcome of one walk, reported for diagnostics and tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkSummary {
    pub terminal: usize,
    pub terminal_reward: f64,
    /// Visits consumed by this walk (including the terminal state).
    pub visits: u64,
    /// Transitions taken.
    pub transitions: u64,
}

/// Aggregate walk statistics of a finished run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McmiStats {
    pub walks: u64,
    pub visits: u64,
    pub transitions: u64,
}

impl McmiStats {
    /// Mean transitions per walk.
    pub fn mean_walk_length(&self) -> f64 {
        if self.walks == 0 {
            return 0.0;
        }
        self.transitions as f64 / self.walks as f64
    }
}

/// The walk engine. Drives geometric-stopping walks over any sampler and
/// maintains the visit/start/credit accumulators.
#[derive(Debug)]
pub struct McmiRun<'a, S: MrpSampler + ?Sized> {
    sampler: &'a S,
    gamma: f64,
    visited: VisitedSet,
    acc: WalkAccumulators,
    touched: Vec<usize>,
    stats: McmiStats,
}

impl<'a, S: MrpSampler + ?Sized> McmiRun<'a, S> {
    pub fn new(sampler: &'a S, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::GammaOutOfRange(gamma));
        }
        Ok(Self {
            sampler,
            gamma,
            visited: VisitedSet::new(),
            acc: WalkAccumulators::default(),
            touched: Vec::new(),
            stats: McmiStats { walks: 0, visits: 0, transitions: 0 },
        })
    }

    fn visit(&mut self, state: usize) {
        let pos = self.visited.insert(state);
        if pos == self.acc.t.len() {
            self.acc.t.push(0);
            self.acc.s.push(0);
            self.acc.v.push(0.0);
        }
        if self.acc.t[pos] == 0 {
            self.touched.push(pos);
        }
        self.acc.t[pos] += 1;
        self.stats.visits += 1;
    }

    /// Run one walk from `start`; credits the accumulators at the boundary.
    pub fn walk_from(&mut self, start: usize, rng: &mut Draws) -> WalkSummary {
        let mut state = start;
        let mut visits = 0u64;
        let mut transitions = 0u64;
        loop {
            self.visit(state);
            visits += 1;
            if self.sampler.is_absorbing(state) {
                break;
            }
            let x = rng.uniform();
            if x <= self.gamma {
                state = self.sampler.next_state(state, rng);
                transitions += 1;
            } else {
                break;
            }
        }
        let terminal_reward = self.sampler.sample_reward(state, rng);
        for &pos in &self.touched {
            let t = self.acc.t[pos];
            self.acc.s[pos] += t;
            self.acc.v[pos] += terminal_reward * t as f64;
            self.acc.t[pos] = 0;
        }
        self.touched.clear();
        self.stats.walks += 1;
        self.stats.transitions += transitions;
        WalkSummary { terminal: state, terminal_reward, visits, transitions }
    }

    /// One walk from a uniformly drawn start state.
    pub fn walk(&mut self, rng: &mut Draws) -> WalkSummary {
        let start = self.sampler.draw_start(rng);
        self.walk_from(start, rng)
    }

    /// Run whole walks until at least `total_visits` state visits have been
    /// consumed. The final walk always completes, so the budget may be
    /// exceeded by one walk's length.
    pub fn run(&mut self, total_visits: u64, rng: &mut Draws) {
        while self.stats.visits < total_visits {
            self.walk(rng);
        }
    }

    pub fn visited(&self) -> &VisitedSet {
        &self.visited
    }

    pub fn accumulators(&self) -> &WalkAccumulators {
        &self.acc
    }

    pub fn stats(&self) -> McmiStats {
        self.stats
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Value estimates per visited position: `v / ((1 - gamma) s)`.
    /// Defined for every visited state because each visit belongs to some
    /// completed walk. Evaluated as `(v / s) / (1 - gamma)` so that the
    /// mean terminal reward divides out exactly when all rewards agree.
    pub fn position_estimates(&self) -> Vec<f64> {
        self.acc
            .s
            .iter()
            .zip(&self.acc.v)
            .map(|(&s, &v)| v / s as f64 / (1.0 - self.gamma))
            .collect()
    }
}

/// Result of a full MCMI evaluation.
#[derive(Debug, Clone)]
pub struct McmiOutcome {
    pub values: ValueVector,
    pub stats: McmiStats,
    /// Distinct states touched, in first-visit order.
    pub visited: VisitedSet,
}

/// Estimate the value function by terminating random walks, spending a
/// budget of `total_steps` state visits. Walks start at uniformly drawn
/// states (over the sampler's restart support).
pub fn mcmi_evaluate<S: MrpSampler + ?Sized>(
    sampler: &S,
    gamma: f64,
    total_steps: u64,
    stream: RngStream,
) -> Result<McmiOutcome> {
    if total_steps == 0 {
        return Err(Error::InvalidArgument("sampling budget must be positive".into()));
    }
    let mut run = McmiRun::new(sampler, gamma)?;
    let mut rng = stream.rng();
    run.run(total_steps, &mut rng);
    let estimates = run.position_estimates();
    let mut values = ValueVector::empty(sampler.nominal_states());
    for (&state, &est) in run.visited().states().iter().zip(&estimates) {
        values.set(state, est);
    }
    Ok(McmiOutcome { values, stats: run.stats(), visited: run.visited().clone() })
}

/// Estimate the value of a single state without touching any other state's
/// estimate: the mean terminal reward over `num_walks` walks from `state`,
/// divided by `1 - gamma`.
pub fn mcmi_single_state<S: MrpSampler + ?Sized>(
    sampler: &S,
    state: usize,
    gamma: f64,
    num_walks: u64,
    stream: RngStream,
) -> Result<f64> {
    if num_walks == 0 {
        return Err(Error::InvalidArgument("walk count must be positive".into()));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    let mut rng = stream.rng();
    let mut acc = KahanSum::new();
    for _ in 0..num_walks {
        let mut current = state;
        loop {
            if sampler.is_absorbing(current) {
                break;
            }
            let x = rng.uniform();
            if x <= gamma {
                current = sampler.next_state(current, &mut rng);
            } else {
                break;
            }
        }
        acc.add(sampler.sample_reward(current, &mut rng));
    }
    Ok(acc.value() / num_walks as f64 / (1.0 - gamma))
}

/// Predicted variance of the per-walk statistic for an inverse entry of
/// value `inverse_entry`: `inverse_entry / (1 - gamma) - inverse_entry^2`.
/// The entry must lie in `[0, 1/(1 - gamma)]`.
pub fn mcmi_variance_pred(inverse_entry: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    let max = 1.0 / (1.0 - gamma);
    if !(0.0..=max).contains(&inverse_entry) {
        return Err(Error::EntryOutOfRange { value: inverse_entry, max });
    }
    Ok(inverse_entry / (1.0 - gamma) - inverse_entry * inverse_entry)
}
