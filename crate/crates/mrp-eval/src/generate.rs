//! Process generators: explicit random instances and a lazily generated
//! process whose reachable region is a small closed subset of a huge
//! nominal state space.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::mrp::{Mrp, RewardModel, TransitionMatrix};
use crate::rng::{Draws, RngStream};
use crate::sample::{MrpSampler, SamplingStrategy};

/// Generate a random explicit process.
///
/// Every state receives `out_degree` distinct successors drawn uniformly
/// without replacement; their probabilities are independent uniform draws
/// normalized to sum to one. Reward means are uniform over `reward_range`
/// with deterministic observations. The same `(n, out_degree, stream)`
/// always produces the same process.
pub fn random_mrp(
    n: usize,
    out_degree: usize,
    reward_range: (f64, f64),
    gamma: f64,
    stream: RngStream,
) -> Result<Mrp> {
    if n == 0 {
        return Err(Error::InvalidArgument("state count must be positive".into()));
    }
    if out_degree == 0 || out_degree > n {
        return Err(Error::OutDegreeTooLarge { out_degree, n });
    }
    let mut rng = stream.rng();
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let targets = rng.distinct_indices(n, out_degree);
        let weights: Vec<f64> = (0..out_degree).map(|_| rng.uniform()).collect();
        let total: f64 = weights.iter().sum();
        let row: Vec<(usize, f64)> = if total > 0.0 {
            targets.iter().zip(&weights).map(|(&t, &w)| (t, w / total)).collect()
        } else {
            let p = 1.0 / out_degree as f64;
            targets.iter().map(|&t| (t, p)).collect()
        };
        rows.push(row);
    }
    let mean: Vec<f64> = (0..n).map(|_| rng.uniform_in(reward_range.0, reward_range.1)).collect();
    Mrp::new(TransitionMatrix::new(rows)?, RewardModel::deterministic(mean), gamma)
}

// Per-state draws are keyed as 2*state for row structure and 2*state + 1
// for the reward mean, so the two never share a sequence. The subset choice
// gets its own reserved key.
const SUBSET_KEY: u64 = u64::MAX;

fn row_key(state: usize) -> u64 {
    (state as u64) << 1
}

fn reward_key(state: usize) -> u64 {
    ((state as u64) << 1) | 1
}

/// A process over a nominal state space of size `n` in which a designated
/// subset of `m` states is closed under transitions. Rows are generated on
/// demand, deterministically from `(seed, state index)`; memory use is
/// proportional to the subset size, never to `n`.
///
/// The subset carries a cycle backbone (each member always has an edge to
/// the next member), so every member is reachable from every other and a
/// single long walk covers the whole subset. With `m == 1` the lone member
/// degenerates to an absorbing self-loop.
#[derive(Debug, Clone)]
pub struct ProceduralMrp {
    nominal_n: usize,
    out_degree: usize,
    gamma: f64,
    seed: u64,
    subset: Vec<usize>,
    members: HashSet<usize>,
}

/// Build a procedural process. Successors of reachable states always lie
/// inside the reachable subset; states outside the subset also map into it,
/// so a walk entering from anywhere stays within `m + 1` distinct states.
pub fn procedural_mrp(
    nominal_n: usize,
    reachable_size: usize,
    out_degree: usize,
    gamma: f64,
    stream: RngStream,
) -> Result<ProceduralMrp> {
    if reachable_size == 0 || reachable_size > nominal_n {
        return Err(Error::ReachableTooLarge { reachable: reachable_size, n: nominal_n });
    }
    if out_degree == 0 || out_degree > reachable_size {
        return Err(Error::OutDegreeTooLarge { out_degree, n: reachable_size });
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    let seed = stream.seed ^ stream.stream.rotate_left(32);
    let mut setup = Draws::keyed(seed, SUBSET_KEY);
    let subset = setup.distinct_indices(nominal_n, reachable_size);
    let members = subset.iter().copied().collect();
    Ok(ProceduralMrp { nominal_n, out_degree, gamma, seed, subset, members })
}

impl ProceduralMrp {
    pub fn nominal_n(&self) -> usize {
        self.nominal_n
    }

    pub fn reachable_size(&self) -> usize {
        self.subset.len()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The designated closed subset, ascending.
    pub fn reachable_states(&self) -> &[usize] {
        &self.subset
    }

    pub fn is_reachable(&self, state: usize) -> bool {
        self.members.contains(&state)
    }

    /// Materialize the row of `state`. Regenerated on every call; two
    /// samplers with the same seed return identical rows for every state.
    pub fn row(&self, state: usize) -> Vec<(usize, f64)> {
        let m = self.subset.len();
        if m == 1 && state == self.subset[0] {
            return vec![(state, 1.0)];
        }
        let mut rng = Draws::keyed(self.seed, row_key(state));
        let positions: Vec<usize> = match self.subset.binary_search(&state) {
            Ok(pos) => {
                // Reachable member: force the cycle-backbone edge, fill the
                // rest from the other subset positions.
                let backbone = (pos + 1) % m;
                let mut chosen = vec![backbone];
                for p in rng.distinct_indices(m - 1, self.out_degree - 1) {
                    chosen.push(if p < backbone { p } else { p + 1 });
                }
                chosen.sort_unstable();
                chosen
            }
            Err(_) => rng.distinct_indices(m, self.out_degree),
        };
        let weights: Vec<f64> = (0..positions.len()).map(|_| rng.uniform()).collect();
        let total: f64 = weights.iter().sum();
        positions
            .iter()
            .zip(&weights)
            .map(|(&p, &w)| (self.subset[p], if total > 0.0 { w / total } else { 1.0 / positions.len() as f64 }))
            .collect()
    }

    /// Deterministic reward mean of `state`, uniform on [0, 1).
    pub fn reward_mean(&self, state: usize) -> f64 {
        Draws::keyed(self.seed, reward_key(state)).uniform()
    }
}

impl MrpSampler for ProceduralMrp {
    fn nominal_states(&self) -> usize {
        self.nominal_n
    }

    fn draw_start(&self, rng: &mut Draws) -> usize {
        self.subset[rng.index(self.subset.len())]
    }

    fn next_state(&self, state: usize, rng: &mut Draws) -> usize {
        let row = self.row(state);
        let u = rng.uniform();
        let mut acc = 0.0;
        for &(t, p) in &row {
            acc += p;
            if u < acc {
                return t;
            }
        }
        row.last().expect("row is never empty").0
    }

    fn sample_reward(&self, state: usize, _rng: &mut Draws) -> f64 {
        self.reward_mean(state)
    }

    fn is_absorbing(&self, state: usize) -> bool {
        self.subset.len() == 1 && state == self.subset[0]
    }

    fn has_absorbing(&self) -> bool {
        self.subset.len() == 1
    }

    fn validate_strategy(&self, strategy: SamplingStrategy) -> Result<()> {
        match strategy {
            SamplingStrategy::SingleRandomWalk => Ok(()),
            SamplingStrategy::AbsorbingRestarts => {
                if self.has_absorbing() {
                    Ok(())
                } else {
                    Err(Error::StrategyMismatch(
                        "procedural process has no absorbing state".into(),
                    ))
                }
            }
        }
    }
}
