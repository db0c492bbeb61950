//! On-line TD(lambda) with accumulating eligibility traces.

use crate::error::{Error, Result};
use crate::sample::StepRecord;
use crate::value::ValueVector;

/// Step-size rule for the TD update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSchedule {
    /// Constant step size in (0, 1]. Matches the benchmark protocol but
    /// does not converge almost surely.
    Fixed(f64),
    /// `alpha_k = 1/k` over the global step count; converges on fixed
    /// streams and is used by the convergence tests.
    Harmonic,
}

impl AlphaSchedule {
    fn validate(self) -> Result<()> {
        if let AlphaSchedule::Fixed(a) = self {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::AlphaOutOfRange(a));
            }
        }
        Ok(())
    }

    fn at(self, step: u64) -> f64 {
        match self {
            AlphaSchedule::Fixed(a) => a,
            AlphaSchedule::Harmonic => 1.0 / step as f64,
        }
    }
}

/// Incremental TD(lambda) state: estimates, traces, and the last TD error.
///
/// Per record: `delta = r + gamma * v(next) - v(state)`, the trace of
/// `state` gains one, every state moves by `alpha * delta * trace`, and
/// every trace decays by `gamma * lambda`. Traces reset to zero at
/// trajectory boundaries. Estimates start at zero.
#[derive(Debug, Clone)]
pub struct TdState {
    estimates: Vec<f64>,
    visited: Vec<bool>,
    traces: Vec<f64>,
    gamma: f64,
    lambda: f64,
    schedule: AlphaSchedule,
    steps: u64,
    delta_last: f64,
    // (next_state, trajectory_id) of the previous record unless it ended
    chain: Option<(usize, u64)>,
}

impl TdState {
    pub fn new(n: usize, gamma: f64, lambda: f64, schedule: AlphaSchedule) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::GammaOutOfRange(gamma));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::LambdaOutOfRange(lambda));
        }
        schedule.validate()?;
        Ok(Self {
            estimates: vec![0.0; n],
            visited: vec![false; n],
            traces: vec![0.0; n],
            gamma,
            lambda,
            schedule,
            steps: 0,
            delta_last: 0.0,
            chain: None,
        })
    }

    /// Process one record.
    pub fn step(&mut self, record: &StepRecord) -> Result<()> {
        let n = self.estimates.len();
        if record.state >= n || record.next_state >= n {
            return Err(Error::StateOutOfRange {
                state: record.state.max(record.next_state),
                n,
            });
        }
        if let Some((expected_next, traj)) = self.chain {
            if record.trajectory_id != traj || record.state != expected_next {
                return Err(Error::MalformedStream {
                    position: self.steps as usize,
                    reason: "chain break without trajectory-end flag".into(),
                });
            }
        }
        self.steps += 1;
        let alpha = self.schedule.at(self.steps);

        let delta = record.reward + self.gamma * self.estimates[record.next_state]
            - self.estimates[record.state];
        self.delta_last = delta;
        self.traces[record.state] += 1.0;
        let decay = self.gamma * self.lambda;
        for (est, trace) in self.estimates.iter_mut().zip(self.traces.iter_mut()) {
            *est += alpha * delta * *trace;
            *trace *= decay;
            // flush vanishing traces to zero: their contribution is below
            // rounding noise and letting them decay into subnormal range
            // makes the dense update an order of magnitude slower
            if *trace < 1e-12 {
                *trace = 0.0;
            }
        }
        self.visited[record.state] = true;

        if record.is_trajectory_end {
            self.traces.iter_mut().for_each(|t| *t = 0.0);
            self.chain = None;
        } else {
            self.chain = Some((record.next_state, record.trajectory_id));
        }
        Ok(())
    }

    /// Most recent TD error.
    pub fn last_delta(&self) -> f64 {
        self.delta_last
    }

    pub fn traces(&self) -> &[f64] {
        &self.traces
    }

    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }

    pub fn into_values(self) -> ValueVector {
        ValueVector::from_parts(self.estimates, self.visited)
    }
}

/// Run TD(lambda) over a whole record stream.
pub fn td_lambda(
    records: &[StepRecord],
    n: usize,
    gamma: f64,
    lambda: f64,
    schedule: AlphaSchedule,
) -> Result<ValueVector> {
    let mut td = TdState::new(n, gamma, lambda, schedule)?;
    for record in records {
        td.step(record)?;
    }
    Ok(td.into_values())
}
