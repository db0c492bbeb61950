//! Experiment execution: one record per (configuration, repetition).
//!
//! Seeds are derived so comparisons pair up: repetition `r` always uses
//! process stream `(base_seed, 2r)` and sampling stream `(base_seed, 2r+1)`
//! regardless of the estimator, so two estimators run under the same config
//! and repetition see the identical process and sampling randomness.
//! Timing covers the estimator phase only (drawing the sample stream and
//! consuming it), never process generation or the oracle solve.

use std::time::Instant;

use mrp_eval::lsmcmi::ls_mcmi_evaluate;
use mrp_eval::lstd::lstd_evaluate;
use mrp_eval::mcmi::mcmi_evaluate;
use mrp_eval::ml::{ml_value, MlModel};
use mrp_eval::oracle::DESK_SCALE_LIMIT;
use mrp_eval::sample::{sample_stream, MrpSampler, SamplingStrategy};
use mrp_eval::td::{td_lambda, AlphaSchedule};
use mrp_eval::{
    exact_value, io, procedural_mrp, random_mrp, rel_residual_error, Error, FeatureMap, Mrp,
    ProceduralMrp, Result, RngStream, ValueVector,
};

use crate::config::{EstimatorKind, ExperimentConfig, FeatureSpec, MrpSource};

/// One experiment outcome, one CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub estimator: &'static str,
    pub n: usize,
    pub t_steps: u64,
    pub gamma: f64,
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub k: Option<usize>,
    pub m: Option<usize>,
    /// Repetition index; all streams derive from `(base_seed, seed)`.
    pub seed: u64,
    /// Absent when no oracle fits (procedural sources).
    pub rel_error: Option<f64>,
    pub wall_ms: f64,
    pub walks_completed: Option<u64>,
    pub mean_walk_length: Option<f64>,
}

enum Process {
    Explicit(Mrp),
    Procedural(ProceduralMrp),
}

impl Process {
    fn sampler(&self) -> &dyn MrpSampler {
        match self {
            Process::Explicit(m) => m,
            Process::Procedural(p) => p,
        }
    }

    fn nominal_n(&self) -> usize {
        match self {
            Process::Explicit(m) => m.n(),
            Process::Procedural(p) => p.nominal_n(),
        }
    }
}

fn build_process(config: &ExperimentConfig, stream: RngStream) -> Result<Process> {
    match &config.source {
        MrpSource::File { path } => {
            let mrp = io::read_mrp(path)?;
            let mrp = if config.gamma_override {
                Mrp::new(mrp.transitions().clone(), mrp.rewards().clone(), config.gamma)?
            } else {
                mrp
            };
            Ok(Process::Explicit(mrp))
        }
        MrpSource::Generator { n, out_degree, reward_min, reward_max } => {
            let degree = out_degree.unwrap_or(*n);
            let mrp =
                random_mrp(*n, degree, (*reward_min, *reward_max), config.gamma, stream)?;
            Ok(Process::Explicit(mrp))
        }
        MrpSource::Procedural { n, reachable, out_degree } => {
            let p = procedural_mrp(*n, *reachable, *out_degree, config.gamma, stream)?;
            Ok(Process::Procedural(p))
        }
    }
}

// Feature draws must come from a seed family disjoint from the process
// generators', or feature rows would share underlying draws with the
// transition structure of some states.
const FEATURE_SEED_TAG: u64 = 0x9e37_79b9_7f4a_7c15;

fn build_features(config: &ExperimentConfig, nominal_n: usize) -> Result<Option<FeatureMap>> {
    let Some(spec) = &config.features else {
        return Ok(None);
    };
    let map = match spec {
        FeatureSpec::Identity => FeatureMap::identity(nominal_n),
        FeatureSpec::Gaussian { k } => {
            FeatureMap::gaussian(*k, config.base_seed ^ FEATURE_SEED_TAG)
        }
        FeatureSpec::File(path) => FeatureMap::load(path)?,
    };
    Ok(Some(map))
}

fn auto_strategy(sampler: &dyn MrpSampler) -> SamplingStrategy {
    if sampler.has_absorbing() {
        SamplingStrategy::AbsorbingRestarts
    } else {
        SamplingStrategy::SingleRandomWalk
    }
}

fn distinct_states(records: &[mrp_eval::StepRecord]) -> usize {
    let mut set = std::collections::HashSet::new();
    for r in records {
        set.insert(r.state);
    }
    set.len()
}

/// Run one repetition of one configuration.
pub fn run_single(config: &ExperimentConfig, repetition: u64) -> Result<ResultRecord> {
    config.validate()?;
    if repetition >= config.reps {
        return Err(Error::InvalidArgument(format!(
            "repetition {repetition} outside 0..{}",
            config.reps
        )));
    }
    let process_stream = RngStream::new(config.base_seed, 2 * repetition);
    let sampling_stream = RngStream::new(config.base_seed, 2 * repetition + 1);

    let process = build_process(config, process_stream)?;
    let gamma = match &process {
        Process::Explicit(m) => m.gamma(),
        Process::Procedural(p) => p.gamma(),
    };
    let n = process.nominal_n();
    let features = build_features(config, n)?;

    // oracle outside the timed phase
    let truth: Option<ValueVector> = match &process {
        Process::Explicit(mrp) if mrp.n() <= DESK_SCALE_LIMIT => Some(exact_value(mrp)?),
        _ => None,
    };

    let sampler = process.sampler();
    let steps = config.steps;
    let mut record = ResultRecord {
        estimator: config.estimator.label(),
        n,
        t_steps: steps,
        gamma,
        lambda: config.estimator.uses_lambda().then_some(config.lambda),
        alpha: config.estimator.uses_alpha().then_some(config.alpha),
        k: None,
        m: None,
        seed: repetition,
        rel_error: None,
        wall_ms: 0.0,
        walks_completed: None,
        mean_walk_length: None,
    };

    // None for the least-squares estimators when no oracle exists: their
    // value function lives in feature space and a dense length-n vector
    // is only materialized to score against the oracle.
    let estimate: Option<ValueVector> = match config.estimator {
        EstimatorKind::Td => {
            let strategy = auto_strategy(sampler);
            let clock = Instant::now();
            let records = sample_stream(sampler, strategy, steps as usize, sampling_stream)?;
            let values = td_lambda(
                &records,
                n,
                gamma,
                config.lambda,
                AlphaSchedule::Fixed(config.alpha),
            )?;
            record.wall_ms = clock.elapsed().as_secs_f64() * 1e3;
            Some(values)
        }
        EstimatorKind::Ml => {
            let strategy = auto_strategy(sampler);
            let clock = Instant::now();
            let records = sample_stream(sampler, strategy, steps as usize, sampling_stream)?;
            let model = MlModel::from_stream(&records, n)?;
            let values = ml_value(&model, gamma)?;
            record.wall_ms = clock.elapsed().as_secs_f64() * 1e3;
            Some(values)
        }
        EstimatorKind::Mcmi => {
            let clock = Instant::now();
            let out = mcmi_evaluate(sampler, gamma, steps, sampling_stream)?;
            record.wall_ms = clock.elapsed().as_secs_f64() * 1e3;
            record.m = Some(out.visited.len());
            record.walks_completed = Some(out.stats.walks);
            record.mean_walk_length = Some(out.stats.mean_walk_length());
            Some(out.values)
        }
        EstimatorKind::Lstd => {
            let features = features.expect("validated");
            record.k = Some(features.dim());
            let strategy = auto_strategy(sampler);
            let clock = Instant::now();
            let records = sample_stream(sampler, strategy, steps as usize, sampling_stream)?;
            let weights = lstd_evaluate(&records, &features, gamma, config.lambda)?;
            record.wall_ms = clock.elapsed().as_secs_f64() * 1e3;
            record.m = Some(distinct_states(&records));
            if truth.is_some() { Some(weights.values_dense(&features, n)?) } else { None }
        }
        EstimatorKind::Lsmcmi => {
            let features = features.expect("validated");
            record.k = Some(features.dim());
            let clock = Instant::now();
            let out = ls_mcmi_evaluate(sampler, &features, gamma, steps, sampling_stream)?;
            record.wall_ms = clock.elapsed().as_secs_f64() * 1e3;
            record.m = Some(out.visited.len());
            record.walks_completed = Some(out.stats.walks);
            record.mean_walk_length = Some(out.stats.mean_walk_length());
            if truth.is_some() { Some(out.weights.values_dense(&features, n)?) } else { None }
        }
    };

    record.wall_ms = record.wall_ms.max(1e-6);
    if let (Some(truth), Some(estimate)) = (&truth, &estimate) {
        record.rel_error = Some(rel_residual_error(estimate, truth)?);
    }
    Ok(record)
}

/// Run the full Cartesian product of sweep values and repetitions, in
/// deterministic (sweep value, repetition) order. Configs without a sweep
/// axis run their repetitions once.
pub fn run_all(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    let mut records = Vec::new();
    match &config.sweep {
        Some(axis) => {
            for &value in &axis.values {
                let concrete = config.with_sweep_value(axis.param, value)?;
                for rep in 0..concrete.reps {
                    records.push(run_single(&concrete, rep)?);
                }
            }
        }
        None => {
            for rep in 0..config.reps {
                records.push(run_single(config, rep)?);
            }
        }
    }
    Ok(records)
}

/// As [`run_all`], but a sweep axis is mandatory.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    if config.sweep.is_none() {
        return Err(Error::InvalidArgument("config has no sweep axis".into()));
    }
    run_all(config)
}

/// Per-group means over repetitions, grouped by the swept identity
/// `(estimator, n, t_steps, gamma)` in first-appearance order.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub estimator: &'static str,
    pub n: usize,
    pub t_steps: u64,
    pub gamma: f64,
    pub runs: usize,
    pub mean_rel_error: Option<f64>,
    pub mean_wall_ms: f64,
}

pub fn summarize(records: &[ResultRecord]) -> Vec<GroupSummary> {
    let mut order: Vec<(&'static str, usize, u64, u64)> = Vec::new();
    let mut groups: std::collections::HashMap<(&'static str, usize, u64, u64), Vec<&ResultRecord>> =
        std::collections::HashMap::new();
    for r in records {
        let key = (r.estimator, r.n, r.t_steps, r.gamma.to_bits());
        if !groups.contains_key(&key) {
            order.push(key);
        }
        groups.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let members = &groups[&key];
            let errors: Vec<f64> = members.iter().filter_map(|r| r.rel_error).collect();
            GroupSummary {
                estimator: key.0,
                n: key.1,
                t_steps: key.2,
                gamma: f64::from_bits(key.3),
                runs: members.len(),
                mean_rel_error: if errors.is_empty() {
                    None
                } else {
                    Some(errors.iter().sum::<f64>() / errors.len() as f64)
                },
                mean_wall_ms: members.iter().map(|r| r.wall_ms).sum::<f64>()
                    / members.len() as f64,
            }
        })
        .collect()
}
