//! Acceptance suite: every release gate runs here, one test per criterion,
//! each printing a single `[C##] PASS/FAIL` line with the measured numbers
//! (run with `--nocapture` to see them). The criteria serialize through a
//! shared lock so the timing measurements never overlap.

// matrix entries read better as (i, j) index loops
#![allow(clippy::needless_range_loop)]

use std::process::Command;
use std::sync::Mutex;

use mrp_eval::inverse::{estimate_row, neumann_reference, run_walk, SplitMatrix};
use mrp_eval::lsmcmi::ls_mcmi_evaluate;
use mrp_eval::lstd::lstd_evaluate;
use mrp_eval::mcmi::{mcmi_evaluate, mcmi_variance_pred};
use mrp_eval::ml::{ml_value, MlModel};
use mrp_eval::oracle::{neumann_tail_bound, neumann_value, residual_max_norm};
use mrp_eval::sample::{sample_stream, SamplingStrategy};
use mrp_eval::stats::Welford;
use mrp_eval::td::{td_lambda, AlphaSchedule};
use mrp_eval::{exact_value, random_mrp, rel_residual_error, FeatureMap, Mrp, RngStream};
use mrp_eval_cli::config::{EstimatorKind, ExperimentConfig, MrpSource, SweepAxis, SweepParam};
use mrp_eval_cli::run::{run_all, summarize};

static SERIAL: Mutex<()> = Mutex::new(());

fn criterion(id: &str, check: impl FnOnce() -> Result<String, String>) {
    let _guard = SERIAL.lock().unwrap_or_else(|poisoned| poisoned.into_inner());
    match check() {
        Ok(detail) => println!("[{id}] PASS: {detail}"),
        Err(detail) => {
            println!("[{id}] FAIL: {detail}");
            panic!("[{id}] {detail}");
        }
    }
}

/// The fixed five-state instance used by the walk-statistic criteria. Its
/// inverse entries stay below 1.82, keeping every predicted variance well
/// under the universal bound.
fn five_state() -> Mrp {
    random_mrp(5, 5, (0.0, 1.0), 0.8, RngStream::new(435, 0)).unwrap()
}

fn discounted_dense(mrp: &Mrp) -> Vec<Vec<f64>> {
    let n = mrp.n();
    (0..n)
        .map(|i| (0..n).map(|j| mrp.gamma() * mrp.transitions().prob(i, j)).collect())
        .collect()
}

fn bench_config(estimator: EstimatorKind, n: usize, steps: u64, reps: u64) -> ExperimentConfig {
    ExperimentConfig {
        estimator,
        source: MrpSource::Generator { n, out_degree: None, reward_min: 0.0, reward_max: 1.0 },
        gamma: 0.8,
        gamma_override: false,
        lambda: 0.9,
        alpha: 0.5,
        steps,
        features: None,
        reps,
        base_seed: 1,
        sweep: None,
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[values.len() / 2]
}

// 1. Oracle correctness: direct-solve residual at most 1e-9 and agreement
//    with the truncated series within the analytic tail bound, over fifty
//    random instances spanning n in {5, 50, 300} and gamma in {0.5, 0.8, 0.9}.
#[test]
fn c01_oracle_correctness() {
    criterion("C01", || {
        let mut cases = 0usize;
        let mut worst_residual = 0.0f64;
        'outer: for &n in &[5usize, 50, 300] {
            for &gamma in &[0.5f64, 0.8, 0.9] {
                for seed in 0..6u64 {
                    if cases == 50 {
                        break 'outer;
                    }
                    let mrp =
                        random_mrp(n, n, (0.0, 1.0), gamma, RngStream::new(100 + seed, 0)).unwrap();
                    let v = exact_value(&mrp).unwrap();
                    let residual = residual_max_norm(&mrp, &v);
                    worst_residual = worst_residual.max(residual);
                    if residual > 1e-9 {
                        return Err(format!("residual {residual} at n={n} gamma={gamma}"));
                    }
                    let terms = if gamma < 0.85 { 60 } else { 150 };
                    let series = neumann_value(&mrp, terms);
                    let bound = neumann_tail_bound(&mrp, terms) + 1e-9;
                    for (e, s) in v.values().iter().zip(&series) {
                        if (e - s).abs() > bound {
                            return Err(format!(
                                "series gap {} above bound {bound} at n={n} gamma={gamma}",
                                (e - s).abs()
                            ));
                        }
                    }
                    cases += 1;
                }
            }
        }
        Ok(format!("{cases} instances, worst residual {worst_residual:.2e} (limit 1e-9)"))
    });
}

// 2. Walk-length law: geometric stopping at gamma = 0.8 gives mean length
//    within 2% of 4.0 and variance within 5% of 20.0 over 1e6 walks.
#[test]
fn c02_walk_length_law() {
    criterion("C02", || {
        let mrp = five_state();
        let split = SplitMatrix::discounted(mrp.transitions(), 0.8).unwrap();
        let mut rng = RngStream::new(202, 0).rng();
        let mut lengths = Welford::new();
        for i in 0..1_000_000u64 {
            lengths.add(run_walk(&split, (i % 5) as usize, &mut rng).length as f64);
        }
        let mean_gap = (lengths.mean() - 4.0).abs() / 4.0;
        let var_gap = (lengths.variance() - 20.0).abs() / 20.0;
        if mean_gap > 0.02 {
            return Err(format!("mean {} off by {:.2}%", lengths.mean(), mean_gap * 100.0));
        }
        if var_gap > 0.05 {
            return Err(format!("variance {} off by {:.2}%", lengths.variance(), var_gap * 100.0));
        }
        Ok(format!(
            "mean {:.4} (target 4.0 within 2%), variance {:.3} (target 20.0 within 5%)",
            lengths.mean(),
            lengths.variance()
        ))
    });
}

// 3. Unbiasedness: every walk-estimated inverse entry within four standard
//    errors of the series reference, 1e6 walks per row on the fixed
//    five-state instance.
#[test]
fn c03_inverse_entry_unbiasedness() {
    criterion("C03", || {
        let mrp = five_state();
        let split = SplitMatrix::discounted(mrp.transitions(), 0.8).unwrap();
        let truth = neumann_reference(&discounted_dense(&mrp), 1e-12).unwrap();
        let walks = 1_000_000u64;
        let mut worst_z = 0.0f64;
        for i in 0..5 {
            let mut rng = RngStream::new(203, i as u64).rng();
            let row = estimate_row(&split, i, walks, &mut rng);
            for j in 0..5 {
                let se = (mcmi_variance_pred(truth[i][j], 0.8).unwrap() / walks as f64).sqrt();
                let z = (row[j] - truth[i][j]).abs() / se;
                worst_z = worst_z.max(z);
                if z > 4.0 {
                    return Err(format!(
                        "entry ({i},{j}): {} vs {} is {z:.2} standard errors",
                        row[j], truth[i][j]
                    ));
                }
            }
        }
        Ok(format!("25 entries x 1e6 walks, worst deviation {worst_z:.2} of 4 allowed SEs"))
    });
}

// 4. Variance law: per-entry walk-statistic variance within 5% of the
//    closed-form prediction and never above 1/(4(1-gamma)^2) = 6.25.
#[test]
fn c04_walk_statistic_variance() {
    criterion("C04", || {
        let mrp = five_state();
        let split = SplitMatrix::discounted(mrp.transitions(), 0.8).unwrap();
        let truth = neumann_reference(&discounted_dense(&mrp), 1e-12).unwrap();
        let walks = 1_000_000u64;
        let bound = 6.25;
        let mut worst_gap = 0.0f64;
        let mut largest = 0.0f64;
        for i in 0..5 {
            let mut rng = RngStream::new(204, i as u64).rng();
            let mut stats = [Welford::new(); 5];
            for _ in 0..walks {
                let outcome = run_walk(&split, i, &mut rng);
                for (j, w) in stats.iter_mut().enumerate() {
                    w.add(if outcome.terminal == j { outcome.weight } else { 0.0 });
                }
            }
            for j in 0..5 {
                let predicted = mcmi_variance_pred(truth[i][j], 0.8).unwrap();
                let observed = stats[j].variance();
                let gap = (observed - predicted).abs() / predicted;
                worst_gap = worst_gap.max(gap);
                largest = largest.max(observed);
                if gap > 0.05 {
                    return Err(format!(
                        "entry ({i},{j}): observed {observed:.4} vs predicted {predicted:.4} ({:.2}%)",
                        gap * 100.0
                    ));
                }
                if observed > bound || predicted > bound {
                    return Err(format!(
                        "entry ({i},{j}): variance {observed:.4} above the bound {bound}"
                    ));
                }
            }
        }
        Ok(format!(
            "worst prediction gap {:.2}% (5% allowed), largest variance {largest:.3} <= {bound}",
            worst_gap * 100.0
        ))
    });
}

// 5. Exact row-sum identity: in the discounted specialization every
//    estimated inverse row sums to 1/(1-gamma) within 1e-12, any seed and
//    any walk count.
#[test]
fn c05_row_sum_identity() {
    criterion("C05", || {
        let mrp = random_mrp(6, 6, (0.0, 1.0), 0.8, RngStream::new(205, 0)).unwrap();
        let split = SplitMatrix::discounted(mrp.transitions(), 0.8).unwrap();
        let target = 1.0 / (1.0 - 0.8);
        let mut worst = 0.0f64;
        for seed in 0..10u64 {
            for &walks in &[1u64, 37, 1000, 50_000] {
                let mut rng = RngStream::new(seed, 3).rng();
                let row = estimate_row(&split, (seed % 6) as usize, walks, &mut rng);
                let gap = (row.iter().sum::<f64>() - target).abs();
                worst = worst.max(gap);
                if gap > 1e-12 {
                    return Err(format!("seed {seed} walks {walks}: row sum off by {gap:.2e}"));
                }
            }
        }
        Ok(format!("40 runs, worst row-sum deviation {worst:.2e} (limit 1e-12)"))
    });
}

// 6. Error vs budget and discount: walk-estimator error strictly drops
//    from T = 2000 to T = 20000 and strictly rises across
//    gamma in {0.5, 0.8, 0.9} at T = 20000 (20-seed means, paired).
#[test]
fn c06_error_monotonicity() {
    criterion("C06", || {
        let mut at_20k = Vec::new();
        for &gamma in &[0.5f64, 0.8, 0.9] {
            let mut means = Vec::new();
            for &steps in &[2000u64, 20_000] {
                let mut total = 0.0;
                for rep in 0..20u64 {
                    let mrp = random_mrp(300, 300, (0.0, 1.0), gamma, RngStream::new(1, 2 * rep))
                        .unwrap();
                    let truth = exact_value(&mrp).unwrap();
                    let out =
                        mcmi_evaluate(&mrp, gamma, steps, RngStream::new(1, 2 * rep + 1)).unwrap();
                    total += rel_residual_error(&out.values, &truth).unwrap();
                }
                means.push(total / 20.0);
            }
            if means[1] >= means[0] {
                return Err(format!(
                    "gamma {gamma}: error did not drop with T ({} -> {})",
                    means[0], means[1]
                ));
            }
            at_20k.push((gamma, means[1]));
        }
        if !(at_20k[0].1 < at_20k[1].1 && at_20k[1].1 < at_20k[2].1) {
            return Err(format!("errors not increasing in gamma: {at_20k:?}"));
        }
        Ok(format!(
            "T-drop holds; at T=20000 errors rise with gamma: {:.4} < {:.4} < {:.4}",
            at_20k[0].1, at_20k[1].1, at_20k[2].1
        ))
    });
}

// 7. Estimator ordering at N = 300, T = 20000, gamma = 0.8, lambda = 0.9,
//    alpha = 0.5 over 20 paired seeds: walk estimator and the
//    count-ratio model both beat TD, and the walk estimator stays within a
//    factor of two of the count-ratio model.
#[test]
fn c07_estimator_ordering() {
    criterion("C07", || {
        let mut means = std::collections::HashMap::new();
        for kind in [EstimatorKind::Td, EstimatorKind::Ml, EstimatorKind::Mcmi] {
            let config = bench_config(kind, 300, 20_000, 20);
            let records = run_all(&config).unwrap();
            let summary = summarize(&records);
            means.insert(kind.label(), summary[0].mean_rel_error.unwrap());
        }
        let (td, ml, mcmi) = (means["td"], means["ml"], means["mcmi"]);
        let detail =
            format!("mean rel errors: td {td:.4}, ml {ml:.4}, mcmi {mcmi:.4} (ratio mcmi/ml {:.2})", mcmi / ml);
        if mcmi >= td {
            return Err(format!("walk estimator did not beat TD: {detail}"));
        }
        if ml >= td {
            return Err(format!("count-ratio model did not beat TD: {detail}"));
        }
        if mcmi > 2.0 * ml {
            return Err(format!("walk estimator outside factor 2 of the count-ratio model: {detail}"));
        }
        Ok(detail)
    });
}

// 8. Runtime growth in the state count at T = 20000: TD and the walk
//    estimator grow at most linearly (time(800)/time(100) <= 12) while the
//    count-ratio model's dense solve grows faster than both.
#[test]
fn c08_runtime_growth_with_states() {
    criterion("C08", || {
        let sizes = [100usize, 200, 400, 800];
        let mut ratios = std::collections::HashMap::new();
        for kind in [EstimatorKind::Td, EstimatorKind::Mcmi, EstimatorKind::Ml] {
            let mut config = bench_config(kind, 100, 20_000, 7);
            config.base_seed = 3;
            config.sweep = Some(SweepAxis {
                param: SweepParam::N,
                values: sizes.iter().map(|&n| n as f64).collect(),
            });
            let records = run_all(&config).unwrap();
            let mut medians = Vec::new();
            for &n in &sizes {
                let mut walls: Vec<f64> =
                    records.iter().filter(|r| r.n == n).map(|r| r.wall_ms).collect();
                medians.push(median(&mut walls));
            }
            ratios.insert(kind.label(), medians[3] / medians[0]);
        }
        let (td, mcmi, ml) = (ratios["td"], ratios["mcmi"], ratios["ml"]);
        let detail = format!("time(800)/time(100): td {td:.1}, mcmi {mcmi:.1}, ml {ml:.1}");
        if td > 12.0 {
            return Err(format!("TD grows superlinearly: {detail}"));
        }
        if mcmi > 12.0 {
            return Err(format!("walk estimator grows superlinearly: {detail}"));
        }
        if ml <= td || ml <= mcmi {
            return Err(format!("dense solve did not dominate growth: {detail}"));
        }
        Ok(detail)
    });
}

// 9. Nominal-size independence: the least-squares estimators at
//    T = 20000, k = m = 100 vary by less than 25% in wall time as the
//    nominal state count sweeps 1e3, 1e4, 1e5.
#[test]
fn c09_nominal_size_independence() {
    criterion("C09", || {
        let mut spreads = Vec::new();
        for kind in [EstimatorKind::Lstd, EstimatorKind::Lsmcmi] {
            let config = ExperimentConfig {
                estimator: kind,
                source: MrpSource::Procedural { n: 1000, reachable: 100, out_degree: 10 },
                gamma: 0.8,
                gamma_override: false,
                lambda: 0.9,
                alpha: 0.5,
                steps: 20_000,
                features: Some(mrp_eval_cli::config::FeatureSpec::Gaussian { k: 100 }),
                reps: 7,
                base_seed: 3,
                sweep: Some(SweepAxis {
                    param: SweepParam::ProceduralN,
                    values: vec![1e3, 1e4, 1e5],
                }),
            };
            // first pass warms caches and lets the clock governor settle;
            // only the second pass is measured
            run_all(&config).unwrap();
            let records = run_all(&config).unwrap();
            let mut medians = Vec::new();
            for &n in &[1_000usize, 10_000, 100_000] {
                let mut walls: Vec<f64> =
                    records.iter().filter(|r| r.n == n).map(|r| r.wall_ms).collect();
                medians.push(median(&mut walls));
            }
            let max = medians.iter().cloned().fold(f64::MIN, f64::max);
            let min = medians.iter().cloned().fold(f64::MAX, f64::min);
            spreads.push((kind.label(), max / min, medians));
        }
        for (label, spread, medians) in &spreads {
            if *spread > 1.25 {
                return Err(format!(
                    "{label} wall time varies {:.1}% across nominal sizes ({medians:?} ms)",
                    (spread - 1.0) * 100.0
                ));
            }
        }
        Ok(spreads
            .iter()
            .map(|(label, spread, _)| format!("{label} varies {:.1}%", (spread - 1.0) * 100.0))
            .collect::<Vec<_>>()
            .join(", "))
    });
}

// 10. Identity-feature equivalences: the least-squares walk estimator with
//     one-hot features reproduces the plain walk estimates bit for bit, and
//     LSTD(0) with one-hot features matches the count-ratio model to 1e-8.
#[test]
fn c10_identity_feature_equivalences() {
    criterion("C10", || {
        // bit-for-bit against the plain walk estimator
        let mrp = random_mrp(20, 20, (0.0, 1.0), 0.8, RngStream::new(210, 0)).unwrap();
        let stream = RngStream::new(210, 1);
        let plain = mcmi_evaluate(&mrp, 0.8, 4000, stream).unwrap();
        let features = FeatureMap::identity(20);
        let ls = ls_mcmi_evaluate(&mrp, &features, 0.8, 4000, stream).unwrap();
        if ls.visited.len() != 20 {
            return Err(format!("only {} of 20 states visited", ls.visited.len()));
        }
        for &state in ls.visited.states() {
            let a = ls.weights.value(&features, state).unwrap();
            let b = plain.values.get(state);
            if a.to_bits() != b.to_bits() {
                return Err(format!("state {state}: {a} != {b} (bitwise)"));
            }
        }

        // LSTD(0, identity) against the count-ratio model
        let small = random_mrp(5, 5, (0.0, 1.0), 0.8, RngStream::new(211, 0)).unwrap();
        let records =
            sample_stream(&small, SamplingStrategy::SingleRandomWalk, 2000, RngStream::new(211, 1))
                .unwrap();
        let ml = ml_value(&MlModel::from_stream(&records, 5).unwrap(), 0.8).unwrap();
        let id = FeatureMap::identity(5);
        let w = lstd_evaluate(&records, &id, 0.8, 0.0).unwrap();
        let mut worst = 0.0f64;
        for state in 0..5 {
            let gap = (w.as_slice()[state] - ml.get(state)).abs();
            worst = worst.max(gap);
            if gap > 1e-8 {
                return Err(format!("state {state}: lstd-ml gap {gap:.2e}"));
            }
        }
        Ok(format!(
            "walk estimates identical bitwise on 20 states; lstd-ml gap at most {worst:.1e} (limit 1e-8)"
        ))
    });
}

// 11. Consistency and convergence: the count-ratio model's error decreases
//     across T in {1e3, 1e4, 1e5} (20-seed means, 10-state chain), and TD
//     with harmonic steps reaches |estimate - 5.0| < 0.05 on the one-state
//     chain by T = 1e5.
#[test]
fn c11_consistency_and_convergence() {
    criterion("C11", || {
        let mut means = Vec::new();
        for &steps in &[1_000usize, 10_000, 100_000] {
            let mut total = 0.0;
            for rep in 0..20u64 {
                let mrp =
                    random_mrp(10, 10, (0.0, 1.0), 0.8, RngStream::new(211, 2 * rep)).unwrap();
                let truth = exact_value(&mrp).unwrap();
                let records = sample_stream(
                    &mrp,
                    SamplingStrategy::SingleRandomWalk,
                    steps,
                    RngStream::new(211, 2 * rep + 1),
                )
                .unwrap();
                let est = ml_value(&MlModel::from_stream(&records, 10).unwrap(), 0.8).unwrap();
                total += rel_residual_error(&est, &truth).unwrap();
            }
            means.push(total / 20.0);
        }
        if !(means[1] < means[0] && means[2] < means[1]) {
            return Err(format!("count-ratio errors not decreasing: {means:?}"));
        }

        let single = Mrp::from_dense(&[vec![1.0]], vec![1.0], 0.8).unwrap();
        let records = sample_stream(
            &single,
            SamplingStrategy::SingleRandomWalk,
            100_000,
            RngStream::new(212, 0),
        )
        .unwrap();
        let td = td_lambda(&records, 1, 0.8, 0.9, AlphaSchedule::Harmonic).unwrap();
        let gap = (td.get(0) - 5.0).abs();
        if gap >= 0.05 {
            return Err(format!("TD estimate {} misses 5.0 by {gap}", td.get(0)));
        }
        Ok(format!(
            "count-ratio errors {:.4} > {:.4} > {:.4}; TD gap {gap:.4} (limit 0.05)",
            means[0], means[1], means[2]
        ))
    });
}

// 12. Determinism: repeating an eval or bench invocation with identical
//     flags yields byte-identical CSV apart from the wall_ms column.
#[test]
fn c12_cli_determinism() {
    criterion("C12", || {
        fn strip_wall_ms(csv: &str) -> String {
            csv.lines()
                .map(|line| {
                    line.split(',')
                        .enumerate()
                        .filter(|(i, _)| *i != 10)
                        .map(|(_, c)| c)
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect::<Vec<_>>()
                .join("\n")
        }
        let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
        let bin = env!("CARGO_BIN_EXE_mrpeval");
        let mrp_path = dir.path().join("mrp.json");
        let status = Command::new(bin)
            .args(["gen", "--n", "15", "--seed", "5", "--out", mrp_path.to_str().unwrap()])
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err("gen failed".into());
        }

        let mut payloads = Vec::new();
        for name in ["a.csv", "b.csv"] {
            let out = dir.path().join(name);
            let status = Command::new(bin)
                .args([
                    "eval", "--estimator", "mcmi", "--mrp", mrp_path.to_str().unwrap(),
                    "--steps", "2000", "--seed", "9", "--reps", "3",
                    "--out", out.to_str().unwrap(),
                ])
                .status()
                .map_err(|e| e.to_string())?;
            if !status.success() {
                return Err("eval failed".into());
            }
            payloads.push(strip_wall_ms(&std::fs::read_to_string(&out).map_err(|e| e.to_string())?));
        }
        if payloads[0] != payloads[1] {
            return Err("eval reruns differ outside wall_ms".into());
        }

        let config_path = dir.path().join("bench.json");
        std::fs::write(
            &config_path,
            r#"{"estimator":"td","source":{"generator":{"n":12}},"steps":800,"reps":2,
                "base_seed":4,"sweep":{"param":"steps","values":[400,800]}}"#,
        )
        .map_err(|e| e.to_string())?;
        let mut payloads = Vec::new();
        for name in ["c.csv", "d.csv"] {
            let out = dir.path().join(name);
            let status = Command::new(bin)
                .args([
                    "bench", "--config", config_path.to_str().unwrap(),
                    "--out", out.to_str().unwrap(),
                ])
                .status()
                .map_err(|e| e.to_string())?;
            if !status.success() {
                return Err("bench failed".into());
            }
            payloads.push(strip_wall_ms(&std::fs::read_to_string(&out).map_err(|e| e.to_string())?));
        }
        if payloads[0] != payloads[1] {
            return Err("bench reruns differ outside wall_ms".into());
        }
        Ok("eval and bench reruns byte-identical apart from wall_ms".into())
    });
}
