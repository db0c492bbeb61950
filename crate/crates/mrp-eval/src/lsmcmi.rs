//! Least-squares Monte Carlo matrix inversion.
//!
//! Phase one runs the plain walk engine, so value estimates exist only for
//! the `m` states actually visited and storage stays proportional to `m`.
//! Phase two restricts the feature map to those rows and fits weights by
//! least squares: `min_w ||Phi_M w - v_M||_2`. With a square invertible
//! feature matrix the fit is exact interpolation; with `k < m` it is the
//! natural generalization of applying the feature-matrix inverse.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::features::FeatureMap;
use crate::lstd::WeightVector;
use crate::mcmi::{McmiRun, McmiStats};
use crate::rng::RngStream;
use crate::sample::MrpSampler;
use crate::visited::VisitedSet;

/// A least-squares fit: the weights and the per-row residual `Phi w - v`.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub weights: WeightVector,
    pub residual: Vec<f64>,
}

/// Solve `min_w ||Phi w - v||_2` through the normal equations
/// `(Phi^T Phi) w = Phi^T v` by dense LU. Requires at least as many rows
/// as columns and full column rank.
pub fn fit_weights(phi_rows: &[Vec<f64>], targets: &[f64]) -> Result<FitOutcome> {
    fit_weights_with(phi_rows, targets, None)
}

/// As [`fit_weights`], with optional per-row nonnegative weights applied as
/// a diagonal scaling of the normal equations.
pub fn fit_weights_with(
    phi_rows: &[Vec<f64>],
    targets: &[f64],
    row_weights: Option<&[f64]>,
) -> Result<FitOutcome> {
    let m = phi_rows.len();
    if m == 0 || m != targets.len() {
        return Err(Error::DimensionMismatch {
            context: "feature rows vs targets",
            expected: m.max(1),
            got: targets.len(),
        });
    }
    let k = phi_rows[0].len();
    if phi_rows.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidArgument("ragged feature rows".into()));
    }
    if m < k {
        return Err(Error::RankDeficient { rank: m, needed: k });
    }
    if let Some(w) = row_weights {
        if w.len() != m {
            return Err(Error::DimensionMismatch {
                context: "row weights vs rows",
                expected: m,
                got: w.len(),
            });
        }
    }
    let phi = DMatrix::from_fn(m, k, |i, j| phi_rows[i][j]);
    let v = DVector::from_column_slice(targets);
    let (gram, rhs) = match row_weights {
        None => (phi.transpose() * &phi, phi.transpose() * &v),
        Some(w) => {
            let d = DMatrix::from_diagonal(&DVector::from_column_slice(w));
            (phi.transpose() * &d * &phi, phi.transpose() * &d * &v)
        }
    };
    let weights = match gram.clone().lu().solve(&rhs) {
        Some(w) if w.iter().all(|x| x.is_finite()) => w,
        _ => {
            return Err(Error::RankDeficient { rank: phi.rank(1e-10), needed: k });
        }
    };
    let residual = (&phi * &weights) - &v;
    Ok(FitOutcome {
        weights: WeightVector::new(weights.iter().copied().collect()),
        residual: residual.iter().copied().collect(),
    })
}

/// Options for the fit phase.
#[derive(Debug, Clone, Copy)]
pub struct LsMcmiOptions {
    /// Down-weight states with few sub-walk starts: each fitted row gets
    /// weight `min(s, floor) / floor`. Off by default, matching the plain
    /// formulation.
    pub weight_by_starts: bool,
    pub start_floor: u64,
}

impl Default for LsMcmiOptions {
    fn default() -> Self {
        Self { weight_by_starts: false, start_floor: 5 }
    }
}

/// Result of a least-squares walk evaluation.
#[derive(Debug, Clone)]
pub struct LsMcmiOutcome {
    pub weights: WeightVector,
    /// Distinct states visited during phase one, in first-visit order.
    pub visited: VisitedSet,
    /// Walk estimates for the visited states, aligned with `visited`.
    pub estimates: Vec<f64>,
    pub stats: McmiStats,
}

/// Run the walk engine for `total_steps` state visits, then fit feature
/// weights to the visited-state estimates.
pub fn ls_mcmi_evaluate<S: MrpSampler + ?Sized>(
    sampler: &S,
    features: &FeatureMap,
    gamma: f64,
    total_steps: u64,
    stream: RngStream,
) -> Result<LsMcmiOutcome> {
    ls_mcmi_evaluate_with(sampler, features, gamma, total_steps, stream, LsMcmiOptions::default())
}

/// As [`ls_mcmi_evaluate`] with explicit fit options.
pub fn ls_mcmi_evaluate_with<S: MrpSampler + ?Sized>(
    sampler: &S,
    features: &FeatureMap,
    gamma: f64,
    total_steps: u64,
    stream: RngStream,
    options: LsMcmiOptions,
) -> Result<LsMcmiOutcome> {
    if total_steps == 0 {
        return Err(Error::InvalidArgument("sampling budget must be positive".into()));
    }
    let mut run = McmiRun::new(sampler, gamma)?;
    let mut rng = stream.rng();
    run.run(total_steps, &mut rng);
    let estimates = run.position_estimates();
    let visited = run.visited().clone();
    let stats = run.stats();

    let mut phi_rows = Vec::with_capacity(visited.len());
    for &state in visited.states() {
        phi_rows.push(features.row(state)?);
    }
    let row_weights: Option<Vec<f64>> = options.weight_by_starts.then(|| {
        let floor = options.start_floor.max(1) as f64;
        run.accumulators().s().iter().map(|&s| (s as f64).min(floor) / floor).collect()
    });
    let fit = fit_weights_with(&phi_rows, &estimates, row_weights.as_deref())?;
    Ok(LsMcmiOutcome { weights: fit.weights, visited, estimates, stats })
}
