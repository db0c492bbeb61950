//! Random-walk estimation of `(I - M)^{-1}`.
//!
//! The matrix is split as `M = P' * V` (elementwise), where `P'` is
//! substochastic: each row sums to `p_i < 1`, leaving a stop probability
//! of `1 - p_i` at every step. A walk started at `i` moves through `P'`,
//! multiplying the running product by the matching `V` entries, and on
//! stopping at `k` divides by `1 - p_k`. The expectation of that statistic,
//! restricted to walks terminating at `j`, is exactly `((I - M)^{-1})_{ij}`
//! whenever the series `sum_k M^k` converges.
//!
//! A truncated-series evaluation ([`neumann_reference`]) serves as the
//! deterministic cross-check for the walk estimator.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mrp::TransitionMatrix;
use crate::rng::Draws;
use crate::stats::KahanSum;

/// A splitting `M = P' * V`: substochastic walk rows plus aligned weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitMatrix {
    n: usize,
    // (target, probability) pairs per row
    walk_rows: Vec<Vec<(usize, f64)>>,
    // V entries aligned with walk_rows
    values: Vec<Vec<f64>>,
    // cumulative row probabilities; last entry equals the row sum p_i
    cdf: Vec<Vec<f64>>,
    // p_i per row
    row_sum: Vec<f64>,
}

impl SplitMatrix {
    /// Build from explicit walk rows and aligned value rows. Every row sum
    /// must stay strictly below one.
    pub fn new(walk_rows: Vec<Vec<(usize, f64)>>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = walk_rows.len();
        if values.len() != n {
            return Err(Error::DimensionMismatch {
                context: "walk rows vs value rows",
                expected: n,
                got: values.len(),
            });
        }
        let mut cdf = Vec::with_capacity(n);
        let mut row_sum = Vec::with_capacity(n);
        for (i, (row, vals)) in walk_rows.iter().zip(&values).enumerate() {
            if row.len() != vals.len() {
                return Err(Error::DimensionMismatch {
                    context: "walk row vs value row entries",
                    expected: row.len(),
                    got: vals.len(),
                });
            }
            let mut seen = vec![false; n];
            let mut acc = 0.0;
            let mut c = Vec::with_capacity(row.len());
            for &(target, p) in row {
                if target >= n {
                    return Err(Error::TargetOutOfRange { row: i, target, n });
                }
                if seen[target] {
                    return Err(Error::DuplicateTarget { row: i, target });
                }
                seen[target] = true;
                if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                    return Err(Error::ProbabilityOutOfRange { row: i, value: p });
                }
                acc += p;
                c.push(acc);
            }
            if !(0.0..1.0).contains(&acc) {
                return Err(Error::WalkRowSum { row: i, sum: acc });
            }
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("non-finite value entry in row {i}")));
            }
            cdf.push(c);
            row_sum.push(acc);
        }
        Ok(Self { n, walk_rows, values, cdf, row_sum })
    }

    /// The discounted-chain specialization: walk matrix `gamma * P` for a
    /// row-stochastic `P`, all value entries one. Every step continues with
    /// probability `gamma` and every weight is `1 / (1 - p_terminal)`.
    pub fn discounted(transitions: &TransitionMatrix, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::GammaOutOfRange(gamma));
        }
        let walk_rows: Vec<Vec<(usize, f64)>> = (0..transitions.n())
            .map(|i| transitions.row(i).iter().map(|&(t, p)| (t, gamma * p)).collect())
            .collect();
        let values = walk_rows.iter().map(|row| vec![1.0; row.len()]).collect();
        Self::new(walk_rows, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Row sum `p_i` (the continue probability at state `i`).
    pub fn continue_prob(&self, state: usize) -> f64 {
        self.row_sum[state]
    }

    /// Reconstruct the dense target matrix `M = P' * V`.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for (row, (walk, vals)) in m.iter_mut().zip(self.walk_rows.iter().zip(&self.values)) {
            for (&(t, p), &v) in walk.iter().zip(vals) {
                row[t] = p * v;
            }
        }
        m
    }
}

/// The absolute-value/sign splitting of a strictly row-dominant matrix:
/// `P'_ij = |M_ij|`, `V_ij = sign(M_ij)`. Requires `sum_j |M_ij| < 1` for
/// every row; rows violating that are reported so the caller can supply a
/// custom split instead.
pub fn default_split(m: &[Vec<f64>]) -> Result<SplitMatrix> {
    let n = m.len();
    let mut walk_rows = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for (i, row) in m.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                context: "matrix must be square",
                expected: n,
                got: row.len(),
            });
        }
        let abs_sum: f64 = row.iter().map(|x| x.abs()).sum();
        if abs_sum >= 1.0 {
            return Err(Error::RowNotDominant { row: i, sum: abs_sum });
        }
        let mut wr = Vec::new();
        let mut vr = Vec::new();
        for (j, &x) in row.iter().enumerate() {
            if x != 0.0 {
                wr.push((j, x.abs()));
                vr.push(if x > 0.0 { 1.0 } else { -1.0 });
            }
        }
        walk_rows.push(wr);
        values.push(vr);
    }
    SplitMatrix::new(walk_rows, values)
}

/// The result of one terminating walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkOutcome {
    pub start: usize,
    pub terminal: usize,
    /// Product of traversed `V` entries over `1 - p_terminal`; the empty
    /// product of a zero-transition walk is one.
    pub weight: f64,
    /// Number of transitions taken.
    pub length: u64,
}

/// Run one walk from `start`: a single uniform draw per step either picks
/// the successor (cumulative inversion over the row) or, landing at or past
/// the row sum, stops the walk.
pub fn run_walk(split: &SplitMatrix, start: usize, rng: &mut Draws) -> WalkOutcome {
    assert!(start < split.n, "start state out of range");
    let mut state = start;
    let mut weight = 1.0;
    let mut length = 0u64;
    loop {
        let u = rng.uniform();
        let p = split.row_sum[state];
        if u >= p {
            weight /= 1.0 - p;
            return WalkOutcome { start, terminal: state, weight, length };
        }
        let cdf = &split.cdf[state];
        let k = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        weight *= split.values[state][k];
        state = split.walk_rows[state][k].0;
        length += 1;
    }
}

/// Estimate one entry `((I - M)^{-1})_{ij}` as the mean over `num_walks`
/// walks from `i` of the weight of walks terminating at `j`.
pub fn estimate_entry(
    split: &SplitMatrix,
    i: usize,
    j: usize,
    num_walks: u64,
    rng: &mut Draws,
) -> f64 {
    assert!(num_walks >= 1);
    let mut acc = KahanSum::new();
    for _ in 0..num_walks {
        let outcome = run_walk(split, i, rng);
        if outcome.terminal == j {
            acc.add(outcome.weight);
        }
    }
    acc.value() / num_walks as f64
}

/// Estimate the whole row `i` of `(I - M)^{-1}` from one shared pass of
/// `num_walks` walks: entry `j` collects the weights of walks ending at `j`.
pub fn estimate_row(split: &SplitMatrix, i: usize, num_walks: u64, rng: &mut Draws) -> Vec<f64> {
    assert!(num_walks >= 1);
    let mut acc = vec![KahanSum::new(); split.n];
    for _ in 0..num_walks {
        let outcome = run_walk(split, i, rng);
        acc[outcome.terminal].add(outcome.weight);
    }
    acc.into_iter().map(|a| a.value() / num_walks as f64).collect()
}

/// Infinity norm (max absolute row sum) of a dense matrix.
fn inf_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Deterministic reference for `(I - M)^{-1}`: the partial sums of
/// `sum_k M^k`, stopped once the tail bound `||M^k|| / (1 - ||M||)` drops
/// to `tol`. Requires `||M||_inf < 1`, a cheap sufficient condition for
/// convergence of the series.
pub fn neumann_reference(m: &[Vec<f64>], tol: f64) -> Result<Vec<Vec<f64>>> {
    let n = m.len();
    for (i, row) in m.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                context: "matrix must be square",
                expected: n,
                got: row.len(),
            });
        }
        let _ = i;
    }
    let dm = DMatrix::from_fn(n, n, |i, j| m[i][j]);
    let norm = inf_norm(&dm);
    if norm >= 1.0 {
        return Err(Error::NormTooLarge { norm });
    }
    let mut sum = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    loop {
        term *= &dm;
        let t_norm = inf_norm(&term);
        if t_norm == 0.0 {
            break;
        }
        sum += &term;
        if t_norm / (1.0 - norm) <= tol {
            break;
        }
    }
    Ok((0..n).map(|i| (0..n).map(|j| sum[(i, j)]).collect()).collect())
}
