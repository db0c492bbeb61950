//! Ground-truth values by dense direct solve.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mrp::Mrp;
use crate::value::ValueVector;

/// Largest state count accepted by the dense solver.
pub const DESK_SCALE_LIMIT: usize = 5000;

/// Residual bound the solve must meet.
pub const ORACLE_RESIDUAL_TOL: f64 = 1e-9;

/// Solve `(I - gamma P) v = r` exactly by dense LU with partial pivoting.
///
/// This is the ground truth every estimator is measured against. The
/// system is always nonsingular for gamma < 1 and row-stochastic P; a
/// factorization failure or an out-of-tolerance residual is reported as an
/// internal error rather than papered over.
pub fn exact_value(mrp: &Mrp) -> Result<ValueVector> {
    let n = mrp.n();
    if n > DESK_SCALE_LIMIT {
        return Err(Error::DeskScaleExceeded { n, limit: DESK_SCALE_LIMIT });
    }
    let gamma = mrp.gamma();
    let mut a = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for &(j, p) in mrp.transitions().row(i) {
            a[(i, j)] -= gamma * p;
        }
    }
    let r = DVector::from_column_slice(mrp.rewards().mean());
    let v = a
        .clone()
        .lu()
        .solve(&r)
        .ok_or_else(|| Error::SingularSystem("zero pivot in (I - gamma P)".into()))?;

    let residual = (&a * &v) - &r;
    let worst = residual.amax();
    if worst > ORACLE_RESIDUAL_TOL {
        return Err(Error::SingularSystem(format!(
            "solve residual {worst} above {ORACLE_RESIDUAL_TOL}"
        )));
    }
    Ok(ValueVector::full(v.iter().copied().collect()))
}

/// Max-norm residual of a candidate solution: `max_i |((I - gamma P) v - r)_i|`.
pub fn residual_max_norm(mrp: &Mrp, values: &ValueVector) -> f64 {
    let gamma = mrp.gamma();
    let pv = mrp.transitions().mul_vec(values.values());
    values
        .values()
        .iter()
        .zip(&pv)
        .zip(mrp.rewards().mean())
        .map(|((&v, &pv_i), &r_i)| (v - gamma * pv_i - r_i).abs())
        .fold(0.0, f64::max)
}

/// Truncated Neumann sum `sum_{k=0}^{K} gamma^k P^k r`, by repeated sparse
/// matrix-vector products. Independent of the LU route; used to cross-check
/// the oracle. The truncation error is bounded by
/// `gamma^{K+1} * max|r| / (1 - gamma)`.
pub fn neumann_value(mrp: &Mrp, terms: usize) -> Vec<f64> {
    let gamma = mrp.gamma();
    let mut term: Vec<f64> = mrp.rewards().mean().to_vec();
    let mut total = term.clone();
    for _ in 0..terms {
        let pv = mrp.transitions().mul_vec(&term);
        for (t, p) in term.iter_mut().zip(pv) {
            *t = gamma * p;
        }
        for (acc, &t) in total.iter_mut().zip(&term) {
            *acc += t;
        }
    }
    total
}

/// The analytic tail bound for the truncated Neumann sum.
pub fn neumann_tail_bound(mrp: &Mrp, terms: usize) -> f64 {
    let gamma = mrp.gamma();
    let r_max = mrp.rewards().mean().iter().fold(0.0f64, |m, &r| m.max(r.abs()));
    gamma.powi(terms as i32 + 1) * r_max / (1.0 - gamma)
}
