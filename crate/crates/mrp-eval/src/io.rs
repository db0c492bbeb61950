//! File formats.
//!
//! Processes travel as JSON:
//! `{"n": int, "gamma": float, "rows": [[[target, prob], ...], ...],
//!   "reward_mean": [...], "reward_stddev": [...]}`.
//! Writers emit every float with 17 significant digits so a write/read
//! cycle reproduces the exact bits; readers re-validate all invariants.
//! A reward model whose stddev vector is all zeros reads back as
//! deterministic, otherwise as Gaussian.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::mrp::{Mrp, RewardModel, RewardNoise, TransitionMatrix};
use crate::value::ValueVector;

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn push_float_list(out: &mut String, xs: &[f64]) {
    out.push('[');
    for (i, &x) in xs.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format_f64(x));
    }
    out.push(']');
}

/// Serialize a process to its JSON form.
pub fn mrp_to_json(mrp: &Mrp) -> String {
    let n = mrp.n();
    let mut out = String::new();
    let _ = write!(out, "{{\"n\":{n},\"gamma\":{}", format_f64(mrp.gamma()));
    out.push_str(",\"rows\":[");
    for i in 0..n {
        if i > 0 {
            out.push(',');
        }
        out.push('[');
        for (j, &(target, p)) in mrp.transitions().row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "[{target},{}]", format_f64(p));
        }
        out.push(']');
    }
    out.push_str("],\"reward_mean\":");
    push_float_list(&mut out, mrp.rewards().mean());
    out.push_str(",\"reward_stddev\":");
    push_float_list(&mut out, mrp.rewards().stddev());
    out.push_str("}\n");
    out
}

#[derive(Deserialize)]
struct MrpFile {
    n: usize,
    gamma: f64,
    rows: Vec<Vec<(usize, f64)>>,
    reward_mean: Vec<f64>,
    reward_stddev: Vec<f64>,
}

/// Parse and validate a process from its JSON form.
pub fn mrp_from_json(text: &str) -> Result<Mrp> {
    let file: MrpFile = serde_json::from_str(text)?;
    if file.rows.len() != file.n {
        return Err(Error::DimensionMismatch {
            context: "declared n vs rows",
            expected: file.n,
            got: file.rows.len(),
        });
    }
    let transitions = TransitionMatrix::new(file.rows)?;
    let noise = if file.reward_stddev.iter().all(|&s| s == 0.0) {
        RewardNoise::Deterministic
    } else {
        RewardNoise::Gaussian
    };
    let rewards = RewardModel::new(file.reward_mean, file.reward_stddev, noise)?;
    Mrp::new(transitions, rewards, file.gamma)
}

pub fn write_mrp(mrp: &Mrp, path: &Path) -> Result<()> {
    std::fs::write(path, mrp_to_json(mrp))?;
    Ok(())
}

pub fn read_mrp(path: &Path) -> Result<Mrp> {
    mrp_from_json(&std::fs::read_to_string(path)?)
}

/// Serialize a value vector as
/// `{"n": int, "values": [...], "visited": [...]}`.
pub fn values_to_json(values: &ValueVector) -> String {
    let mut out = String::new();
    let _ = write!(out, "{{\"n\":{},\"values\":", values.len());
    push_float_list(&mut out, values.values());
    out.push_str(",\"visited\":[");
    for (i, &m) in values.visited().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(if m { "true" } else { "false" });
    }
    out.push_str("]}\n");
    out
}

#[derive(Deserialize)]
struct ValuesFile {
    n: usize,
    values: Vec<f64>,
    visited: Vec<bool>,
}

pub fn values_from_json(text: &str) -> Result<ValueVector> {
    let file: ValuesFile = serde_json::from_str(text)?;
    if file.values.len() != file.n || file.visited.len() != file.n {
        return Err(Error::DimensionMismatch {
            context: "declared n vs value entries",
            expected: file.n,
            got: file.values.len(),
        });
    }
    Ok(ValueVector::from_parts(file.values, file.visited))
}

pub fn write_values(values: &ValueVector, path: &Path) -> Result<()> {
    std::fs::write(path, values_to_json(values))?;
    Ok(())
}

/// Read a plain dense square matrix: a JSON array of equal-length rows.
pub fn read_dense_matrix(path: &Path) -> Result<Vec<Vec<f64>>> {
    let m: Vec<Vec<f64>> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if m.is_empty() {
        return Err(Error::InvalidArgument("matrix has no rows".into()));
    }
    let n = m.len();
    for row in &m {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                context: "matrix must be square",
                expected: n,
                got: row.len(),
            });
        }
    }
    Ok(m)
}
