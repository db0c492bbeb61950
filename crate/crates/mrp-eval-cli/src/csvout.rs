//! CSV emission with a fixed column order and 17-significant-digit floats.
//! Identical records always produce identical bytes; only `wall_ms` varies
//! between reruns of the same configuration.

use std::fmt::Write as _;
use std::path::Path;

use mrp_eval::io::format_f64;
use mrp_eval::{Error, Result};

use crate::run::ResultRecord;

pub const CSV_HEADER: &str =
    "estimator,n,t_steps,gamma,lambda,alpha,k,m,seed,rel_error,wall_ms,walks_completed,mean_walk_length";

fn opt_f64(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

fn opt_u64(x: Option<u64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Render records as CSV text (header, then one LF-terminated row each).
pub fn records_to_csv(records: &[ResultRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.estimator,
            r.n,
            r.t_steps,
            format_f64(r.gamma),
            opt_f64(r.lambda),
            opt_f64(r.alpha),
            r.k.map(|v| v.to_string()).unwrap_or_default(),
            r.m.map(|v| v.to_string()).unwrap_or_default(),
            r.seed,
            opt_f64(r.rel_error),
            format_f64(r.wall_ms),
            opt_u64(r.walks_completed),
            opt_f64(r.mean_walk_length),
        );
    }
    out
}

/// Write records to `path`. Refuses an empty record list.
pub fn emit_csv(records: &[ResultRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records to write".into()));
    }
    std::fs::write(path, records_to_csv(records))?;
    Ok(())
}
