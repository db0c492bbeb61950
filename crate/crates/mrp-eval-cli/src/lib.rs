//! Benchmark harness around the `mrp-eval` estimators: experiment
//! configuration, paired-seed execution, and CSV emission. The `mrpeval`
//! binary is a thin front end over these modules.

pub mod config;
pub mod csvout;
pub mod run;
