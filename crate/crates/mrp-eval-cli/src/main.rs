use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mrp_eval::inverse::{default_split, estimate_entry, neumann_reference};
use mrp_eval::{exact_value, io, random_mrp, Error, RngStream};
use mrp_eval_cli::config::{
    EstimatorKind, ExperimentConfig, FeatureSpec, MrpSource,
};
use mrp_eval_cli::csvout::emit_csv;
use mrp_eval_cli::run::{run_all, summarize};

/// Policy evaluation benchmarks for Markov reward processes.
#[derive(Parser)]
#[command(name = "mrpeval", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random process and write it as JSON.
    Gen {
        /// Number of states.
        #[arg(long)]
        n: usize,
        /// Successors per state (defaults to n: fully dense rows).
        #[arg(long)]
        out_degree: Option<usize>,
        /// Discount factor stored in the file.
        #[arg(long, default_value_t = 0.8)]
        gamma: f64,
        /// Reward means are drawn uniformly from [reward-min, reward-max).
        #[arg(long, default_value_t = 0.0)]
        reward_min: f64,
        #[arg(long, default_value_t = 1.0)]
        reward_max: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a process exactly and write the value vector as JSON.
    Exact {
        #[arg(long)]
        mrp: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one estimator for a number of repetitions and emit CSV.
    Eval {
        /// One of td, ml, mcmi, lstd, lsmcmi.
        #[arg(long)]
        estimator: String,
        /// Process file (mutually exclusive with --procedural).
        #[arg(long)]
        mrp: Option<PathBuf>,
        /// Procedural process as `n,reachable,out_degree`.
        #[arg(long)]
        procedural: Option<String>,
        /// Discount override (procedural sources and file overrides).
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 0.9)]
        lambda: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 20_000)]
        steps: u64,
        /// `identity`, `gaussian:K`, or a feature JSON path.
        #[arg(long)]
        features: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        reps: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a sweep described by a JSON config file and emit CSV.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate one entry of (I - M)^{-1} by random walks.
    Inverse {
        /// Dense square matrix as a JSON array of rows.
        #[arg(long)]
        matrix: PathBuf,
        /// Entry as `i,j`.
        #[arg(long)]
        entry: String,
        #[arg(long, default_value_t = 100_000)]
        walks: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_pair(text: &str) -> Result<(usize, usize), Error> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::InvalidArgument(format!("expected i,j: got {text:?}")));
    }
    let i = parts[0].trim().parse().map_err(|_| {
        Error::InvalidArgument(format!("bad index {:?}", parts[0]))
    })?;
    let j = parts[1].trim().parse().map_err(|_| {
        Error::InvalidArgument(format!("bad index {:?}", parts[1]))
    })?;
    Ok((i, j))
}

fn parse_procedural(text: &str) -> Result<MrpSource, Error> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "expected n,reachable,out_degree: got {text:?}"
        )));
    }
    let nums: Result<Vec<usize>, Error> = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad integer {p:?}")))
        })
        .collect();
    let nums = nums?;
    Ok(MrpSource::Procedural { n: nums[0], reachable: nums[1], out_degree: nums[2] })
}

fn print_summaries(records: &[mrp_eval_cli::run::ResultRecord]) {
    for s in summarize(records) {
        match s.mean_rel_error {
            Some(err) => println!(
                "{} n={} steps={} gamma={}: mean rel_error {:.6} over {} runs ({:.3} ms mean)",
                s.estimator, s.n, s.t_steps, s.gamma, err, s.runs, s.mean_wall_ms
            ),
            None => println!(
                "{} n={} steps={} gamma={}: {} runs ({:.3} ms mean, no oracle)",
                s.estimator, s.n, s.t_steps, s.gamma, s.runs, s.mean_wall_ms
            ),
        }
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Gen { n, out_degree, gamma, reward_min, reward_max, seed, out } => {
            let mrp = random_mrp(
                n,
                out_degree.unwrap_or(n),
                (reward_min, reward_max),
                gamma,
                RngStream::new(seed, 0),
            )?;
            io::write_mrp(&mrp, &out)?;
            println!("wrote {} states to {}", n, out.display());
        }
        Command::Exact { mrp, out } => {
            let process = io::read_mrp(&mrp)?;
            let values = exact_value(&process)?;
            io::write_values(&values, &out)?;
            println!("wrote {} values to {}", values.len(), out.display());
        }
        Command::Eval {
            estimator,
            mrp,
            procedural,
            gamma,
            lambda,
            alpha,
            steps,
            features,
            seed,
            reps,
            out,
        } => {
            let source = match (mrp, procedural) {
                (Some(path), None) => MrpSource::File { path },
                (None, Some(spec)) => parse_procedural(&spec)?,
                _ => {
                    return Err(Error::InvalidArgument(
                        "provide exactly one of --mrp or --procedural".into(),
                    ))
                }
            };
            let config = ExperimentConfig {
                estimator: EstimatorKind::parse(&estimator)?,
                source,
                gamma: gamma.unwrap_or(0.8),
                gamma_override: gamma.is_some(),
                lambda,
                alpha,
                steps,
                features: features.as_deref().map(FeatureSpec::parse).transpose()?,
                reps,
                base_seed: seed,
                sweep: None,
            };
            let records = run_all(&config)?;
            emit_csv(&records, &out)?;
            print_summaries(&records);
        }
        Command::Bench { config, out } => {
            let text = std::fs::read_to_string(&config)?;
            let config = ExperimentConfig::from_json(&text)?;
            let records = run_all(&config)?;
            emit_csv(&records, &out)?;
            print_summaries(&records);
        }
        Command::Inverse { matrix, entry, walks, seed } => {
            let m = io::read_dense_matrix(&matrix)?;
            let (i, j) = parse_pair(&entry)?;
            let n = m.len();
            if i >= n || j >= n {
                return Err(Error::StateOutOfRange { state: i.max(j), n });
            }
            if walks == 0 {
                return Err(Error::InvalidArgument("walk count must be positive".into()));
            }
            let split = default_split(&m)?;
            let mut rng = RngStream::new(seed, 0).rng();
            let estimate = estimate_entry(&split, i, j, walks, &mut rng);
            println!("estimate[{i},{j}] = {}", io::format_f64(estimate));
            if n <= 2000 {
                let reference = neumann_reference(&m, 1e-10)?;
                println!("reference[{i},{j}] = {}", io::format_f64(reference[i][j]));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap already formats usage errors; keep exit code 1 for all
            // argument validation problems
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
