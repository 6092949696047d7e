use std::cmp::Ordering;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::Parser;
use log::{info, warn};
use rayon::prelude::*;

use ckmeans::admm::{run, SolveResult, SolverConfig};
use ckmeans::io::{parse_constraints, parse_labels, parse_points};
use ckmeans::metrics::{accuracy, nmi};
use ckmeans::oracle::{brute_force_solve, DEFAULT_LIMIT};
use ckmeans::report::{ConfigEcho, Metrics, OracleReport, RunReport, SweepEntry};
use ckmeans::synth::gen_blobs;
use ckmeans::{ConstraintSet, DataMatrix, Error, Shape};

const EXIT_FAILURE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

/// Constrained K-means with cluster sizes, must-link and cannot-link pairs.
#[derive(Debug, Parser)]
#[command(name = "ckmeans", version, about)]
struct Cli {
    /// CSV file with one point per row.
    #[arg(long, value_name = "PATH", required_unless_present = "gen_blobs", conflicts_with = "gen_blobs")]
    points: Option<PathBuf>,

    /// Constraint file with ML/CL/CARD lines (0-based point indices).
    #[arg(long, value_name = "PATH")]
    constraints: Option<PathBuf>,

    /// Number of clusters. Defaults to the blob count with --gen-blobs.
    #[arg(long)]
    k: Option<usize>,

    #[arg(long, default_value_t = 0.1)]
    rho: f64,

    #[arg(long, default_value_t = 2000)]
    max_iters: usize,

    #[arg(long, default_value_t = 1e-8)]
    cg_tol: f64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Also solve exactly by enumeration and report the gap.
    #[arg(long)]
    oracle: bool,

    /// Largest k^n the oracle will enumerate.
    #[arg(long, default_value_t = DEFAULT_LIMIT)]
    oracle_limit: u128,

    /// Ground-truth labels, one per line, for NMI and accuracy.
    #[arg(long, value_name = "PATH")]
    truth: Option<PathBuf>,

    /// Synthetic blobs instead of --points: k,per_cluster,d,spread,separation.
    #[arg(long, value_name = "SPEC")]
    gen_blobs: Option<BlobSpec>,

    /// Solve for every seed/rho pair, e.g. "seeds=0,1,2;rhos=0.01,0.1,1".
    #[arg(long, value_name = "SPEC")]
    sweep: Option<Sweep>,

    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy)]
struct BlobSpec {
    k: usize,
    per_cluster: usize,
    d: usize,
    spread: f64,
    separation: f64,
}

impl FromStr for BlobSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [k, per, d, spread, sep] = parts.as_slice() else {
            return Err("expected k,per_cluster,d,spread,separation".into());
        };
        let count = |v: &str| v.parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
        let real = |v: &str| v.parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
        Ok(Self {
            k: count(k)?,
            per_cluster: count(per)?,
            d: count(d)?,
            spread: real(spread)?,
            separation: real(sep)?,
        })
    }
}

#[derive(Debug, Clone, Default)]
struct Sweep {
    seeds: Option<Vec<u64>>,
    rhos: Option<Vec<f64>>,
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        fn list<T: FromStr>(v: &str) -> Result<Vec<T>, String>
        where
            T::Err: std::fmt::Display,
        {
            v.split(',')
                .map(|t| t.trim().parse::<T>().map_err(|e| format!("{t:?}: {e}")))
                .collect()
        }
        let mut sweep = Sweep::default();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            match part.split_once('=') {
                Some(("seeds", v)) => sweep.seeds = Some(list(v)?),
                Some(("rhos", v)) => sweep.rhos = Some(list(v)?),
                _ => return Err(format!("unknown sweep part {part:?}; use seeds=... and rhos=...")),
            }
        }
        Ok(sweep)
    }
}

enum Failure {
    Invalid(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Other(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CKMEANS_LOG", "warn")).init();
    let cli = Cli::parse();
    match solve(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn solve(cli: &Cli) -> Result<u8, Failure> {
    let started = Instant::now();
    let (data, mut truth, source) = load_points(cli)?;
    let k = match (cli.k, cli.gen_blobs) {
        (Some(k), _) => k,
        (None, Some(spec)) => spec.k,
        (None, None) => return Err(Failure::Invalid("--k is required with --points".into())),
    };
    let shape = Shape::of(&data, k)?;

    let constraints = match &cli.constraints {
        Some(path) => parse_constraints(path, data.n(), k)?,
        None => ConstraintSet::unconstrained(),
    };
    let validation = constraints.validate(&shape)?;
    if !validation.is_clean() {
        let msgs: Vec<String> = validation.warnings.iter().map(ToString::to_string).collect();
        return Err(Failure::Invalid(format!("constraints are infeasible: {}", msgs.join("; "))));
    }
    if let Some(path) = &cli.truth {
        truth = Some(parse_labels(path)?);
    }

    let base = SolverConfig {
        rho: cli.rho,
        cg_tol: cli.cg_tol,
        max_outer_iters: cli.max_iters,
        seed: cli.seed,
        ..SolverConfig::default()
    };
    base.validate()?;

    let (solve, sweep) = match &cli.sweep {
        None => (run(&data, k, &constraints, &base)?, Vec::new()),
        Some(spec) => run_sweep(&data, k, &constraints, &base, spec)?,
    };

    let oracle = if cli.oracle {
        match brute_force_solve(&data, k, &constraints, cli.oracle_limit) {
            Ok(result) => Some(OracleReport::new(result, solve.objective)),
            Err(Error::TooLarge { size, limit }) => {
                warn!("oracle skipped: {size} labellings exceed --oracle-limit {limit}");
                None
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };

    let metrics = match truth {
        Some(truth) => {
            let classes = truth.iter().max().map_or(k, |&m| k.max(m + 1));
            Some(Metrics {
                nmi: nmi(&solve.labels, &truth)?,
                accuracy: accuracy(&solve.labels, &truth, classes)?,
            })
        }
        None => None,
    };

    let converged = solve.converged;
    let report = RunReport {
        config: ConfigEcho {
            n: data.n(),
            d: data.d(),
            k,
            source,
            constraints: cli.constraints.as_ref().map(|p| p.display().to_string()),
            solver: base,
            oracle_limit: cli.oracle.then_some(cli.oracle_limit),
        },
        solve,
        oracle,
        metrics,
        sweep,
        wall_time: started.elapsed().as_secs_f64(),
    };
    let text = report.to_json()?;
    match &cli.out {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| Failure::Other(format!("{}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = writeln!(stdout, "{text}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(Failure::Other(format!("stdout: {e}")));
                }
            }
        }
    }

    if converged {
        Ok(0)
    } else {
        warn!("solver stopped without meeting the convergence rule");
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn load_points(cli: &Cli) -> Result<(DataMatrix, Option<Vec<usize>>, String), Failure> {
    if let Some(spec) = cli.gen_blobs {
        let blobs = gen_blobs(spec.k, spec.per_cluster, spec.d, spec.spread, spec.separation, cli.seed)?;
        let source = format!(
            "blobs k={} per_cluster={} d={} spread={} separation={} seed={}",
            spec.k, spec.per_cluster, spec.d, spec.spread, spec.separation, cli.seed
        );
        return Ok((blobs.data, Some(blobs.labels), source));
    }
    let path = cli.points.as_ref().expect("clap requires --points or --gen-blobs");
    let data = parse_points(path).map_err(|e| match e {
        Error::Io(io) => Failure::Other(format!("{}: {io}", path.display())),
        other => Failure::Invalid(format!("{}: {other}", path.display())),
    })?;
    Ok((data, None, path.display().to_string()))
}

/// Runs every seed/rho pair in parallel. The reported solve is the best run:
/// feasible before infeasible, then lowest objective, then sweep order.
fn run_sweep(
    data: &DataMatrix,
    k: usize,
    constraints: &ConstraintSet,
    base: &SolverConfig,
    spec: &Sweep,
) -> Result<(SolveResult, Vec<SweepEntry>), Failure> {
    let mut seeds = spec.seeds.clone().unwrap_or_else(|| vec![base.seed]);
    let mut rhos = spec.rhos.clone().unwrap_or_else(|| vec![base.rho]);
    seeds.sort_unstable();
    seeds.dedup();
    rhos.sort_by(f64::total_cmp);
    rhos.dedup();
    let grid: Vec<(u64, f64)> = seeds
        .iter()
        .flat_map(|&s| rhos.iter().map(move |&r| (s, r)))
        .collect();
    info!("sweeping {} runs", grid.len());

    let results: Vec<SolveResult> = grid
        .par_iter()
        .map(|&(seed, rho)| run(data, k, constraints, &SolverConfig { seed, rho, ..base.clone() }))
        .collect::<ckmeans::Result<_>>()?;

    let entries: Vec<SweepEntry> = grid
        .iter()
        .zip(&results)
        .map(|(&(seed, rho), r)| SweepEntry::of(seed, rho, r))
        .collect();
    let best = (0..results.len())
        .min_by(|&a, &b| {
            let (ra, rb) = (&results[a], &results[b]);
            rb.feasible()
                .cmp(&ra.feasible())
                .then(ra.objective.partial_cmp(&rb.objective).unwrap_or(Ordering::Equal))
                .then(a.cmp(&b))
        })
        .ok_or_else(|| Failure::Invalid("sweep has no runs".into()))?;
    let best = results.into_iter().nth(best).expect("index in range");
    Ok((best, entries))
}
