//! Timing and convergence harness.
//!
//! For every (problem, derivative mode) pair: one untimed warm-up solve,
//! `reps` timed solves from the canonical initial state, then `samples`
//! solves from initial states whose positions are jittered uniformly by the
//! scenario's `jitter` (every state coordinate for non-planar scenarios).
//! Only the solve call sits inside the timed region.

use std::io::Write;
use std::time::Instant;

use ilqgames::{solve, DerivativeMode, Initialization};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::scenario::{load_scenario, Overrides};

/// Value of the `schema` column; bumped whenever the columns change.
pub const BENCH_SCHEMA: &str = "ilqgames-bench/1";

/// Header line of the benchmark CSV.
pub const CSV_HEADER: &str =
    "schema,problem,variant,players,state_dim,horizon,repetitions,mean_ms,std_ms,solver_mean_ms,samples,converged_fraction,jitter";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub schema: String,
    pub problem: String,
    /// `MD` or `AD`.
    pub variant: String,
    pub players: usize,
    pub state_dim: usize,
    pub horizon: usize,
    pub repetitions: usize,
    /// Harness wall time per solve.
    pub mean_ms: f64,
    /// Sample standard deviation; zero for a single repetition.
    pub std_ms: f64,
    /// Mean of the solver's own timing of the same repetitions.
    pub solver_mean_ms: f64,
    pub samples: usize,
    pub converged_fraction: f64,
    pub jitter: f64,
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub problems: Vec<String>,
    pub modes: Vec<DerivativeMode>,
    pub reps: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            problems: vec!["lq2p2d".into(), "nonlinear3p12d".into()],
            modes: vec![DerivativeMode::Manual, DerivativeMode::Automatic],
            reps: 10,
            samples: 20,
            seed: 0,
        }
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Benchmarks one problem in one mode. `options.problems` and
/// `options.modes` are ignored.
pub fn bench_one(problem: &str, mode: DerivativeMode, options: &BenchOptions) -> Result<BenchmarkRecord> {
    if options.reps == 0 || options.samples == 0 {
        return Err(CliError::Usage("--reps and --samples must be at least 1".into()));
    }
    let scenario = load_scenario(problem, &Overrides { mode: Some(mode), ..Overrides::default() })?;
    let p = &scenario.problem;
    let start = || Initialization::zero(p, scenario.initial_state.clone());

    solve(p, start(), &scenario.solver)?;
    let mut wall = Vec::with_capacity(options.reps);
    let mut internal = Vec::with_capacity(options.reps);
    for _ in 0..options.reps {
        let init = start();
        let begin = Instant::now();
        let result = solve(p, init, &scenario.solver);
        let elapsed = begin.elapsed();
        let result = result?;
        wall.push(elapsed.as_secs_f64() * 1e3);
        internal.push(result.solve_time.as_secs_f64() * 1e3);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut converged = 0;
    for _ in 0..options.samples {
        let x0 = scenario.sample_initial_state(&mut rng);
        if solve(p, Initialization::zero(p, x0), &scenario.solver)?.converged {
            converged += 1;
        }
    }

    let (mean_ms, std_ms) = mean_std(&wall);
    Ok(BenchmarkRecord {
        schema: BENCH_SCHEMA.into(),
        problem: problem.into(),
        variant: mode.label().into(),
        players: p.num_players(),
        state_dim: p.state_dim(),
        horizon: p.horizon(),
        repetitions: options.reps,
        mean_ms,
        std_ms,
        solver_mean_ms: mean_std(&internal).0,
        samples: options.samples,
        converged_fraction: converged as f64 / options.samples as f64,
        jitter: scenario.jitter,
    })
}

/// Runs every (problem, mode) pair in order, reporting each record as it
/// completes.
pub fn run_bench(options: &BenchOptions, mut progress: impl FnMut(&BenchmarkRecord)) -> Result<Vec<BenchmarkRecord>> {
    if options.problems.is_empty() || options.modes.is_empty() {
        return Err(CliError::Usage("at least one problem and one mode are required".into()));
    }
    let mut records = Vec::new();
    for problem in &options.problems {
        for &mode in &options.modes {
            let record = bench_one(problem, mode, options)?;
            progress(&record);
            records.push(record);
        }
    }
    Ok(records)
}

pub fn write_csv(out: impl Write, records: &[BenchmarkRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for record in records {
        writer.serialize(record)?;
    }
    if records.is_empty() {
        writer.write_record(CSV_HEADER.split(','))?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_csv(text: &str) -> Result<Vec<BenchmarkRecord>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != CSV_HEADER {
        return Err(CliError::Usage(format!("unexpected benchmark header `{}`", header.join(","))));
    }
    Ok(reader.deserialize().collect::<std::result::Result<_, _>>()?)
}
