use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ilqgames::{solve_with_observer, DerivativeMode, Initialization};
use ilqgames_cli::bench::{run_bench, write_csv, BenchOptions};
use ilqgames_cli::error::{CliError, Result};
use ilqgames_cli::plot::{plot_rows, render_svg, write_plot_csv};
use ilqgames_cli::{load_scenario, Overrides, TrajectoryDocument};

/// Feedback Nash equilibria of N-player differential games by iterative
/// linear-quadratic approximation.
#[derive(Debug, Parser)]
#[command(name = "ilqgames", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a scenario and write its trajectory document (JSON).
    ///
    /// Exits 0 when the solver converged, 2 when it stopped without
    /// converging (the document is still written) and 1 on errors.
    Solve(SolveArgs),
    /// Time solves and measure convergence over jittered initial states;
    /// writes one CSV row per problem and mode.
    Bench(BenchArgs),
    /// Convert a trajectory document into plot-ready CSV (and optionally SVG).
    Plotdata(PlotArgs),
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Built-in scenario (lq2p2d, hallway3, freespace5; aliases lq,
    /// nonlinear3p12d) or path to a scenario TOML file.
    scenario: String,
    /// Number of timesteps, overriding the scenario.
    #[arg(long)]
    horizon: Option<usize>,
    /// Timestep in seconds, overriding the scenario.
    #[arg(long)]
    dt: Option<f64>,
    /// Derivative source: md (hand-written) or ad (automatic).
    #[arg(long, value_parser = parse_mode)]
    mode: Option<DerivativeMode>,
    /// Outer iteration cap.
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
    /// Convergence tolerance on the max-norm trajectory change.
    #[arg(long)]
    tol: Option<f64>,
    /// Where to write the document; standard output if omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Print one line per outer iteration to standard error.
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Comma-separated scenario names or paths.
    #[arg(long, value_delimiter = ',', default_value = "lq2p2d,nonlinear3p12d")]
    problems: Vec<String>,
    /// Comma-separated derivative modes (md, ad).
    #[arg(long, value_delimiter = ',', value_parser = parse_mode, default_value = "md,ad")]
    mode: Vec<DerivativeMode>,
    /// Timed solves per problem and mode, after one untimed warm-up.
    #[arg(long, default_value_t = 10)]
    reps: usize,
    /// Jittered initial states used for the converged fraction.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Seed of the initial-state sampler.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; standard output if omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Trajectory document written by `solve`.
    document: PathBuf,
    /// CSV destination; standard output if omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Also render the planar paths as SVG to this file.
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn parse_mode(s: &str) -> std::result::Result<DerivativeMode, String> {
    s.parse().map_err(|e: ilqgames::Error| e.to_string())
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, bytes).map_err(|source| CliError::Io { path: path.into(), source }),
        None => std::io::stdout().write_all(bytes).map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let overrides = Overrides {
        horizon: args.horizon,
        dt: args.dt,
        mode: args.mode,
        max_iterations: args.max_iters,
        tolerance: args.tol,
    };
    let scenario = load_scenario(&args.scenario, &overrides)?;
    let mode = scenario.config.solver.mode;
    let problem = &scenario.problem;
    let init = Initialization::zero(problem, scenario.initial_state.clone());
    let result = solve_with_observer(problem, init, &scenario.solver, |r| {
        if args.verbose {
            let step = r.step_scale.map_or("none".to_owned(), |e| format!("{e}"));
            eprintln!(
                "iter {:>3}  step {step:<9}  rejected {}  change {:.3e}  social cost {:.6}",
                r.iteration,
                r.rejected_steps,
                r.trajectory_change,
                r.social_cost()
            );
        }
    })?;
    if args.verbose {
        eprintln!("{}: {} after {} iterations", scenario.name, result.termination, result.iterations);
    }
    let doc = TrajectoryDocument::from_solve(&scenario, mode, &result);
    let mut text = doc.to_json();
    text.push('\n');
    emit(args.output.as_deref(), text.as_bytes())?;
    Ok(if result.converged { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    let options = BenchOptions {
        problems: args.problems,
        modes: args.mode,
        reps: args.reps,
        samples: args.samples,
        seed: args.seed,
    };
    let records = run_bench(&options, |r| {
        eprintln!(
            "{} {}: {:.3} ± {:.3} ms, converged {:.2}",
            r.problem, r.variant, r.mean_ms, r.std_ms, r.converged_fraction
        )
    })?;
    let mut csv = Vec::new();
    write_csv(&mut csv, &records)?;
    emit(args.output.as_deref(), &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_plotdata(args: PlotArgs) -> Result<ExitCode> {
    let doc = TrajectoryDocument::read(&args.document)?;
    let rows = plot_rows(&doc)?;
    let mut csv = Vec::new();
    write_plot_csv(&mut csv, &rows)?;
    emit(args.output.as_deref(), &csv)?;
    if let Some(svg) = &args.svg {
        emit(Some(svg), render_svg(&rows).as_bytes())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Plotdata(args) => cmd_plotdata(args),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(1)
    })
}
