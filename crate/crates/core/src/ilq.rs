//! The iterative LQ game solver.
//!
//! Each iteration linearizes the dynamics and quadratizes the costs about
//! the current operating point, solves the resulting LQ game for feedback
//! Nash strategies, and moves the operating point by rolling those
//! strategies out with a backtracked feedforward scale.

use std::time::{Duration, Instant};

use nalgebra::DVector;

use crate::derivatives::{lq_approximate, DerivativeProvider};
use crate::error::{check_dim, Error, Result};
use crate::lq::{solve_lq_game, FeedbackStrategies};
use crate::problem::{rollout_from, trajectory_cost, GameProblem, SystemTrajectory};

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Converged once `max_t ‖x_t^new − x_t^old‖∞` drops below this.
    pub tolerance: f64,
    /// First feedforward scale tried in every line search.
    pub initial_step: f64,
    pub backtrack_factor: f64,
    /// Smallest feedforward scale tried before giving up.
    pub min_step: f64,
    /// A step is accepted if the social cost grows by at most
    /// `acceptance_slack·(1 + |previous|)`. The first iteration is only
    /// required to roll out finitely: the initial operating point is a guess,
    /// not an iterate, and comparing against it would reject exact LQ steps
    /// whenever the equilibrium is socially worse than the guess.
    pub acceptance_slack: f64,
    pub derivatives: DerivativeProvider,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            tolerance: 1e-4,
            initial_step: 1.0,
            backtrack_factor: 0.5,
            min_step: 1.0 / 64.0,
            acceptance_slack: 1e-3,
            derivatives: DerivativeProvider::Automatic,
        }
    }
}

impl SolverConfig {
    pub fn with_derivatives(mut self, derivatives: impl Into<DerivativeProvider>) -> Self {
        self.derivatives = derivatives.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if self.max_iterations == 0 {
            return Err(Error::Definition("max_iterations must be positive".into()));
        }
        if !positive(self.tolerance) || !positive(self.min_step) || !positive(self.acceptance_slack) {
            return Err(Error::Definition("tolerance, min_step and acceptance_slack must be positive".into()));
        }
        if !(positive(self.initial_step) && self.initial_step <= 1.0 && self.min_step <= self.initial_step) {
            return Err(Error::Definition("step schedule requires 0 < min_step ≤ initial_step ≤ 1".into()));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::Definition("backtrack_factor must lie in (0, 1)".into()));
        }
        Ok(())
    }

    /// Feedforward scales tried by the line search, largest first.
    pub fn step_schedule(&self) -> Vec<f64> {
        let mut steps = Vec::new();
        let mut eps = self.initial_step;
        while eps >= self.min_step * (1.0 - 1e-12) {
            steps.push(eps);
            eps *= self.backtrack_factor;
        }
        steps
    }
}

/// Record of one outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Accepted feedforward scale; `None` when no scale was accepted.
    pub step_scale: Option<f64>,
    /// Scales rejected before acceptance (or in total, if none was accepted).
    pub rejected_steps: usize,
    pub trajectory_change: f64,
    pub previous_social_cost: f64,
    /// Upper bound on the accepted social cost; `None` for the unchecked
    /// first iteration.
    pub acceptance_threshold: Option<f64>,
    /// Costs of the operating point after this iteration.
    pub player_costs: Vec<f64>,
}

impl IterationRecord {
    pub fn social_cost(&self) -> f64 {
        self.player_costs.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Converged,
    MaxIterations,
    /// Every rollout in the line search left the finite reals.
    Diverged,
    /// Rollouts stayed finite but none satisfied the acceptance rule.
    LineSearchFailed,
    /// LQ approximation or LQ solve failed at the current operating point.
    NumericalFailure(Error),
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::Converged => f.write_str("converged"),
            Termination::MaxIterations => f.write_str("iteration limit reached"),
            Termination::Diverged => f.write_str("every rollout diverged"),
            Termination::LineSearchFailed => f.write_str("no step satisfied the acceptance rule"),
            Termination::NumericalFailure(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Feedback law that produced `trajectory`, expressed about it: the
    /// gains of the last LQ solve with zero feedforward.
    pub strategies: FeedbackStrategies,
    pub trajectory: SystemTrajectory,
    pub player_costs: Vec<f64>,
    pub converged: bool,
    /// Outer iterations performed (including a failing final one).
    pub iterations: usize,
    pub termination: Termination,
    pub diagnostics: Vec<IterationRecord>,
    /// Wall time spent inside the solve.
    pub solve_time: Duration,
}

/// Starting point of a solve.
#[derive(Debug, Clone)]
pub enum Initialization {
    Trajectory(SystemTrajectory),
    /// Strategies rolled out from `initial_state` about the zero trajectory,
    /// i.e. `u_t = −P_t x_t − α_t`.
    Strategies {
        strategies: FeedbackStrategies,
        initial_state: DVector<f64>,
    },
}

impl Initialization {
    /// Zero strategies from `initial_state`: the zero-input rollout.
    pub fn zero(problem: &GameProblem, initial_state: DVector<f64>) -> Self {
        Self::Strategies {
            strategies: FeedbackStrategies::zeros(problem.partition().clone(), problem.state_dim(), problem.horizon()),
            initial_state,
        }
    }
}

fn initial_trajectory(problem: &GameProblem, init: Initialization) -> Result<SystemTrajectory> {
    match init {
        Initialization::Trajectory(traj) => {
            problem.check_trajectory(&traj)?;
            if problem.feasibility_error(&traj).is_ok_and(|e| e <= 1e-10) {
                return Ok(traj);
            }
            // Replay the controls open loop so the operating point is feasible.
            let zero = FeedbackStrategies::zeros(problem.partition().clone(), problem.state_dim(), problem.horizon());
            rollout_from(problem, &zero, &traj, &traj.states[0], 0.0)
        }
        Initialization::Strategies { strategies, initial_state } => {
            check_dim("initial state", problem.state_dim(), initial_state.len())?;
            check_dim("strategy horizon", problem.horizon(), strategies.horizon())?;
            let zero = SystemTrajectory::new(
                vec![DVector::zeros(problem.state_dim()); problem.horizon() + 1],
                vec![DVector::zeros(problem.control_dim()); problem.horizon()],
                problem.dt(),
            )?;
            rollout_from(problem, &strategies, &zero, &initial_state, 1.0)
        }
    }
}

/// Solves `problem` to an approximate feedback Nash equilibrium.
///
/// Hitting the iteration cap or failing to find an acceptable step is
/// reported through [`SolveResult::termination`], not as an error. Errors
/// are reserved for malformed inputs.
pub fn solve(problem: &GameProblem, init: Initialization, config: &SolverConfig) -> Result<SolveResult> {
    solve_with_observer(problem, init, config, |_| {})
}

/// [`solve`] with a callback invoked after every outer iteration.
pub fn solve_with_observer(
    problem: &GameProblem,
    init: Initialization,
    config: &SolverConfig,
    mut observer: impl FnMut(&IterationRecord),
) -> Result<SolveResult> {
    let started = Instant::now();
    config.validate()?;
    let mut traj = initial_trajectory(problem, init)?;
    let mut costs = trajectory_cost(problem, &traj)?;
    let mut strategies = FeedbackStrategies::zeros(problem.partition().clone(), problem.state_dim(), problem.horizon());
    let schedule = config.step_schedule();
    let mut diagnostics = Vec::new();
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    for iteration in 1..=config.max_iterations {
        iterations = iteration;
        let lq = match lq_approximate(problem, &traj, &config.derivatives).and_then(|approx| solve_lq_game(&approx)) {
            Ok(lq) => lq,
            Err(e) => {
                termination = Termination::NumericalFailure(e);
                break;
            }
        };

        let previous_social: f64 = costs.iter().sum();
        let threshold = (iteration > 1).then(|| previous_social + config.acceptance_slack * (1.0 + previous_social.abs()));
        let mut accepted = None;
        let mut any_finite = false;
        let mut rejected = 0;
        for &eps in &schedule {
            match rollout_from(problem, &lq, &traj, &traj.states[0], eps) {
                Ok(candidate) => {
                    any_finite = true;
                    let candidate_costs = trajectory_cost(problem, &candidate)?;
                    let social: f64 = candidate_costs.iter().sum();
                    if social.is_finite() && threshold.map_or(true, |bound| social <= bound) {
                        accepted = Some((eps, candidate, candidate_costs));
                        break;
                    }
                }
                Err(Error::DivergedRollout { .. }) => {}
                Err(e) => return Err(e),
            }
            rejected += 1;
        }

        let Some((eps, candidate, candidate_costs)) = accepted else {
            let record = IterationRecord {
                iteration,
                step_scale: None,
                rejected_steps: rejected,
                trajectory_change: 0.0,
                previous_social_cost: previous_social,
            acceptance_threshold: threshold,
                player_costs: costs.clone(),
            };
            observer(&record);
            diagnostics.push(record);
            termination = if any_finite { Termination::LineSearchFailed } else { Termination::Diverged };
            break;
        };

        let change = candidate.max_state_difference(&traj);
        traj = candidate;
        costs = candidate_costs;
        strategies = FeedbackStrategies {
            partition: lq.partition,
            gains: lq.gains,
            offsets: vec![DVector::zeros(problem.control_dim()); problem.horizon()],
        };
        let record = IterationRecord {
            iteration,
            step_scale: Some(eps),
            rejected_steps: rejected,
            trajectory_change: change,
            previous_social_cost: previous_social,
            acceptance_threshold: threshold,
            player_costs: costs.clone(),
        };
        observer(&record);
        diagnostics.push(record);
        if change < config.tolerance {
            termination = Termination::Converged;
            break;
        }
    }

    Ok(SolveResult {
        strategies,
        trajectory: traj,
        player_costs: costs,
        converged: termination == Termination::Converged,
        iterations,
        termination,
        diagnostics,
        solve_time: started.elapsed(),
    })
}

/// Re-solves from `new_initial_state` warm-started by `previous`, with its
/// strategies and operating point advanced by `shift` timesteps (the last
/// stage is repeated).
pub fn warm_start(
    problem: &GameProblem,
    previous: &SolveResult,
    new_initial_state: &DVector<f64>,
    shift: usize,
    config: &SolverConfig,
) -> Result<SolveResult> {
    problem.check_trajectory(&previous.trajectory)?;
    check_dim("initial state", problem.state_dim(), new_initial_state.len())?;
    let horizon = problem.horizon();
    let prev = &previous.trajectory;
    let reference = SystemTrajectory::new(
        (0..=horizon).map(|k| prev.states[(k + shift).min(horizon)].clone()).collect(),
        (0..horizon).map(|k| prev.controls[(k + shift).min(horizon - 1)].clone()).collect(),
        problem.dt(),
    )?;
    let strategies = previous.strategies.shifted(shift);
    let start = rollout_from(problem, &strategies, &reference, new_initial_state, 1.0)?;
    solve(problem, Initialization::Trajectory(start), config)
}

/// One receding-horizon update: shift the previous solution by one step and
/// re-solve from the newly measured state.
pub fn receding_horizon_step(
    problem: &GameProblem,
    previous: &SolveResult,
    new_initial_state: &DVector<f64>,
    config: &SolverConfig,
) -> Result<SolveResult> {
    warm_start(problem, previous, new_initial_state, 1, config)
}
