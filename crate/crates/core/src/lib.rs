//! Iterative linear-quadratic solver for N-player differential games.
//!
//! A [`GameProblem`] couples continuous-time dynamics (often a
//! [`ProductSystem`] of per-player subsystems) with one cost per player.
//! [`solve`] approximates a feedback Nash equilibrium by repeatedly
//! linearizing the discrete dynamics, quadratizing every player's cost about
//! the current trajectory, solving the LQ game with [`solve_lq_game`], and
//! rolling the resulting strategies out with a backtracked feedforward step.
//!
//! Strategies follow the minus-gain convention
//! `u_t = û_t − P_t (x_t − x̂_t) − ε·α_t` about an operating point `(x̂, û)`.

pub mod cost;
pub mod derivatives;
pub mod dynamics;
pub mod error;
pub mod ilq;
pub mod lq;
pub mod problem;
pub mod scalar;
pub mod scenarios;

pub use cost::{CostExpansion, CostTerm, CostTermModel, PlayerCost};
pub use derivatives::{
    lq_approximate, linearize_dynamics, linearize_step, quadraticize_costs, quadraticize_stage, stage_expansion, DerivativeMode, DerivativeProvider, LQApproximation, LinearDynamics,
    LinearizationPolicy, LqStage, QuadraticPlayerCost, TerminalQuadratic,
};
pub use dynamics::{discretize_step, evaluate_dynamics, ControlPartition, DynamicsModel, Integrator, ProductSystem, VectorField};
pub use error::{Error, Result};
pub use ilq::{receding_horizon_step, solve, solve_with_observer, warm_start, Initialization, IterationRecord, SolveResult, SolverConfig, Termination};
pub use lq::{best_response, solve_lq_game, solve_lq_game_with_values, AffineStrategy, FeedbackStrategies, PlayerIndex, ValueFunctionQuadratic};
pub use problem::{rollout, stage_cost_sum, trajectory_cost, GameProblem, SystemTrajectory};
pub use scalar::{HyperDual, Scalar};
