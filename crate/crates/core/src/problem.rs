//! Game definitions and trajectories.

use std::ops::Range;
use std::sync::Arc;

use nalgebra::DVector;

use crate::cost::PlayerCost;
use crate::dynamics::{step_unchecked, ControlPartition, DynamicsModel, Integrator};
use crate::error::{check_dim, Error, Result};
use crate::lq::FeedbackStrategies;

/// An N-player finite-horizon differential game: joint dynamics, one cost
/// per player, and a fixed discretization.
#[derive(Debug, Clone)]
pub struct GameProblem {
    dynamics: Arc<dyn DynamicsModel>,
    costs: Vec<PlayerCost>,
    partition: ControlPartition,
    horizon: usize,
    dt: f64,
    integrator: Integrator,
}

impl GameProblem {
    /// `horizon` is the number of steps `T`, `dt` the step length in seconds.
    /// The discretization defaults to RK4.
    pub fn new(dynamics: Arc<dyn DynamicsModel>, costs: Vec<PlayerCost>, horizon: usize, dt: f64) -> Result<Self> {
        let partition = ControlPartition::new(dynamics.control_dims().to_vec())?;
        if costs.len() != partition.num_players() {
            return Err(Error::Definition(format!(
                "{} players in the dynamics but {} cost functions",
                partition.num_players(),
                costs.len()
            )));
        }
        if horizon == 0 {
            return Err(Error::Definition("horizon must be at least one step".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Definition(format!("timestep must be positive, got {dt}")));
        }
        if dynamics.state_dim() == 0 {
            return Err(Error::Definition("state dimension must be positive".into()));
        }
        Ok(Self {
            dynamics,
            costs,
            partition,
            horizon,
            dt,
            integrator: Integrator::default(),
        })
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn dynamics(&self) -> &dyn DynamicsModel {
        self.dynamics.as_ref()
    }

    pub fn costs(&self) -> &[PlayerCost] {
        &self.costs
    }

    pub fn partition(&self) -> &ControlPartition {
        &self.partition
    }

    pub fn num_players(&self) -> usize {
        self.partition.num_players()
    }

    pub fn state_dim(&self) -> usize {
        self.dynamics.state_dim()
    }

    pub fn control_dim(&self) -> usize {
        self.partition.total()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Game duration `T·Δt` in seconds.
    pub fn duration(&self) -> f64 {
        self.horizon as f64 * self.dt
    }

    pub fn integrator(&self) -> Integrator {
        self.integrator
    }

    /// Time in seconds at timestep `k`.
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Discrete step map `x_{k+1} = step(x_k, u_k)`.
    pub fn step(&self, x: &DVector<f64>, u: &DVector<f64>, k: usize) -> Result<DVector<f64>> {
        check_dim("state", self.state_dim(), x.len())?;
        check_dim("controls", self.control_dim(), u.len())?;
        let next = step_unchecked(self.dynamics(), self.integrator, x.as_slice(), u.as_slice(), self.time(k), self.dt);
        if next.iter().all(|v| v.is_finite()) {
            Ok(DVector::from_vec(next))
        } else {
            Err(Error::NonFiniteState { step: k })
        }
    }

    /// Trajectory obtained by holding every control at zero.
    pub fn zero_input_rollout(&self, x0: DVector<f64>) -> Result<SystemTrajectory> {
        check_dim("initial state", self.state_dim(), x0.len())?;
        let u = DVector::zeros(self.control_dim());
        let mut states = Vec::with_capacity(self.horizon + 1);
        states.push(x0);
        for k in 0..self.horizon {
            let next = self.step(&states[k], &u, k).map_err(|_| Error::DivergedRollout { step: k })?;
            states.push(next);
        }
        SystemTrajectory::new(states, vec![u; self.horizon], self.dt)
    }

    /// Checks that `traj` has this game's horizon and dimensions.
    pub fn check_trajectory(&self, traj: &SystemTrajectory) -> Result<()> {
        check_dim("trajectory horizon", self.horizon, traj.horizon())?;
        check_dim("trajectory state", self.state_dim(), traj.states[0].len())?;
        check_dim("trajectory controls", self.control_dim(), traj.controls[0].len())?;
        Ok(())
    }

    /// Largest violation `‖x_{t+1} − step(x_t, u_t)‖∞` along `traj`.
    pub fn feasibility_error(&self, traj: &SystemTrajectory) -> Result<f64> {
        self.check_trajectory(traj)?;
        let mut worst = 0.0f64;
        for k in 0..self.horizon {
            let next = self.step(&traj.states[k], &traj.controls[k], k)?;
            worst = worst.max((next - &traj.states[k + 1]).amax());
        }
        Ok(worst)
    }

    pub fn is_feasible(&self, traj: &SystemTrajectory, tol: f64) -> bool {
        self.feasibility_error(traj).is_ok_and(|e| e <= tol)
    }
}

/// States `x_0..x_T` and stacked controls `u_0..u_{T−1}` at a fixed timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemTrajectory {
    pub states: Vec<DVector<f64>>,
    pub controls: Vec<DVector<f64>>,
    pub dt: f64,
}

impl SystemTrajectory {
    pub fn new(states: Vec<DVector<f64>>, controls: Vec<DVector<f64>>, dt: f64) -> Result<Self> {
        if controls.is_empty() {
            return Err(Error::Definition("trajectory needs at least one control step".into()));
        }
        check_dim("trajectory states", controls.len() + 1, states.len())?;
        let n = states[0].len();
        let m = controls[0].len();
        if states.iter().any(|x| x.len() != n) || controls.iter().any(|u| u.len() != m) {
            return Err(Error::Definition("ragged trajectory".into()));
        }
        Ok(Self { states, controls, dt })
    }

    pub fn horizon(&self) -> usize {
        self.controls.len()
    }

    pub fn initial_state(&self) -> &DVector<f64> {
        &self.states[0]
    }

    pub fn is_finite(&self) -> bool {
        self.states.iter().chain(&self.controls).all(|v| v.iter().all(|x| x.is_finite()))
    }

    /// `max_t ‖x_t − y_t‖∞` over the states of two equal-length trajectories.
    pub fn max_state_difference(&self, other: &SystemTrajectory) -> f64 {
        self.states.iter().zip(&other.states).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max)
    }
}

/// Rolls the game forward from `reference.x_0` under
/// `u_t = û_t − P_t (x_t − x̂_t) − step_scale·α_t`.
pub fn rollout(
    problem: &GameProblem,
    strategies: &FeedbackStrategies,
    reference: &SystemTrajectory,
    step_scale: f64,
) -> Result<SystemTrajectory> {
    problem.check_trajectory(reference)?;
    check_dim("strategy horizon", problem.horizon(), strategies.horizon())?;
    if !(0.0..=1.0).contains(&step_scale) {
        return Err(Error::Definition(format!("step scale must lie in [0, 1], got {step_scale}")));
    }
    rollout_from(problem, strategies, reference, &reference.states[0], step_scale)
}

/// Rollout about `reference` starting from `x0` instead of `reference.x_0`.
pub(crate) fn rollout_from(
    problem: &GameProblem,
    strategies: &FeedbackStrategies,
    reference: &SystemTrajectory,
    x0: &DVector<f64>,
    step_scale: f64,
) -> Result<SystemTrajectory> {
    let horizon = problem.horizon();
    let mut states = Vec::with_capacity(horizon + 1);
    let mut controls = Vec::with_capacity(horizon);
    states.push(x0.clone());
    for k in 0..horizon {
        let x = &states[k];
        let mut u = &reference.controls[k] - &strategies.gains[k] * (x - &reference.states[k]);
        u.axpy(-step_scale, &strategies.offsets[k], 1.0);
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::DivergedRollout { step: k });
        }
        let next = problem.step(x, &u, k).map_err(|_| Error::DivergedRollout { step: k })?;
        controls.push(u);
        states.push(next);
    }
    Ok(SystemTrajectory {
        states,
        controls,
        dt: problem.dt(),
    })
}

/// Stage costs of every player summed over timesteps `steps`, each scaled by Δt.
pub fn stage_cost_sum(problem: &GameProblem, traj: &SystemTrajectory, steps: Range<usize>) -> Result<Vec<f64>> {
    problem.check_trajectory(traj)?;
    if steps.end > problem.horizon() {
        return Err(Error::Definition(format!("step range {steps:?} exceeds the horizon")));
    }
    let dt = problem.dt();
    Ok(problem
        .costs()
        .iter()
        .map(|cost| {
            steps
                .clone()
                .map(|k| cost.stage(traj.states[k].as_slice(), traj.controls[k].as_slice(), problem.time(k)) * dt)
                .sum()
        })
        .collect())
}

/// Per-player cost `Σ_t g_i(x_t, u_t, t)·Δt + g_i^T(x_T)`.
pub fn trajectory_cost(problem: &GameProblem, traj: &SystemTrajectory) -> Result<Vec<f64>> {
    let mut totals = stage_cost_sum(problem, traj, 0..problem.horizon())?;
    let x_final = traj.states[problem.horizon()].as_slice();
    for (total, cost) in totals.iter_mut().zip(problem.costs()) {
        *total += cost.terminal(x_final);
    }
    Ok(totals)
}
