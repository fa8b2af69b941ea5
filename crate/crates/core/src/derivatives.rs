//! Linear-quadratic approximations of a game around an operating point.
//!
//! Two providers ship: [`DerivativeProvider::Manual`] uses the hand-coded
//! derivatives supplied by models and cost terms, and
//! [`DerivativeProvider::Automatic`] differentiates the discrete step map and
//! the cost terms with forward-mode hyper-dual numbers. Both differentiate
//! the same integrator the rollout uses, so the LQ model always matches the
//! forward pass.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cost::{CostExpansion, CostTermModel};
use crate::dynamics::{integrate, ControlPartition, DynamicsModel, Integrator};
use crate::error::{Error, Result};
use crate::problem::{GameProblem, SystemTrajectory};
use crate::scalar::HyperDual;

/// Eigenvalue floor applied to state Hessians.
pub const STATE_HESSIAN_FLOOR: f64 = 0.0;
/// Eigenvalue floor applied to each player's own control Hessian.
pub const CONTROL_HESSIAN_FLOOR: f64 = 1e-6;

/// Discrete-time linearization `δx' = A δx + Σ_i B_i δu_i`.
///
/// `b` stacks every player's input matrix column-wise following the game's
/// control partition.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearDynamics {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl LinearDynamics {
    /// Player `i`'s input matrix `B_i`.
    pub fn input(&self, partition: &ControlPartition, i: usize) -> DMatrix<f64> {
        self.b.columns(partition.offset(i), partition.dim(i)).into_owned()
    }
}

/// Quadratic model of one player's stage cost:
/// `½δxᵀQδx + lᵀδx + Σ_j (½δu_jᵀR_jδu_j + r_jᵀδu_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticPlayerCost {
    pub q: DMatrix<f64>,
    pub l: DVector<f64>,
    /// `R_ij` for every player `j`.
    pub r: Vec<DMatrix<f64>>,
    /// `r_ij` for every player `j`.
    pub r_lin: Vec<DVector<f64>>,
}

impl QuadraticPlayerCost {
    pub fn zeros(n: usize, partition: &ControlPartition) -> Self {
        Self {
            q: DMatrix::zeros(n, n),
            l: DVector::zeros(n),
            r: partition.dims().iter().map(|&d| DMatrix::zeros(d, d)).collect(),
            r_lin: partition.dims().iter().map(|&d| DVector::zeros(d)).collect(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.q *= factor;
        self.l *= factor;
        self.r.iter_mut().for_each(|r| *r *= factor);
        self.r_lin.iter_mut().for_each(|r| *r *= factor);
    }
}

/// Quadratic model of a terminal cost: `½δxᵀQδx + lᵀδx`.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalQuadratic {
    pub q: DMatrix<f64>,
    pub l: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LqStage {
    pub dynamics: LinearDynamics,
    /// One entry per player.
    pub costs: Vec<QuadraticPlayerCost>,
}

/// A time-varying LQ game: `T` stages plus per-player terminal costs.
#[derive(Debug, Clone, PartialEq)]
pub struct LQApproximation {
    pub partition: ControlPartition,
    pub stages: Vec<LqStage>,
    pub terminal: Vec<TerminalQuadratic>,
}

impl LQApproximation {
    pub fn horizon(&self) -> usize {
        self.stages.len()
    }

    pub fn state_dim(&self) -> usize {
        self.terminal[0].q.nrows()
    }

    pub fn num_players(&self) -> usize {
        self.partition.num_players()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.state_dim();
        let m = self.partition.total();
        let players = self.num_players();
        if self.stages.is_empty() {
            return Err(Error::Definition("LQ game without stages".into()));
        }
        if self.terminal.len() != players {
            return Err(Error::Definition("one terminal cost per player required".into()));
        }
        for stage in &self.stages {
            let d = &stage.dynamics;
            if d.a.shape() != (n, n) || d.b.shape() != (n, m) || stage.costs.len() != players {
                return Err(Error::Definition("inconsistent LQ stage dimensions".into()));
            }
            for c in &stage.costs {
                let blocks_ok = c.r.iter().zip(c.r_lin.iter()).enumerate().all(|(j, (r, rl))| {
                    r.shape() == (self.partition.dim(j), self.partition.dim(j)) && rl.len() == self.partition.dim(j)
                });
                if c.q.shape() != (n, n) || c.l.len() != n || c.r.len() != players || c.r_lin.len() != players || !blocks_ok {
                    return Err(Error::Definition("inconsistent LQ cost dimensions".into()));
                }
            }
        }
        Ok(())
    }
}

/// Hook for replacing the whole LQ approximation step, e.g. to exploit
/// special structure of a model.
pub trait LinearizationPolicy: Debug + Send + Sync {
    fn lq_approximate(&self, problem: &GameProblem, traj: &SystemTrajectory) -> Result<LQApproximation>;
}

/// Source of the derivatives used to build LQ approximations.
#[derive(Debug, Clone, Default)]
pub enum DerivativeProvider {
    /// Hand-coded Jacobians and Hessians supplied by the model and cost terms.
    Manual,
    /// Forward-mode differentiation through the integrator and cost terms.
    #[default]
    Automatic,
    Custom(Arc<dyn LinearizationPolicy>),
}

/// Serializable selector for the two built-in providers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DerivativeMode {
    #[serde(rename = "md")]
    Manual,
    #[default]
    #[serde(rename = "ad")]
    Automatic,
}

impl DerivativeMode {
    pub fn label(self) -> &'static str {
        match self {
            DerivativeMode::Manual => "MD",
            DerivativeMode::Automatic => "AD",
        }
    }
}

impl std::str::FromStr for DerivativeMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "md" | "manual" => Ok(Self::Manual),
            "ad" | "automatic" => Ok(Self::Automatic),
            other => Err(Error::Definition(format!("unknown derivative mode `{other}` (expected md or ad)"))),
        }
    }
}

impl From<DerivativeMode> for DerivativeProvider {
    fn from(mode: DerivativeMode) -> Self {
        match mode {
            DerivativeMode::Manual => DerivativeProvider::Manual,
            DerivativeMode::Automatic => DerivativeProvider::Automatic,
        }
    }
}

/// Forward-mode Jacobians of the discrete step map.
pub fn ad_step_jacobian(
    model: &dyn DynamicsModel,
    integrator: Integrator,
    x: &[f64],
    u: &[f64],
    t: f64,
    dt: f64,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let (n, m) = (x.len(), u.len());
    let mut xd: Vec<HyperDual> = x.iter().map(|&v| HyperDual::constant(v)).collect();
    let mut ud: Vec<HyperDual> = u.iter().map(|&v| HyperDual::constant(v)).collect();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, m);
    for k in 0..n + m {
        if k < n {
            xd[k].e1 = 1.0;
        } else {
            ud[k - n].e1 = 1.0;
        }
        let next = integrate(integrator, &xd, dt, |xs, out| model.eval_dual(xs, &ud, t, out));
        let column = if k < n { a.column_mut(k) } else { b.column_mut(k - n) };
        for (dst, v) in column.into_iter().zip(&next) {
            *dst = v.e1;
        }
        if k < n {
            xd[k].e1 = 0.0;
        } else {
            ud[k - n].e1 = 0.0;
        }
    }
    (a, b)
}

/// Linearization of the discrete step at a single operating point.
pub fn linearize_step(
    problem: &GameProblem,
    provider: &DerivativeProvider,
    x: &DVector<f64>,
    u: &DVector<f64>,
    k: usize,
) -> Result<LinearDynamics> {
    let (n, m) = (problem.state_dim(), problem.control_dim());
    let model = problem.dynamics();
    let t = problem.time(k);
    let (a, b) = match provider {
        DerivativeProvider::Manual => model
            .step_jacobian(problem.integrator(), x.as_slice(), u.as_slice(), t, problem.dt())
            .ok_or_else(|| Error::Definition("dynamics model provides no hand-coded Jacobian".into()))?,
        DerivativeProvider::Automatic => ad_step_jacobian(model, problem.integrator(), x.as_slice(), u.as_slice(), t, problem.dt()),
        DerivativeProvider::Custom(policy) => {
            return Err(Error::Definition(format!("custom policy {policy:?} approximates whole trajectories only")));
        }
    };
    if a.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            what: "state Jacobian",
            expected: n,
            actual: a.nrows().max(a.ncols()),
        });
    }
    if b.shape() != (n, m) {
        return Err(Error::DimensionMismatch {
            what: "input Jacobian columns",
            expected: m,
            actual: b.ncols(),
        });
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteLinearization { step: k });
    }
    Ok(LinearDynamics { a, b })
}

pub fn linearize_dynamics(
    problem: &GameProblem,
    traj: &SystemTrajectory,
    provider: &DerivativeProvider,
) -> Result<Vec<LinearDynamics>> {
    problem.check_trajectory(traj)?;
    (0..problem.horizon())
        .map(|k| linearize_step(problem, provider, &traj.states[k], &traj.controls[k], k))
        .collect()
}

/// Adds forward-mode derivatives of one term's stage cost to `out`. Only the
/// state Hessian and per-player control Hessian blocks are computed.
fn ad_stage_expansion(
    term: &dyn CostTermModel,
    partition: &ControlPartition,
    x: &[f64],
    u: &[f64],
    t: f64,
    out: &mut CostExpansion,
) {
    let n = x.len();
    let mut xd: Vec<HyperDual> = x.iter().map(|&v| HyperDual::constant(v)).collect();
    let mut ud: Vec<HyperDual> = u.iter().map(|&v| HyperDual::constant(v)).collect();

    // Seeds variable `a` on ε₁ and `b` on ε₂ (indices over [x; u]).
    let mut mixed = |a: usize, b: usize| -> HyperDual {
        let seed = |xd: &mut [HyperDual], ud: &mut [HyperDual], idx: usize, e1: f64, e2: f64| {
            let v = if idx < n { &mut xd[idx] } else { &mut ud[idx - n] };
            v.e1 += e1;
            v.e2 += e2;
        };
        seed(&mut xd, &mut ud, a, 1.0, 0.0);
        seed(&mut xd, &mut ud, b, 0.0, 1.0);
        let value = term.stage_dual(&xd, &ud, t);
        seed(&mut xd, &mut ud, a, -1.0, 0.0);
        seed(&mut xd, &mut ud, b, 0.0, -1.0);
        value
    };

    for a in 0..n {
        let d = mixed(a, a);
        out.grad_x[a] += d.e1;
        out.hess_x[(a, a)] += d.e12;
        for b in a + 1..n {
            let h = mixed(a, b).e12;
            out.hess_x[(a, b)] += h;
            out.hess_x[(b, a)] += h;
        }
    }
    for j in 0..partition.num_players() {
        let range = partition.range(j);
        for a in range.clone() {
            let d = mixed(n + a, n + a);
            out.grad_u[a] += d.e1;
            out.hess_u[(a, a)] += d.e12;
            for b in a + 1..range.end {
                let h = mixed(n + a, n + b).e12;
                out.hess_u[(a, b)] += h;
                out.hess_u[(b, a)] += h;
            }
        }
    }
}

fn ad_terminal_expansion(term: &dyn CostTermModel, x: &[f64], grad: &mut DVector<f64>, hess: &mut DMatrix<f64>) {
    let n = x.len();
    let mut xd: Vec<HyperDual> = x.iter().map(|&v| HyperDual::constant(v)).collect();
    for a in 0..n {
        for b in a..n {
            xd[a].e1 += 1.0;
            xd[b].e2 += 1.0;
            let d = term.terminal_dual(&xd);
            xd[a].e1 -= 1.0;
            xd[b].e2 -= 1.0;
            if a == b {
                grad[a] += d.e1;
                hess[(a, a)] += d.e12;
            } else {
                hess[(a, b)] += d.e12;
                hess[(b, a)] += d.e12;
            }
        }
    }
}

/// Symmetrizes `m` and raises its smallest eigenvalue to `floor` by a
/// uniform diagonal shift. Returns the shift applied.
///
/// Rows and columns that are identically zero contribute eigenvalue zero, so
/// the eigenvalue problem is solved only on the remaining support.
pub fn regularize(m: &mut DMatrix<f64>, floor: f64) -> f64 {
    let n = m.nrows();
    let sym = (&*m + m.transpose()) * 0.5;
    *m = sym;
    let support: Vec<usize> = (0..n).filter(|&i| m.row(i).iter().any(|&v| v != 0.0)).collect();
    let mut lambda_min = if support.len() < n { 0.0 } else { f64::INFINITY };
    let mut scale = 1.0f64;
    if !support.is_empty() {
        let sub = m.select_rows(&support).select_columns(&support);
        let eigs = sub.symmetric_eigenvalues();
        scale = scale.max(eigs.amax());
        lambda_min = lambda_min.min(eigs.min());
    }
    // Eigenvalue round-off must not perturb matrices that already satisfy
    // the floor.
    if lambda_min < floor - 1e-12 * scale {
        let shift = floor - lambda_min;
        for i in 0..n {
            m[(i, i)] += shift;
        }
        shift
    } else {
        0.0
    }
}

/// Raw gradient and Hessian of player `i`'s stage cost at step `k`, before
/// Δt scaling and regularization.
pub fn stage_expansion(
    problem: &GameProblem,
    provider: &DerivativeProvider,
    player: usize,
    x: &DVector<f64>,
    u: &DVector<f64>,
    k: usize,
) -> Result<CostExpansion> {
    let (n, m) = (problem.state_dim(), problem.control_dim());
    let partition = problem.partition();
    let t = problem.time(k);
    let mut exp = CostExpansion::zeros(n, m);
    for term in problem.costs()[player].terms() {
        match provider {
            DerivativeProvider::Manual => {
                if !term.add_stage_expansion(x.as_slice(), u.as_slice(), t, &mut exp) {
                    return Err(Error::Definition(format!(
                        "cost term `{}` of player {player} has no hand-coded derivatives",
                        term.name()
                    )));
                }
            }
            DerivativeProvider::Automatic => {
                ad_stage_expansion(term.as_ref(), partition, x.as_slice(), u.as_slice(), t, &mut exp);
            }
            DerivativeProvider::Custom(_) => {
                return Err(Error::Definition("custom policies approximate whole trajectories only".into()));
            }
        }
        if exp.grad_x.len() != n || exp.hess_x.shape() != (n, n) || exp.grad_u.len() != m || exp.hess_u.shape() != (m, m) {
            return Err(Error::Definition(format!("cost term `{}` changed the expansion dimensions", term.name())));
        }
        if !exp.is_finite() {
            return Err(Error::NonFiniteDerivative {
                player,
                step: k,
                term: term.name().to_string(),
            });
        }
    }
    Ok(exp)
}

/// Quadratic model of player `i`'s Δt-scaled stage cost at one operating point.
pub fn quadraticize_stage(
    problem: &GameProblem,
    provider: &DerivativeProvider,
    player: usize,
    x: &DVector<f64>,
    u: &DVector<f64>,
    k: usize,
) -> Result<QuadraticPlayerCost> {
    let partition = problem.partition();
    let exp = stage_expansion(problem, provider, player, x, u, k)?;
    let dt = problem.dt();
    let mut q = exp.hess_x * dt;
    regularize(&mut q, STATE_HESSIAN_FLOOR);
    let mut r = Vec::with_capacity(partition.num_players());
    let mut r_lin = Vec::with_capacity(partition.num_players());
    for j in 0..partition.num_players() {
        let range = partition.range(j);
        let mut block = exp.hess_u.view((range.start, range.start), (range.len(), range.len())) * dt;
        if j == player {
            regularize(&mut block, CONTROL_HESSIAN_FLOOR);
        } else {
            block = (&block + block.transpose()) * 0.5;
        }
        r.push(block);
        r_lin.push(exp.grad_u.rows(range.start, range.len()) * dt);
    }
    Ok(QuadraticPlayerCost {
        q,
        l: exp.grad_x * dt,
        r,
        r_lin,
    })
}

pub fn quadraticize_terminal(
    problem: &GameProblem,
    provider: &DerivativeProvider,
    player: usize,
    x: &DVector<f64>,
) -> Result<TerminalQuadratic> {
    let n = problem.state_dim();
    let mut grad = DVector::zeros(n);
    let mut hess = DMatrix::zeros(n, n);
    for term in problem.costs()[player].terms() {
        match provider {
            DerivativeProvider::Manual => {
                if !term.add_terminal_expansion(x.as_slice(), &mut grad, &mut hess) {
                    return Err(Error::Definition(format!(
                        "cost term `{}` of player {player} has no hand-coded terminal derivatives",
                        term.name()
                    )));
                }
            }
            DerivativeProvider::Automatic => ad_terminal_expansion(term.as_ref(), x.as_slice(), &mut grad, &mut hess),
            DerivativeProvider::Custom(_) => {
                return Err(Error::Definition("custom policies approximate whole trajectories only".into()));
            }
        }
        if grad.iter().chain(hess.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteDerivative {
                player,
                step: problem.horizon(),
                term: term.name().to_string(),
            });
        }
    }
    regularize(&mut hess, STATE_HESSIAN_FLOOR);
    Ok(TerminalQuadratic { q: hess, l: grad })
}

/// Stage quadratizations per timestep (outer) and player (inner), plus the
/// terminal quadratizations.
pub fn quadraticize_costs(
    problem: &GameProblem,
    traj: &SystemTrajectory,
    provider: &DerivativeProvider,
) -> Result<(Vec<Vec<QuadraticPlayerCost>>, Vec<TerminalQuadratic>)> {
    problem.check_trajectory(traj)?;
    let players = problem.num_players();
    let stages = (0..problem.horizon())
        .map(|k| {
            (0..players)
                .map(|i| quadraticize_stage(problem, provider, i, &traj.states[k], &traj.controls[k], k))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let x_final = &traj.states[problem.horizon()];
    let terminal = (0..players)
        .map(|i| quadraticize_terminal(problem, provider, i, x_final))
        .collect::<Result<Vec<_>>>()?;
    Ok((stages, terminal))
}

/// Full LQ approximation of `problem` about `traj`.
pub fn lq_approximate(problem: &GameProblem, traj: &SystemTrajectory, provider: &DerivativeProvider) -> Result<LQApproximation> {
    if let DerivativeProvider::Custom(policy) = provider {
        let approx = policy.lq_approximate(problem, traj)?;
        approx.validate()?;
        return Ok(approx);
    }
    let dynamics = linearize_dynamics(problem, traj, provider)?;
    let (costs, terminal) = quadraticize_costs(problem, traj, provider)?;
    Ok(LQApproximation {
        partition: problem.partition().clone(),
        stages: dynamics
            .into_iter()
            .zip(costs)
            .map(|(dynamics, costs)| LqStage { dynamics, costs })
            .collect(),
        terminal,
    })
}
