//! Continuous-time game dynamics and their discretization.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::scalar::{HyperDual, Scalar};

/// Maps each player to its contiguous block of the stacked control vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlPartition {
    dims: Vec<usize>,
    offsets: Vec<usize>,
}

impl ControlPartition {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Definition("a game needs at least one player".into()));
        }
        if let Some(i) = dims.iter().position(|&d| d == 0) {
            return Err(Error::Definition(format!("player {i} has no controls")));
        }
        let offsets = dims
            .iter()
            .scan(0, |acc, &d| {
                let off = *acc;
                *acc += d;
                Some(off)
            })
            .collect();
        Ok(Self { dims, offsets })
    }

    pub fn num_players(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, player: usize) -> usize {
        self.dims[player]
    }

    pub fn offset(&self, player: usize) -> usize {
        self.offsets[player]
    }

    pub fn range(&self, player: usize) -> std::ops::Range<usize> {
        self.offsets[player]..self.offsets[player] + self.dims[player]
    }

    /// Total stacked control dimension.
    pub fn total(&self) -> usize {
        self.dims.iter().sum()
    }
}

/// Fixed-step integration scheme used for the discrete game map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    /// Classic fourth-order Runge–Kutta with zero-order-hold controls.
    #[default]
    Rk4,
    Euler,
}

/// A continuous-time vector field `ẋ = f(x, u, t)` written once for any
/// [`Scalar`], so it can be evaluated and differentiated by the same code.
///
/// Implementors get [`DynamicsModel`] for free. Built-in models ignore `t`.
pub trait VectorField: Debug + Send + Sync {
    fn state_dim(&self) -> usize;

    /// Control dimension of every player that acts on this field.
    fn control_dims(&self) -> &[usize];

    fn eval<S: Scalar>(&self, x: &[S], u: &[S], t: f64, xdot: &mut [S]);

    /// Hand-coded Jacobians `(∂f/∂x, ∂f/∂u)` of the continuous field, if
    /// available. Used by the manual derivative provider.
    fn jacobian(&self, _x: &[f64], _u: &[f64], _t: f64) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        None
    }
}

/// Object-safe view of a dynamics model, as stored in a [`crate::GameProblem`].
pub trait DynamicsModel: Debug + Send + Sync {
    fn state_dim(&self) -> usize;
    fn control_dims(&self) -> &[usize];
    fn eval(&self, x: &[f64], u: &[f64], t: f64, xdot: &mut [f64]);
    fn eval_dual(&self, x: &[HyperDual], u: &[HyperDual], t: f64, xdot: &mut [HyperDual]);
    fn jacobian(&self, x: &[f64], u: &[f64], t: f64) -> Option<(DMatrix<f64>, DMatrix<f64>)>;

    /// Jacobians of the discrete step map with respect to state and stacked
    /// controls, built from [`DynamicsModel::jacobian`] by the chain rule
    /// through the integrator. Models with exploitable structure override it.
    fn step_jacobian(
        &self,
        integrator: Integrator,
        x: &[f64],
        u: &[f64],
        t: f64,
        dt: f64,
    ) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        chain_rule_step_jacobian(self, integrator, x, u, t, dt)
    }
}

impl<V: VectorField> DynamicsModel for V {
    fn state_dim(&self) -> usize {
        VectorField::state_dim(self)
    }
    fn control_dims(&self) -> &[usize] {
        VectorField::control_dims(self)
    }
    fn eval(&self, x: &[f64], u: &[f64], t: f64, xdot: &mut [f64]) {
        VectorField::eval(self, x, u, t, xdot)
    }
    fn eval_dual(&self, x: &[HyperDual], u: &[HyperDual], t: f64, xdot: &mut [HyperDual]) {
        VectorField::eval(self, x, u, t, xdot)
    }
    fn jacobian(&self, x: &[f64], u: &[f64], t: f64) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        VectorField::jacobian(self, x, u, t)
    }
}

/// Advances `x` by one step of `dt` under `field` (controls held constant).
pub fn integrate<S: Scalar>(
    integrator: Integrator,
    x: &[S],
    dt: f64,
    mut field: impl FnMut(&[S], &mut [S]),
) -> Vec<S> {
    let n = x.len();
    let mut k1 = vec![S::zero(); n];
    field(x, &mut k1);
    match integrator {
        Integrator::Euler => x.iter().zip(&k1).map(|(&xi, &ki)| xi + ki * dt).collect(),
        Integrator::Rk4 => {
            let mut k2 = vec![S::zero(); n];
            let mut k3 = vec![S::zero(); n];
            let mut k4 = vec![S::zero(); n];
            let mut tmp: Vec<S> = x.iter().zip(&k1).map(|(&xi, &k)| xi + k * (0.5 * dt)).collect();
            field(&tmp, &mut k2);
            for i in 0..n {
                tmp[i] = x[i] + k2[i] * (0.5 * dt);
            }
            field(&tmp, &mut k3);
            for i in 0..n {
                tmp[i] = x[i] + k3[i] * dt;
            }
            field(&tmp, &mut k4);
            (0..n)
                .map(|i| x[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0))
                .collect()
        }
    }
}

fn chain_rule_step_jacobian<M: DynamicsModel + ?Sized>(
    model: &M,
    integrator: Integrator,
    x: &[f64],
    u: &[f64],
    t: f64,
    dt: f64,
) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
    let n = x.len();
    let (fx1, fu1) = model.jacobian(x, u, t)?;
    match integrator {
        Integrator::Euler => {
            let a = DMatrix::identity(n, n) + fx1 * dt;
            Some((a, fu1 * dt))
        }
        Integrator::Rk4 => {
            // Propagate d(stage point)/d(x, u) through the four stages.
            let mut k = vec![0.0; n];
            let mut kx = fx1;
            let mut ku = fu1;
            model.eval(x, u, t, &mut k);
            let mut sum_x = kx.clone();
            let mut sum_u = ku.clone();
            for (stage, (h, w)) in [(0.5 * dt, 2.0), (0.5 * dt, 2.0), (dt, 1.0)].into_iter().enumerate() {
                let xs: Vec<f64> = x.iter().zip(&k).map(|(&xi, &ki)| xi + h * ki).collect();
                let (fx, fu) = model.jacobian(&xs, u, t)?;
                let dxs_dx = DMatrix::identity(n, n) + &kx * h;
                let dxs_du = &ku * h;
                kx = &fx * dxs_dx;
                ku = &fx * dxs_du + fu;
                sum_x += &kx * w;
                sum_u += &ku * w;
                if stage < 2 {
                    model.eval(&xs, u, t, &mut k);
                }
            }
            let a = DMatrix::identity(n, n) + sum_x * (dt / 6.0);
            let b = sum_u * (dt / 6.0);
            Some((a, b))
        }
    }
}

/// Joint dynamics formed by stacking independent subsystems.
///
/// Subsystem `k` owns a contiguous block of the joint state (in order) and
/// the controls of the players it declares, also in order.
#[derive(Debug, Clone)]
pub struct ProductSystem {
    subsystems: Vec<Arc<dyn DynamicsModel>>,
    state_offsets: Vec<usize>,
    control_offsets: Vec<usize>,
    state_dim: usize,
    control_dims: Vec<usize>,
}

impl ProductSystem {
    pub fn new(subsystems: Vec<Arc<dyn DynamicsModel>>) -> Result<Self> {
        if subsystems.is_empty() {
            return Err(Error::Definition("product system without subsystems".into()));
        }
        let mut state_offsets = Vec::with_capacity(subsystems.len());
        let mut control_offsets = Vec::with_capacity(subsystems.len());
        let mut control_dims = Vec::new();
        let (mut n, mut m) = (0, 0);
        for sub in &subsystems {
            state_offsets.push(n);
            control_offsets.push(m);
            n += sub.state_dim();
            m += sub.control_dims().iter().sum::<usize>();
            control_dims.extend_from_slice(sub.control_dims());
        }
        Ok(Self {
            subsystems,
            state_offsets,
            control_offsets,
            state_dim: n,
            control_dims,
        })
    }

    pub fn subsystems(&self) -> &[Arc<dyn DynamicsModel>] {
        &self.subsystems
    }

    /// Offset of subsystem `k`'s block within the joint state.
    pub fn state_offset(&self, k: usize) -> usize {
        self.state_offsets[k]
    }

    fn blocks(&self) -> impl Iterator<Item = (&Arc<dyn DynamicsModel>, std::ops::Range<usize>, std::ops::Range<usize>)> {
        self.subsystems.iter().enumerate().map(|(k, sub)| {
            let xs = self.state_offsets[k];
            let us = self.control_offsets[k];
            let m: usize = sub.control_dims().iter().sum();
            (sub, xs..xs + sub.state_dim(), us..us + m)
        })
    }
}

impl DynamicsModel for ProductSystem {
    fn state_dim(&self) -> usize {
        self.state_dim
    }

    fn control_dims(&self) -> &[usize] {
        &self.control_dims
    }

    fn eval(&self, x: &[f64], u: &[f64], t: f64, xdot: &mut [f64]) {
        for (sub, xr, ur) in self.blocks() {
            sub.eval(&x[xr.clone()], &u[ur], t, &mut xdot[xr]);
        }
    }

    fn eval_dual(&self, x: &[HyperDual], u: &[HyperDual], t: f64, xdot: &mut [HyperDual]) {
        for (sub, xr, ur) in self.blocks() {
            sub.eval_dual(&x[xr.clone()], &u[ur], t, &mut xdot[xr]);
        }
    }

    fn jacobian(&self, x: &[f64], u: &[f64], t: f64) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        let mut fx = DMatrix::zeros(self.state_dim, self.state_dim);
        let mut fu = DMatrix::zeros(self.state_dim, u.len());
        for (sub, xr, ur) in self.blocks() {
            let (a, b) = sub.jacobian(&x[xr.clone()], &u[ur.clone()], t)?;
            fx.view_mut((xr.start, xr.start), (xr.len(), xr.len())).copy_from(&a);
            fu.view_mut((xr.start, ur.start), (xr.len(), ur.len())).copy_from(&b);
        }
        Some((fx, fu))
    }

    /// Block-diagonal: each subsystem's discrete step depends only on its
    /// own state and controls, so the joint Jacobian is assembled blockwise.
    fn step_jacobian(
        &self,
        integrator: Integrator,
        x: &[f64],
        u: &[f64],
        t: f64,
        dt: f64,
    ) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        let mut a = DMatrix::zeros(self.state_dim, self.state_dim);
        let mut b = DMatrix::zeros(self.state_dim, u.len());
        for (sub, xr, ur) in self.blocks() {
            let (sa, sb) = sub.step_jacobian(integrator, &x[xr.clone()], &u[ur.clone()], t, dt)?;
            a.view_mut((xr.start, xr.start), (xr.len(), xr.len())).copy_from(&sa);
            b.view_mut((xr.start, ur.start), (xr.len(), ur.len())).copy_from(&sb);
        }
        Some((a, b))
    }
}

/// Evaluates `ẋ = f(x, u, t)`.
pub fn evaluate_dynamics(
    model: &dyn DynamicsModel,
    x: &DVector<f64>,
    u: &DVector<f64>,
    t: f64,
) -> Result<DVector<f64>> {
    check_dim("state", model.state_dim(), x.len())?;
    check_dim("controls", model.control_dims().iter().sum(), u.len())?;
    let mut xdot = DVector::zeros(x.len());
    model.eval(x.as_slice(), u.as_slice(), t, xdot.as_mut_slice());
    Ok(xdot)
}

/// One discrete step of the game map from timestep `step` (time `step·dt`).
pub fn discretize_step(
    model: &dyn DynamicsModel,
    integrator: Integrator,
    x: &DVector<f64>,
    u: &DVector<f64>,
    step: usize,
    dt: f64,
) -> Result<DVector<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Definition(format!("timestep must be positive, got {dt}")));
    }
    check_dim("state", model.state_dim(), x.len())?;
    check_dim("controls", model.control_dims().iter().sum(), u.len())?;
    let next = step_unchecked(model, integrator, x.as_slice(), u.as_slice(), step as f64 * dt, dt);
    if next.iter().all(|v| v.is_finite()) {
        Ok(DVector::from_vec(next))
    } else {
        Err(Error::NonFiniteState { step })
    }
}

pub(crate) fn step_unchecked(
    model: &dyn DynamicsModel,
    integrator: Integrator,
    x: &[f64],
    u: &[f64],
    t: f64,
    dt: f64,
) -> Vec<f64> {
    integrate(integrator, x, dt, |xs, out| model.eval(xs, u, t, out))
}
