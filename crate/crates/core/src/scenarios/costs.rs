//! Built-in cost terms and linear dynamics. Every term carries hand-coded
//! derivatives for the manual provider.

use std::ops::Range;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::cost::{CostExpansion, CostTerm};
use crate::dynamics::VectorField;
use crate::scalar::Scalar;

/// Proximity penalty `w·(d̄ − d)²` for `d < d̄`, zero beyond, where `d` is
/// the planar distance between the positions starting at `own` and `other`.
pub fn proximity_cost<S: Scalar>(x: &[S], own: usize, other: usize, radius: f64, weight: f64) -> S {
    let dx = x[own] - x[other];
    let dy = x[own + 1] - x[other + 1];
    let d = (dx * dx + dy * dy).sqrt();
    if d.value() < radius {
        (-d + radius).square() * weight
    } else {
        S::zero()
    }
}

/// `w·‖p − goal‖²` once `t ≥ t_activate`, zero before.
pub fn goal_cost<S: Scalar>(x: &[S], position: usize, goal: [f64; 2], weight: f64, t: f64, t_activate: f64) -> S {
    if t + 1e-9 >= t_activate {
        ((x[position] - goal[0]).square() + (x[position + 1] - goal[1]).square()) * weight
    } else {
        S::zero()
    }
}

/// `½ uᵀ W u`.
pub fn input_cost<S: Scalar>(u: &[S], w: &DMatrix<f64>) -> S {
    let mut acc = S::zero();
    for i in 0..u.len() {
        for j in 0..u.len() {
            if w[(i, j)] != 0.0 {
                acc += u[i] * u[j] * w[(i, j)];
            }
        }
    }
    acc * 0.5
}

/// Squared hinge keeping `x[index]` inside `[lower, upper]`.
fn band_penalty<S: Scalar>(v: S, lower: f64, upper: f64, weight: f64) -> S {
    if v.value() > upper {
        (v - upper).square() * weight
    } else if v.value() < lower {
        (v - lower).square() * weight
    } else {
        S::zero()
    }
}

fn band_derivatives(v: f64, lower: f64, upper: f64, weight: f64) -> (f64, f64) {
    if v > upper {
        (2.0 * weight * (v - upper), 2.0 * weight)
    } else if v < lower {
        (2.0 * weight * (v - lower), 2.0 * weight)
    } else {
        (0.0, 0.0)
    }
}

fn quadratic_form<S: Scalar>(x: &[S], target: &DVector<f64>, q: &DMatrix<f64>) -> S {
    let mut acc = S::zero();
    for i in 0..x.len() {
        let di = x[i] - target[i];
        for j in 0..x.len() {
            if q[(i, j)] != 0.0 {
                acc += di * (x[j] - target[j]) * q[(i, j)];
            }
        }
    }
    acc * 0.5
}

/// `½(x − x*)ᵀQ(x − x*)` per unit time, with an optional terminal weight.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticStateCost {
    pub q: DMatrix<f64>,
    pub target: DVector<f64>,
    pub terminal_q: Option<DMatrix<f64>>,
}

impl QuadraticStateCost {
    pub fn new(q: DMatrix<f64>, target: DVector<f64>) -> Self {
        Self { q, target, terminal_q: None }
    }

    pub fn with_terminal(mut self, terminal_q: DMatrix<f64>) -> Self {
        self.terminal_q = Some(terminal_q);
        self
    }
}

impl CostTerm for QuadraticStateCost {
    fn name(&self) -> &str {
        "state"
    }

    fn stage<S: Scalar>(&self, x: &[S], _u: &[S], _t: f64) -> S {
        quadratic_form(x, &self.target, &self.q)
    }

    fn terminal<S: Scalar>(&self, x: &[S]) -> S {
        match &self.terminal_q {
            Some(q) => quadratic_form(x, &self.target, q),
            None => S::zero(),
        }
    }

    fn add_stage_expansion(&self, x: &[f64], _u: &[f64], _t: f64, out: &mut CostExpansion) -> bool {
        let sym = (&self.q + self.q.transpose()) * 0.5;
        let dx = DVector::from_column_slice(x) - &self.target;
        out.grad_x += &sym * dx;
        out.hess_x += sym;
        true
    }

    fn add_terminal_expansion(&self, x: &[f64], grad: &mut DVector<f64>, hess: &mut DMatrix<f64>) -> bool {
        if let Some(q) = &self.terminal_q {
            let sym = (q + q.transpose()) * 0.5;
            let dx = DVector::from_column_slice(x) - &self.target;
            *grad += &sym * dx;
            *hess += sym;
        }
        true
    }
}

/// Control effort `½ u_iᵀ W u_i` of the player owning `controls`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputCost {
    pub controls: Range<usize>,
    pub w: DMatrix<f64>,
}

impl InputCost {
    pub fn new(controls: Range<usize>, w: DMatrix<f64>) -> Self {
        assert_eq!(w.shape(), (controls.len(), controls.len()), "input weight must match the player's controls");
        Self { controls, w }
    }
}

impl CostTerm for InputCost {
    fn name(&self) -> &str {
        "input"
    }

    fn stage<S: Scalar>(&self, _x: &[S], u: &[S], _t: f64) -> S {
        input_cost(&u[self.controls.clone()], &self.w)
    }

    fn add_stage_expansion(&self, _x: &[f64], u: &[f64], _t: f64, out: &mut CostExpansion) -> bool {
        let (s, k) = (self.controls.start, self.controls.len());
        let sym = (&self.w + self.w.transpose()) * 0.5;
        let ui = DVector::from_column_slice(&u[self.controls.clone()]);
        let mut g = out.grad_u.rows_mut(s, k);
        g += &sym * ui;
        let mut h = out.hess_u.view_mut((s, s), (k, k));
        h += sym;
        true
    }

    fn add_terminal_expansion(&self, _x: &[f64], _grad: &mut DVector<f64>, _hess: &mut DMatrix<f64>) -> bool {
        true
    }
}

/// Goal attraction: activation-ramped running cost plus a terminal cost.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalCost {
    /// State index of the player's `p_x` (`p_y` follows).
    pub position: usize,
    pub goal: [f64; 2],
    pub weight: f64,
    /// Time in seconds from which the running cost is charged.
    pub activation_time: f64,
    pub terminal_weight: f64,
}

impl CostTerm for GoalCost {
    fn name(&self) -> &str {
        "goal"
    }

    fn stage<S: Scalar>(&self, x: &[S], _u: &[S], t: f64) -> S {
        goal_cost(x, self.position, self.goal, self.weight, t, self.activation_time)
    }

    fn terminal<S: Scalar>(&self, x: &[S]) -> S {
        goal_cost(x, self.position, self.goal, self.terminal_weight, 0.0, 0.0)
    }

    fn add_stage_expansion(&self, x: &[f64], _u: &[f64], t: f64, out: &mut CostExpansion) -> bool {
        if t + 1e-9 >= self.activation_time {
            add_goal_derivatives(x, self.position, self.goal, self.weight, &mut out.grad_x, &mut out.hess_x);
        }
        true
    }

    fn add_terminal_expansion(&self, x: &[f64], grad: &mut DVector<f64>, hess: &mut DMatrix<f64>) -> bool {
        add_goal_derivatives(x, self.position, self.goal, self.terminal_weight, grad, hess);
        true
    }
}

fn add_goal_derivatives(x: &[f64], p: usize, goal: [f64; 2], weight: f64, grad: &mut DVector<f64>, hess: &mut DMatrix<f64>) {
    for (k, g) in goal.iter().enumerate() {
        grad[p + k] += 2.0 * weight * (x[p + k] - g);
        hess[(p + k, p + k)] += 2.0 * weight;
    }
}

/// Sum of squared-hinge proximity penalties between one player and others.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityCost {
    /// State index of this player's `p_x`.
    pub own: usize,
    /// State indices of the other players' `p_x`.
    pub others: Vec<usize>,
    pub radius: f64,
    pub weight: f64,
}

impl ProximityCost {
    pub fn new(own: usize, others: Vec<usize>, radius: f64, weight: f64) -> Self {
        Self { own, others, radius, weight }
    }
}

impl CostTerm for ProximityCost {
    fn name(&self) -> &str {
        "proximity"
    }

    fn stage<S: Scalar>(&self, x: &[S], _u: &[S], _t: f64) -> S {
        let mut acc = S::zero();
        for &other in &self.others {
            acc += proximity_cost(x, self.own, other, self.radius, self.weight);
        }
        acc
    }

    fn add_stage_expansion(&self, x: &[f64], _u: &[f64], _t: f64, out: &mut CostExpansion) -> bool {
        let (w, radius) = (self.weight, self.radius);
        for &other in &self.others {
            let delta = Vector2::new(x[self.own] - x[other], x[self.own + 1] - x[other + 1]);
            let d = delta.norm();
            if d >= radius {
                continue;
            }
            // c(δ) = w(d̄ − d)²: ∇ = −2w(d̄ − d)·n, ∇² = 2w[nnᵀ − (d̄ − d)/d·(I − nnᵀ)].
            let n = delta / d;
            let nn = n * n.transpose();
            let grad = n * (-2.0 * w * (radius - d));
            let hess = (nn - (Matrix2::identity() - nn) * ((radius - d) / d)) * (2.0 * w);
            for (idx, sign) in [(self.own, 1.0), (other, -1.0)] {
                out.grad_x[idx] += sign * grad[0];
                out.grad_x[idx + 1] += sign * grad[1];
            }
            for (a, sa) in [(self.own, 1.0), (other, -1.0)] {
                for (b, sb) in [(self.own, 1.0), (other, -1.0)] {
                    let mut block = out.hess_x.view_mut((a, b), (2, 2));
                    block += hess * (sa * sb);
                }
            }
        }
        true
    }

    fn add_terminal_expansion(&self, _x: &[f64], _grad: &mut DVector<f64>, _hess: &mut DMatrix<f64>) -> bool {
        true
    }
}

/// Squared-hinge penalty keeping one state coordinate inside a band, used
/// for corridor walls (`p_y`) and speed bounds (`v`).
#[derive(Debug, Clone, PartialEq)]
pub struct BandCost {
    pub label: &'static str,
    pub index: usize,
    pub lower: f64,
    pub upper: f64,
    pub weight: f64,
}

impl BandCost {
    pub fn wall(py: usize, y_min: f64, y_max: f64, weight: f64) -> Self {
        Self {
            label: "wall",
            index: py,
            lower: y_min,
            upper: y_max,
            weight,
        }
    }

    pub fn speed(v: usize, v_min: f64, v_max: f64, weight: f64) -> Self {
        Self {
            label: "speed",
            index: v,
            lower: v_min,
            upper: v_max,
            weight,
        }
    }
}

impl CostTerm for BandCost {
    fn name(&self) -> &str {
        self.label
    }

    fn stage<S: Scalar>(&self, x: &[S], _u: &[S], _t: f64) -> S {
        band_penalty(x[self.index], self.lower, self.upper, self.weight)
    }

    fn add_stage_expansion(&self, x: &[f64], _u: &[f64], _t: f64, out: &mut CostExpansion) -> bool {
        let (g, h) = band_derivatives(x[self.index], self.lower, self.upper, self.weight);
        out.grad_x[self.index] += g;
        out.hess_x[(self.index, self.index)] += h;
        true
    }

    fn add_terminal_expansion(&self, _x: &[f64], _grad: &mut DVector<f64>, _hess: &mut DMatrix<f64>) -> bool {
        true
    }
}

/// Linear time-invariant field `ẋ = A x + B u`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    control_dims: Vec<usize>,
}

impl LinearSystem {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, control_dims: Vec<usize>) -> Self {
        assert!(a.is_square() && a.nrows() == b.nrows(), "A must be n×n and B n×m");
        assert_eq!(control_dims.iter().sum::<usize>(), b.ncols(), "control partition must cover B");
        Self { a, b, control_dims }
    }
}

impl VectorField for LinearSystem {
    fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    fn control_dims(&self) -> &[usize] {
        &self.control_dims
    }

    fn eval<S: Scalar>(&self, x: &[S], u: &[S], _t: f64, xdot: &mut [S]) {
        for (i, out) in xdot.iter_mut().enumerate() {
            let mut acc = S::zero();
            for (j, &xj) in x.iter().enumerate() {
                if self.a[(i, j)] != 0.0 {
                    acc += xj * self.a[(i, j)];
                }
            }
            for (j, &uj) in u.iter().enumerate() {
                if self.b[(i, j)] != 0.0 {
                    acc += uj * self.b[(i, j)];
                }
            }
            *out = acc;
        }
    }

    fn jacobian(&self, _x: &[f64], _u: &[f64], _t: f64) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        Some((self.a.clone(), self.b.clone()))
    }
}
