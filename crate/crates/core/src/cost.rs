//! Per-player cost functions, built as sums of named terms.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::scalar::{HyperDual, Scalar};

/// Second-order data of a stage cost around an operating point. Cross
/// derivatives between state and controls are not represented.
#[derive(Debug, Clone, PartialEq)]
pub struct CostExpansion {
    pub grad_x: DVector<f64>,
    pub hess_x: DMatrix<f64>,
    pub grad_u: DVector<f64>,
    /// Full control Hessian over the stacked controls; only its per-player
    /// diagonal blocks enter the LQ game.
    pub hess_u: DMatrix<f64>,
}

impl CostExpansion {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            grad_x: DVector::zeros(n),
            hess_x: DMatrix::zeros(n, n),
            grad_u: DVector::zeros(m),
            hess_u: DMatrix::zeros(m, m),
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.grad_x.as_slice(), self.hess_x.as_slice(), self.grad_u.as_slice(), self.hess_u.as_slice()]
            .iter()
            .all(|block| block.iter().all(|v| v.is_finite()))
    }
}

/// One additive term of a player's cost, generic over [`Scalar`].
///
/// `stage` is the running cost per unit time (the game scales it by the
/// timestep); `terminal` is charged once at the final state.
pub trait CostTerm: Debug + Send + Sync {
    /// Short identifier used in diagnostics.
    fn name(&self) -> &str;

    fn stage<S: Scalar>(&self, x: &[S], u: &[S], t: f64) -> S;

    fn terminal<S: Scalar>(&self, _x: &[S]) -> S {
        S::zero()
    }

    /// Adds hand-coded derivatives of `stage` at `(x, u, t)` to `out`.
    /// Returns `false` when the term has none.
    fn add_stage_expansion(&self, _x: &[f64], _u: &[f64], _t: f64, _out: &mut CostExpansion) -> bool {
        false
    }

    /// Adds hand-coded gradient and Hessian of `terminal` at `x`.
    fn add_terminal_expansion(&self, _x: &[f64], _grad: &mut DVector<f64>, _hess: &mut DMatrix<f64>) -> bool {
        false
    }
}

/// Object-safe view of a [`CostTerm`].
pub trait CostTermModel: Debug + Send + Sync {
    fn name(&self) -> &str;
    fn stage(&self, x: &[f64], u: &[f64], t: f64) -> f64;
    fn stage_dual(&self, x: &[HyperDual], u: &[HyperDual], t: f64) -> HyperDual;
    fn terminal(&self, x: &[f64]) -> f64;
    fn terminal_dual(&self, x: &[HyperDual]) -> HyperDual;
    fn add_stage_expansion(&self, x: &[f64], u: &[f64], t: f64, out: &mut CostExpansion) -> bool;
    fn add_terminal_expansion(&self, x: &[f64], grad: &mut DVector<f64>, hess: &mut DMatrix<f64>) -> bool;
}

impl<C: CostTerm> CostTermModel for C {
    fn name(&self) -> &str {
        CostTerm::name(self)
    }
    fn stage(&self, x: &[f64], u: &[f64], t: f64) -> f64 {
        CostTerm::stage(self, x, u, t)
    }
    fn stage_dual(&self, x: &[HyperDual], u: &[HyperDual], t: f64) -> HyperDual {
        CostTerm::stage(self, x, u, t)
    }
    fn terminal(&self, x: &[f64]) -> f64 {
        CostTerm::terminal(self, x)
    }
    fn terminal_dual(&self, x: &[HyperDual]) -> HyperDual {
        CostTerm::terminal(self, x)
    }
    fn add_stage_expansion(&self, x: &[f64], u: &[f64], t: f64, out: &mut CostExpansion) -> bool {
        CostTerm::add_stage_expansion(self, x, u, t, out)
    }
    fn add_terminal_expansion(&self, x: &[f64], grad: &mut DVector<f64>, hess: &mut DMatrix<f64>) -> bool {
        CostTerm::add_terminal_expansion(self, x, grad, hess)
    }
}

/// A player's objective: the sum of its terms.
#[derive(Debug, Clone, Default)]
pub struct PlayerCost {
    terms: Vec<Arc<dyn CostTermModel>>,
}

impl PlayerCost {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, term: impl CostTermModel + 'static) -> Self {
        self.terms.push(Arc::new(term));
        self
    }

    pub fn push(&mut self, term: Arc<dyn CostTermModel>) {
        self.terms.push(term);
    }

    pub fn terms(&self) -> &[Arc<dyn CostTermModel>] {
        &self.terms
    }

    /// Running cost per unit time.
    pub fn stage(&self, x: &[f64], u: &[f64], t: f64) -> f64 {
        self.terms.iter().map(|term| term.stage(x, u, t)).sum()
    }

    pub fn terminal(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|term| term.terminal(x)).sum()
    }
}
