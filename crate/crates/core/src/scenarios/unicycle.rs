use nalgebra::DMatrix;

use crate::dynamics::VectorField;
use crate::scalar::Scalar;

/// Planar unicycle with state `(p_x, p_y, θ, v)` and controls `(ω, a)`:
/// `ẋ = (v cos θ, v sin θ, ω, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Unicycle;

impl Unicycle {
    pub const STATE_DIM: usize = 4;
    pub const CONTROL_DIM: usize = 2;
}

impl VectorField for Unicycle {
    fn state_dim(&self) -> usize {
        Self::STATE_DIM
    }

    fn control_dims(&self) -> &[usize] {
        &[Self::CONTROL_DIM]
    }

    fn eval<S: Scalar>(&self, x: &[S], u: &[S], _t: f64, xdot: &mut [S]) {
        let (theta, v) = (x[2], x[3]);
        xdot[0] = v * theta.cos();
        xdot[1] = v * theta.sin();
        xdot[2] = u[0];
        xdot[3] = u[1];
    }

    fn jacobian(&self, x: &[f64], _u: &[f64], _t: f64) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        let (s, c) = x[2].sin_cos();
        let v = x[3];
        #[rustfmt::skip]
        let fx = DMatrix::from_row_slice(4, 4, &[
            0.0, 0.0, -v * s, c,
            0.0, 0.0, v * c, s,
            0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0,
        ]);
        #[rustfmt::skip]
        let fu = DMatrix::from_row_slice(4, 2, &[
            0.0, 0.0,
            0.0, 0.0,
            1.0, 0.0,
            0.0, 1.0,
        ]);
        Some((fx, fu))
    }
}
