//! Feedback Nash equilibria of finite-horizon, time-varying LQ games by
//! backward dynamic programming.

use nalgebra::{DMatrix, DVector};

use crate::derivatives::LQApproximation;
use crate::dynamics::ControlPartition;
use crate::error::{Error, Result};

/// Zero-based player index, validated against the number of players.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlayerIndex(usize);

impl PlayerIndex {
    pub fn new(index: usize, num_players: usize) -> Result<Self> {
        if index < num_players {
            Ok(Self(index))
        } else {
            Err(Error::Definition(format!("player index {index} out of range for {num_players} players")))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for PlayerIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "player {}", self.0 + 1)
    }
}

/// A single player's time-varying affine feedback law.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineStrategy {
    /// `P_t`, `m_i × n`.
    pub gains: Vec<DMatrix<f64>>,
    /// `α_t`, length `m_i`.
    pub offsets: Vec<DVector<f64>>,
}

impl AffineStrategy {
    pub fn max_abs_difference(&self, other: &AffineStrategy) -> f64 {
        let gains = self.gains.iter().zip(&other.gains).map(|(a, b)| (a - b).amax());
        let offsets = self.offsets.iter().zip(&other.offsets).map(|(a, b)| (a - b).amax());
        gains.chain(offsets).fold(0.0, f64::max)
    }
}

/// Strategies of all players, stacked per timestep following the control
/// partition.
///
/// Applied around an operating point `(x̂, û)` as
/// `u_t = û_t − P_t (x_t − x̂_t) − ε·α_t` (minus-gain convention), where
/// `ε ∈ [0, 1]` scales the feedforward term.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackStrategies {
    pub partition: ControlPartition,
    /// Stacked gains `[P_1; …; P_N]`, `m × n` per timestep.
    pub gains: Vec<DMatrix<f64>>,
    /// Stacked feedforward terms, length `m` per timestep.
    pub offsets: Vec<DVector<f64>>,
}

impl FeedbackStrategies {
    pub fn zeros(partition: ControlPartition, state_dim: usize, horizon: usize) -> Self {
        let m = partition.total();
        Self {
            partition,
            gains: vec![DMatrix::zeros(m, state_dim); horizon],
            offsets: vec![DVector::zeros(m); horizon],
        }
    }

    pub fn horizon(&self) -> usize {
        self.gains.len()
    }

    pub fn player(&self, i: usize) -> AffineStrategy {
        let range = self.partition.range(i);
        AffineStrategy {
            gains: self.gains.iter().map(|p| p.rows(range.start, range.len()).into_owned()).collect(),
            offsets: self.offsets.iter().map(|a| a.rows(range.start, range.len()).into_owned()).collect(),
        }
    }

    pub fn max_abs_difference(&self, other: &FeedbackStrategies) -> f64 {
        let gains = self.gains.iter().zip(&other.gains).map(|(a, b)| (a - b).amax());
        let offsets = self.offsets.iter().zip(&other.offsets).map(|(a, b)| (a - b).amax());
        gains.chain(offsets).fold(0.0, f64::max)
    }

    /// Strategies for the same game started one step later; the last stage
    /// is repeated to keep the horizon.
    pub fn shifted(&self, steps: usize) -> Self {
        let h = self.horizon();
        let pick = |k: usize| (k + steps).min(h - 1);
        Self {
            partition: self.partition.clone(),
            gains: (0..h).map(|k| self.gains[pick(k)].clone()).collect(),
            offsets: (0..h).map(|k| self.offsets[pick(k)].clone()).collect(),
        }
    }
}

/// Player cost-to-go `½xᵀZx + ζᵀx` (constant dropped).
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunctionQuadratic {
    pub z: DMatrix<f64>,
    pub zeta: DVector<f64>,
}

/// Feedback Nash strategies of an LQ game.
pub fn solve_lq_game(approx: &LQApproximation) -> Result<FeedbackStrategies> {
    backward_pass(approx, None)
}

/// Like [`solve_lq_game`], additionally returning every player's value
/// function at each stage `t = 0..=T` (index `T` is the terminal cost).
pub fn solve_lq_game_with_values(approx: &LQApproximation) -> Result<(FeedbackStrategies, Vec<Vec<ValueFunctionQuadratic>>)> {
    let mut values = Vec::with_capacity(approx.horizon() + 1);
    let strategies = backward_pass(approx, Some(&mut values))?;
    values.reverse();
    Ok((strategies, values))
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn backward_pass(approx: &LQApproximation, mut trace: Option<&mut Vec<Vec<ValueFunctionQuadratic>>>) -> Result<FeedbackStrategies> {
    approx.validate()?;
    let partition = &approx.partition;
    let players = partition.num_players();
    let n = approx.state_dim();
    let m = partition.total();
    let horizon = approx.horizon();

    let mut z: Vec<DMatrix<f64>> = approx.terminal.iter().map(|c| c.q.clone()).collect();
    let mut zeta: Vec<DVector<f64>> = approx.terminal.iter().map(|c| c.l.clone()).collect();
    let mut record = |z: &[DMatrix<f64>], zeta: &[DVector<f64>]| {
        if let Some(values) = trace.as_deref_mut() {
            values.push(z.iter().zip(zeta).map(|(z, zeta)| ValueFunctionQuadratic { z: z.clone(), zeta: zeta.clone() }).collect());
        }
    };
    record(&z, &zeta);

    let mut gains = vec![DMatrix::zeros(m, n); horizon];
    let mut offsets = vec![DVector::zeros(m); horizon];
    let mut s = DMatrix::zeros(m, m);
    let mut rhs = DMatrix::zeros(m, n + 1);

    for t in (0..horizon).rev() {
        let stage = &approx.stages[t];
        let a = &stage.dynamics.a;
        let b = &stage.dynamics.b;

        // Row block i: R_ii·[i=j] + B_iᵀ Z_i B_j, and right-hand sides
        // [B_iᵀ Z_i A | B_iᵀ ζ_i + r_ii].
        for i in 0..players {
            let range = partition.range(i);
            let bi = b.columns(range.start, range.len());
            let bzi = bi.transpose() * &z[i];
            s.rows_mut(range.start, range.len()).copy_from(&(&bzi * b));
            let mut diag = s.view_mut((range.start, range.start), (range.len(), range.len()));
            diag += &stage.costs[i].r[i];
            rhs.view_mut((range.start, 0), (range.len(), n)).copy_from(&(&bzi * a));
            let ff = bi.transpose() * &zeta[i] + &stage.costs[i].r_lin[i];
            rhs.view_mut((range.start, n), (range.len(), 1)).copy_from(&ff);
        }

        let lu = s.clone().lu();
        let solution = lu.solve(&rhs).ok_or(Error::SingularStage { step: t })?;
        if solution.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularStage { step: t });
        }
        let p = solution.columns(0, n).into_owned();
        let alpha = solution.column(n).into_owned();

        let f = a - b * &p;
        let beta = -(b * &alpha);
        for i in 0..players {
            let cost = &stage.costs[i];
            let mut zeta_next = &cost.l + f.transpose() * (&zeta[i] + &z[i] * &beta);
            let mut z_next = &cost.q + f.transpose() * &z[i] * &f;
            for j in 0..players {
                let range = partition.range(j);
                let pj = p.rows(range.start, range.len());
                let aj = alpha.rows(range.start, range.len());
                let r = &cost.r[j];
                if r.iter().any(|&v| v != 0.0) {
                    let rp = r * pj;
                    z_next += pj.transpose() * &rp;
                    zeta_next += pj.transpose() * (r * aj);
                }
                zeta_next -= pj.transpose() * &cost.r_lin[j];
            }
            symmetrize(&mut z_next);
            z[i] = z_next;
            zeta[i] = zeta_next;
        }
        record(&z, &zeta);

        gains[t] = p;
        offsets[t] = alpha;
    }

    Ok(FeedbackStrategies {
        partition: partition.clone(),
        gains,
        offsets,
    })
}

/// Player `player`'s optimal strategy when every other player is held at
/// its strategy in `strategies`.
///
/// The fixed players are absorbed into the dynamics (closed-loop state
/// matrix and affine drift) and into player `player`'s state cost, and the
/// resulting single-player affine LQR problem is solved exactly.
pub fn best_response(approx: &LQApproximation, strategies: &FeedbackStrategies, player: PlayerIndex) -> Result<AffineStrategy> {
    approx.validate()?;
    let partition = &approx.partition;
    let players = partition.num_players();
    let i = player.get();
    if i >= players {
        return Err(Error::Definition(format!("{player} does not exist")));
    }
    if strategies.horizon() != approx.horizon() || strategies.partition != *partition {
        return Err(Error::Definition("strategies do not match the LQ game".into()));
    }
    let own = partition.range(i);
    let horizon = approx.horizon();

    let mut z = approx.terminal[i].q.clone();
    let mut zeta = approx.terminal[i].l.clone();
    let mut gains = vec![DMatrix::zeros(own.len(), approx.state_dim()); horizon];
    let mut offsets = vec![DVector::zeros(own.len()); horizon];

    for t in (0..horizon).rev() {
        let stage = &approx.stages[t];
        let cost = &stage.costs[i];
        let b = &stage.dynamics.b;
        let bi = b.columns(own.start, own.len());

        // Closed-loop dynamics x' = Ã x + B_i u_i + c and the state cost seen
        // by player i once the others' controls are substituted.
        let mut a_cl = stage.dynamics.a.clone();
        let mut drift = DVector::zeros(approx.state_dim());
        let mut q = cost.q.clone();
        let mut l = cost.l.clone();
        for j in (0..players).filter(|&j| j != i) {
            let range = partition.range(j);
            let bj = b.columns(range.start, range.len());
            let pj = strategies.gains[t].rows(range.start, range.len());
            let aj = strategies.offsets[t].rows(range.start, range.len());
            a_cl -= bj * pj;
            drift -= bj * aj;
            q += pj.transpose() * &cost.r[j] * pj;
            l += pj.transpose() * (&cost.r[j] * aj - &cost.r_lin[j]);
        }

        let r = &cost.r[i];
        let h = r + bi.transpose() * &z * bi;
        let g_feedback = bi.transpose() * &z * &a_cl;
        let g_offset = bi.transpose() * (&z * &drift + &zeta) + &cost.r_lin[i];
        let lu = h.lu();
        let p = lu.solve(&g_feedback).ok_or(Error::SingularStage { step: t })?;
        let alpha = lu.solve(&g_offset).ok_or(Error::SingularStage { step: t })?;

        let f = &a_cl - bi * &p;
        let beta = &drift - bi * &alpha;
        zeta = &l + p.transpose() * (r * &alpha - &cost.r_lin[i]) + f.transpose() * (&zeta + &z * &beta);
        z = &q + p.transpose() * r * &p + f.transpose() * &z * &f;
        symmetrize(&mut z);

        gains[t] = p;
        offsets[t] = alpha;
    }
    Ok(AffineStrategy { gains, offsets })
}
