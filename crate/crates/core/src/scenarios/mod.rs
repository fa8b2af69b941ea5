//! Built-in models, cost terms and benchmark scenarios.
//!
//! Scenario geometry and weights live in the TOML files under
//! `crates/core/scenarios/`, which are compiled in:
//!
//! * `lq2p2d`: two players share a 2-state linear system, one scalar
//!   control each; player 1 regulates the position to zero, player 2 wants
//!   unit velocity.
//! * `hallway3`: three unicycles in a corridor, two travelling east and
//!   one west, so paths cross head-on.
//! * `freespace5`: five unicycles on a circle of radius 4 m, each heading
//!   for the antipodal point.

mod config;
mod costs;
mod unicycle;

use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub use config::{Corridor, LinearGame, LinearPlayer, ScenarioConfig, SolverSection, UnicycleGame, UnicyclePlayer};
pub use costs::{goal_cost, input_cost, proximity_cost, BandCost, GoalCost, InputCost, LinearSystem, ProximityCost, QuadraticStateCost};
pub use unicycle::Unicycle;

use crate::cost::PlayerCost;
use crate::dynamics::{DynamicsModel, ProductSystem};
use crate::error::{Error, Result};
use crate::ilq::SolverConfig;
use crate::problem::{GameProblem, SystemTrajectory};

const LQ2P2D: &str = include_str!("../../scenarios/lq2p2d.toml");
const HALLWAY3: &str = include_str!("../../scenarios/hallway3.toml");
const FREESPACE5: &str = include_str!("../../scenarios/freespace5.toml");

/// Names accepted by [`builtin`]; aliases map benchmark problem ids.
pub const BUILTIN_SCENARIOS: [&str; 3] = ["lq2p2d", "hallway3", "freespace5"];

/// Where each player sits in the joint state, for plotting and distance
/// checks.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarLayout {
    /// State index of each player's `p_x` (`p_y` follows).
    pub positions: Vec<usize>,
    pub headings: Vec<usize>,
    pub speeds: Vec<usize>,
    pub goals: Vec<[f64; 2]>,
    pub corridor: Option<Corridor>,
}

impl PlanarLayout {
    /// Smallest distance between any two players over the whole trajectory.
    pub fn min_pairwise_distance(&self, traj: &SystemTrajectory) -> f64 {
        let mut best = f64::INFINITY;
        for x in &traj.states {
            for (a, &i) in self.positions.iter().enumerate() {
                for &j in &self.positions[a + 1..] {
                    best = best.min((x[i] - x[j]).hypot(x[i + 1] - x[j + 1]));
                }
            }
        }
        best
    }

    /// Distance of each player's final position to its goal.
    pub fn goal_errors(&self, traj: &SystemTrajectory) -> Vec<f64> {
        let x = traj.states.last().expect("trajectories are non-empty");
        self.positions
            .iter()
            .zip(&self.goals)
            .map(|(&p, g)| (x[p] - g[0]).hypot(x[p + 1] - g[1]))
            .collect()
    }
}

/// A ready-to-solve game with its initial condition and evaluation settings.
#[derive(Debug, Clone)]
pub struct ScenarioDefinition {
    pub name: String,
    pub problem: GameProblem,
    pub initial_state: DVector<f64>,
    pub collision_threshold: f64,
    pub jitter: f64,
    pub solver: SolverConfig,
    pub layout: Option<PlanarLayout>,
    pub config: ScenarioConfig,
}

impl PartialEq for ScenarioDefinition {
    /// Scenarios are pure functions of their configuration.
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.initial_state == other.initial_state && self.layout == other.layout
    }
}

impl ScenarioDefinition {
    pub fn from_config(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let solver = SolverConfig {
            max_iterations: config.solver.max_iterations,
            tolerance: config.solver.tolerance,
            ..SolverConfig::default()
        }
        .with_derivatives(config.solver.mode);
        let (problem, initial_state, layout) = match (&config.unicycle, &config.linear) {
            (Some(game), None) => build_unicycle_game(&config, game)?,
            (None, Some(game)) => build_linear_game(&config, game)?,
            _ => unreachable!("validated above"),
        };
        Ok(Self {
            name: config.name.clone(),
            problem: problem.with_integrator(config.integrator),
            initial_state,
            collision_threshold: config.collision_threshold,
            jitter: config.jitter,
            solver,
            layout,
            config,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_config(ScenarioConfig::from_toml_str(text)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Initial state with every position coordinate (or, without a planar
    /// layout, every state) perturbed uniformly by up to `jitter`.
    pub fn sample_initial_state(&self, rng: &mut impl Rng) -> DVector<f64> {
        let mut x = self.initial_state.clone();
        if self.jitter == 0.0 {
            return x;
        }
        let indices: Vec<usize> = match &self.layout {
            Some(layout) => layout.positions.iter().flat_map(|&p| [p, p + 1]).collect(),
            None => (0..x.len()).collect(),
        };
        for i in indices {
            x[i] += rng.gen_range(-self.jitter..=self.jitter);
        }
        x
    }

    pub fn min_pairwise_distance(&self, traj: &SystemTrajectory) -> Option<f64> {
        self.layout.as_ref().map(|l| l.min_pairwise_distance(traj))
    }
}

fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}

fn build_linear_game(config: &ScenarioConfig, game: &LinearGame) -> Result<(GameProblem, DVector<f64>, Option<PlanarLayout>)> {
    let n = game.initial_state.len();
    let blocks: Vec<DMatrix<f64>> = game.players.iter().map(|p| to_matrix(&p.b)).collect();
    let dims: Vec<usize> = blocks.iter().map(|b| b.ncols()).collect();
    let b = DMatrix::from_fn(n, dims.iter().sum(), |i, j| {
        let mut col = j;
        for block in &blocks {
            if col < block.ncols() {
                return block[(i, col)];
            }
            col -= block.ncols();
        }
        unreachable!()
    });
    let model = LinearSystem::new(to_matrix(&game.a), b, dims.clone());
    let mut offset = 0;
    let costs = game
        .players
        .iter()
        .zip(&dims)
        .map(|(p, &m)| {
            let target = DVector::from_column_slice(&p.target);
            let cost = PlayerCost::new()
                .with(QuadraticStateCost::new(to_matrix(&p.q), target).with_terminal(to_matrix(&p.terminal_q)))
                .with(InputCost::new(offset..offset + m, to_matrix(&p.r)));
            offset += m;
            cost
        })
        .collect();
    let problem = GameProblem::new(Arc::new(model), costs, config.horizon, config.dt)?;
    Ok((problem, DVector::from_column_slice(&game.initial_state), None))
}

fn build_unicycle_game(config: &ScenarioConfig, game: &UnicycleGame) -> Result<(GameProblem, DVector<f64>, Option<PlanarLayout>)> {
    let players = game.players.len();
    let subsystems: Vec<Arc<dyn DynamicsModel>> = (0..players).map(|_| Arc::new(Unicycle) as Arc<dyn DynamicsModel>).collect();
    let product = ProductSystem::new(subsystems)?;
    let positions: Vec<usize> = (0..players).map(|i| product.state_offset(i)).collect();
    let activation = game.goal_activation.unwrap_or(0.5 * config.horizon as f64 * config.dt);
    let w = DMatrix::from_diagonal(&DVector::from_column_slice(&game.input_weights));

    let costs = game
        .players
        .iter()
        .enumerate()
        .map(|(i, player)| {
            let p = positions[i];
            let mut cost = PlayerCost::new()
                .with(GoalCost {
                    position: p,
                    goal: player.goal,
                    weight: game.goal_weight,
                    activation_time: activation,
                    terminal_weight: game.terminal_goal_weight,
                })
                .with(InputCost::new(2 * i..2 * i + 2, w.clone()))
                .with(BandCost::speed(p + 3, game.speed_min, game.speed_max, game.speed_weight));
            if players > 1 {
                let others = positions.iter().copied().filter(|&q| q != p).collect();
                cost = cost.with(ProximityCost::new(p, others, game.proximity_radius, game.proximity_weight));
            }
            if let Some(c) = &game.corridor {
                cost = cost.with(BandCost::wall(p + 1, c.y_min + c.margin, c.y_max - c.margin, c.weight));
            }
            cost
        })
        .collect();

    let problem = GameProblem::new(Arc::new(product), costs, config.horizon, config.dt)?;
    let initial_state = DVector::from_iterator(4 * players, game.players.iter().flat_map(|p| p.initial));
    let layout = PlanarLayout {
        headings: positions.iter().map(|p| p + 2).collect(),
        speeds: positions.iter().map(|p| p + 3).collect(),
        positions,
        goals: game.players.iter().map(|p| p.goal).collect(),
        corridor: game.corridor,
    };
    Ok((problem, initial_state, Some(layout)))
}

/// Configuration of a built-in scenario by name or benchmark alias.
pub fn builtin_config(name: &str) -> Option<ScenarioConfig> {
    let text = match name {
        "lq2p2d" | "lq" => LQ2P2D,
        "hallway3" | "nonlinear3p12d" => HALLWAY3,
        "freespace5" => FREESPACE5,
        _ => return None,
    };
    Some(ScenarioConfig::from_toml_str(text).expect("built-in scenario configs are valid"))
}

pub fn builtin(name: &str) -> Option<ScenarioDefinition> {
    builtin_config(name).map(|c| ScenarioDefinition::from_config(c).expect("built-in scenarios are valid"))
}

/// Minimal two-player LQ game with a 2-dimensional state.
pub fn make_lq_benchmark() -> ScenarioDefinition {
    builtin("lq2p2d").unwrap()
}

/// Three unicycles crossing in a hallway (12 joint states).
pub fn make_hallway_3p() -> ScenarioDefinition {
    builtin("hallway3").unwrap()
}

/// Five unicycles swapping antipodal positions in free space (20 joint states).
pub fn make_freespace_5p() -> ScenarioDefinition {
    builtin("freespace5").unwrap()
}
