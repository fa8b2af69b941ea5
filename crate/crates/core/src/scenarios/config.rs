//! Scenario configuration files (TOML).
//!
//! A file holds the horizon, timestep, evaluation settings, an optional
//! `[solver]` table and exactly one model table: `[unicycle]` for games of
//! planar unicycles, or `[linear]` for linear-quadratic games.

use serde::{Deserialize, Serialize};

use crate::derivatives::DerivativeMode;
use crate::dynamics::Integrator;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Number of timesteps.
    pub horizon: usize,
    /// Timestep in seconds.
    pub dt: f64,
    #[serde(default)]
    pub integrator: Integrator,
    /// Minimum admissible separation between players, metres.
    #[serde(default)]
    pub collision_threshold: f64,
    /// Half-width of the uniform initial-position jitter used when sampling
    /// initial conditions, metres.
    #[serde(default)]
    pub jitter: f64,
    #[serde(default)]
    pub solver: SolverSection,
    pub unicycle: Option<UnicycleGame>,
    pub linear: Option<LinearGame>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub mode: DerivativeMode,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            tolerance: 1e-4,
            mode: DerivativeMode::Manual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnicycleGame {
    pub proximity_radius: f64,
    pub proximity_weight: f64,
    pub goal_weight: f64,
    /// Seconds; defaults to half the game duration.
    pub goal_activation: Option<f64>,
    pub terminal_goal_weight: f64,
    /// Diagonal of the control-effort weight for `(ω, a)`.
    pub input_weights: [f64; 2],
    pub speed_min: f64,
    pub speed_max: f64,
    pub speed_weight: f64,
    pub corridor: Option<Corridor>,
    pub players: Vec<UnicyclePlayer>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Corridor {
    pub y_min: f64,
    pub y_max: f64,
    /// Horizontal extent, only used for plotting.
    pub x_min: f64,
    pub x_max: f64,
    /// Players are pushed this far inside the walls.
    #[serde(default)]
    pub margin: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnicyclePlayer {
    /// `(p_x, p_y, θ, v)`.
    pub initial: [f64; 4],
    pub goal: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearGame {
    /// Continuous-time state matrix, row-major rows.
    pub a: Vec<Vec<f64>>,
    pub initial_state: Vec<f64>,
    pub players: Vec<LinearPlayer>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearPlayer {
    /// Input matrix `n × m_i`.
    pub b: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
    pub target: Vec<f64>,
    pub terminal_q: Vec<Vec<f64>>,
    pub r: Vec<Vec<f64>>,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario configs always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(format!("{}: {msg}", self.name)));
        if self.horizon == 0 {
            return fail("horizon must be positive".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return fail(format!("dt must be positive, got {}", self.dt));
        }
        if self.collision_threshold < 0.0 || self.jitter < 0.0 {
            return fail("collision_threshold and jitter must be non-negative".into());
        }
        if self.solver.max_iterations == 0 || !(self.solver.tolerance > 0.0) {
            return fail("solver.max_iterations and solver.tolerance must be positive".into());
        }
        match (&self.unicycle, &self.linear) {
            (Some(game), None) => game.validate(self.collision_threshold).or_else(fail),
            (None, Some(game)) => game.validate().or_else(fail),
            _ => fail("exactly one of [unicycle] or [linear] must be present".into()),
        }
    }
}

impl UnicycleGame {
    fn validate(&self, threshold: f64) -> std::result::Result<(), String> {
        if self.players.is_empty() {
            return Err("at least one player required".into());
        }
        let weights = [
            self.proximity_weight,
            self.goal_weight,
            self.terminal_goal_weight,
            self.input_weights[0],
            self.input_weights[1],
            self.speed_weight,
        ];
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err("weights must be non-negative".into());
        }
        if !(self.proximity_radius > 0.0) {
            return Err("proximity_radius must be positive".into());
        }
        if self.speed_min > self.speed_max {
            return Err("speed_min exceeds speed_max".into());
        }
        if let Some(c) = &self.corridor {
            if !(c.y_min + c.margin < c.y_max - c.margin) || c.weight < 0.0 || c.margin < 0.0 {
                return Err("corridor bounds must leave room between the walls".into());
            }
        }
        for (i, p) in self.players.iter().enumerate() {
            if p.initial.iter().chain(&p.goal).any(|v| !v.is_finite()) {
                return Err(format!("player {} has non-finite initial state or goal", i + 1));
            }
            if p.initial[2] <= -std::f64::consts::PI || p.initial[2] > std::f64::consts::PI {
                return Err(format!("player {} initial heading must lie in (-pi, pi]", i + 1));
            }
        }
        for i in 0..self.players.len() {
            for j in i + 1..self.players.len() {
                let (a, b) = (&self.players[i].initial, &self.players[j].initial);
                let d = (a[0] - b[0]).hypot(a[1] - b[1]);
                if d <= threshold {
                    return Err(format!("players {} and {} start within the collision threshold", i + 1, j + 1));
                }
            }
        }
        Ok(())
    }
}

fn check_matrix(name: &str, m: &[Vec<f64>], rows: usize, cols: Option<usize>) -> std::result::Result<usize, String> {
    if m.len() != rows {
        return Err(format!("{name} must have {rows} rows, has {}", m.len()));
    }
    let width = cols.unwrap_or_else(|| m.first().map_or(0, Vec::len));
    if width == 0 || m.iter().any(|r| r.len() != width) {
        return Err(format!("{name} rows must all have {width} entries"));
    }
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(format!("{name} has non-finite entries"));
    }
    Ok(width)
}

impl LinearGame {
    fn validate(&self) -> std::result::Result<(), String> {
        let n = self.initial_state.len();
        if n == 0 {
            return Err("initial_state must not be empty".into());
        }
        check_matrix("a", &self.a, n, Some(n))?;
        if self.players.is_empty() {
            return Err("at least one player required".into());
        }
        for (i, p) in self.players.iter().enumerate() {
            let tag = |what: &str| format!("players[{i}].{what}");
            let m = check_matrix(&tag("b"), &p.b, n, None)?;
            check_matrix(&tag("q"), &p.q, n, Some(n))?;
            check_matrix(&tag("terminal_q"), &p.terminal_q, n, Some(n))?;
            check_matrix(&tag("r"), &p.r, m, Some(m))?;
            if p.target.len() != n {
                return Err(format!("{} must have {n} entries", tag("target")));
            }
        }
        Ok(())
    }
}
