//! The trajectory document written by `ilqgames solve`.
//!
//! A JSON object; see `docs/formats.md` for the field reference. Floats are
//! written in shortest round-trip form, so reading a document back yields the
//! solver's arrays bit for bit.

use std::path::Path;

use ilqgames::scenarios::ScenarioDefinition;
use ilqgames::{DerivativeMode, SolveResult};
use serde::{Deserialize, Serialize};

use crate::error::{io_error, CliError, Result};

/// Bumped on any incompatible change to the document layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryDocument {
    pub schema_version: u32,
    pub scenario: String,
    pub num_players: usize,
    pub state_dim: usize,
    pub control_dims: Vec<usize>,
    pub horizon: usize,
    pub dt: f64,
    pub mode: DerivativeMode,
    pub converged: bool,
    pub iterations: usize,
    pub termination: String,
    /// Wall time of the solve call; the only field that varies between
    /// identical runs.
    pub solve_time_ms: f64,
    pub player_costs: Vec<f64>,
    /// Present for planar scenarios.
    pub layout: Option<PlanarLayout>,
    /// `(horizon + 1) × state_dim`.
    pub states: Vec<Vec<f64>>,
    /// `horizon × Σ control_dims`, players' inputs stacked in order.
    pub controls: Vec<Vec<f64>>,
}

/// Where each player lives in the state vector, plus the static scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanarLayout {
    /// State index of each player's x coordinate; y follows it.
    pub position_indices: Vec<usize>,
    pub heading_indices: Vec<usize>,
    pub goals: Vec<[f64; 2]>,
    pub corridor: Option<Corridor>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Corridor {
    pub y_min: f64,
    pub y_max: f64,
    pub x_min: f64,
    pub x_max: f64,
}

impl TrajectoryDocument {
    pub fn from_solve(scenario: &ScenarioDefinition, mode: DerivativeMode, result: &SolveResult) -> Self {
        let problem = &scenario.problem;
        let rows = |v: &[nalgebra::DVector<f64>]| v.iter().map(|x| x.as_slice().to_vec()).collect();
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.name.clone(),
            num_players: problem.num_players(),
            state_dim: problem.state_dim(),
            control_dims: problem.partition().dims().to_vec(),
            horizon: problem.horizon(),
            dt: problem.dt(),
            mode,
            converged: result.converged,
            iterations: result.iterations,
            termination: result.termination.to_string(),
            solve_time_ms: result.solve_time.as_secs_f64() * 1e3,
            player_costs: result.player_costs.clone(),
            layout: scenario.layout.as_ref().map(|l| PlanarLayout {
                position_indices: l.positions.clone(),
                heading_indices: l.headings.clone(),
                goals: l.goals.clone(),
                corridor: l.corridor.map(|c| Corridor {
                    y_min: c.y_min,
                    y_max: c.y_max,
                    x_min: c.x_min,
                    x_max: c.x_max,
                }),
            }),
            states: rows(&result.trajectory.states),
            controls: rows(&result.trajectory.controls),
        }
    }

    /// Checks the arrays against the metadata.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CliError::Document(msg));
        if self.schema_version != SCHEMA_VERSION {
            return fail(format!("schema version {} is not supported (expected {SCHEMA_VERSION})", self.schema_version));
        }
        if self.control_dims.len() != self.num_players || self.player_costs.len() != self.num_players {
            return fail(format!("expected {} players in control_dims and player_costs", self.num_players));
        }
        if self.states.len() != self.horizon + 1 || self.states.iter().any(|x| x.len() != self.state_dim) {
            return fail(format!("states must be {} rows of {} values", self.horizon + 1, self.state_dim));
        }
        let m: usize = self.control_dims.iter().sum();
        if self.controls.len() != self.horizon || self.controls.iter().any(|u| u.len() != m) {
            return fail(format!("controls must be {} rows of {m} values", self.horizon));
        }
        if let Some(layout) = &self.layout {
            let n = self.num_players;
            if layout.position_indices.len() != n || layout.heading_indices.len() != n || layout.goals.len() != n {
                return fail(format!("layout must describe {n} players"));
            }
            let max_index = layout.position_indices.iter().map(|i| i + 1).chain(layout.heading_indices.iter().copied()).max();
            if max_index.is_some_and(|i| i >= self.state_dim) {
                return fail("layout index outside the state vector".into());
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text).map_err(io_error(path))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_error(path))?;
        let doc = Self::from_json(&text).map_err(|source| CliError::Json { path: path.into(), source })?;
        doc.validate()?;
        Ok(doc)
    }

    /// Position trace `(x_t, y_t)` of one player.
    pub fn positions(&self, player: usize) -> Option<Vec<[f64; 2]>> {
        let index = *self.layout.as_ref()?.position_indices.get(player)?;
        Some(self.states.iter().map(|x| [x[index], x[index + 1]]).collect())
    }
}
