use std::path::Path;

use ilqgames::scenarios::{builtin_config, ScenarioConfig, ScenarioDefinition, BUILTIN_SCENARIOS};
use ilqgames::DerivativeMode;

use crate::error::{io_error, CliError, Result};

/// Command-line adjustments applied on top of a scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub horizon: Option<usize>,
    pub dt: Option<f64>,
    pub mode: Option<DerivativeMode>,
    pub max_iterations: Option<usize>,
    pub tolerance: Option<f64>,
}

/// Looks `name` up among the built-ins first, then as a TOML file path.
pub fn resolve_config(name: &str) -> Result<ScenarioConfig> {
    if let Some(config) = builtin_config(name) {
        return Ok(config);
    }
    let path = Path::new(name);
    if !path.is_file() {
        return Err(CliError::UnknownScenario {
            name: name.to_owned(),
            builtins: BUILTIN_SCENARIOS.join(", "),
        });
    }
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    Ok(ScenarioConfig::from_toml_str(&text)?)
}

pub fn load_scenario(name: &str, overrides: &Overrides) -> Result<ScenarioDefinition> {
    let mut config = resolve_config(name)?;
    if let Some(h) = overrides.horizon {
        config.horizon = h;
    }
    if let Some(dt) = overrides.dt {
        config.dt = dt;
    }
    if let Some(mode) = overrides.mode {
        config.solver.mode = mode;
    }
    if let Some(k) = overrides.max_iterations {
        config.solver.max_iterations = k;
    }
    if let Some(tol) = overrides.tolerance {
        config.solver.tolerance = tol;
    }
    config.validate()?;
    let scenario = ScenarioDefinition::from_config(config)?;
    scenario.solver.validate()?;
    Ok(scenario)
}
