use thiserror::Error;

/// Errors raised while defining or solving a game.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The game, a trajectory or a strategy set is malformed.
    #[error("definition error: {0}")]
    Definition(String),

    #[error("dimension mismatch in {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    /// A discrete step produced a non-finite state.
    #[error("non-finite state after integrating timestep {step}")]
    NonFiniteState { step: usize },

    /// A rollout left the finite reals.
    #[error("rollout diverged at timestep {step}")]
    DivergedRollout { step: usize },

    #[error("non-finite derivative of cost term `{term}` for player {player} at timestep {step}")]
    NonFiniteDerivative {
        player: usize,
        step: usize,
        term: String,
    },

    #[error("non-finite linearization of the dynamics at timestep {step}")]
    NonFiniteLinearization { step: usize },

    /// The stacked Nash system of the backward pass could not be factored.
    #[error("singular stacked system at stage {step}")]
    SingularStage { step: usize },

    /// A scenario configuration file is invalid.
    #[error("scenario config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            actual,
        })
    }
}
