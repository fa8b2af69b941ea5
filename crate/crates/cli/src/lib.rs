//! Library side of the `ilqgames` command-line tool: scenario resolution,
//! trajectory documents, plot export and the benchmark harness.

pub mod bench;
pub mod document;
pub mod error;
pub mod plot;
pub mod scenario;

pub use bench::{run_bench, BenchOptions, BenchmarkRecord};
pub use document::TrajectoryDocument;
pub use error::{CliError, Result};
pub use scenario::{load_scenario, Overrides};
