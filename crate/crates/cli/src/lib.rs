//! Experiment runner, JSON file formats and the random-matrix oracle built on
//! `freechaos-core`.

pub mod corpus;
pub mod experiments;
pub mod io;
pub mod matrix_oracle;
pub mod report;

pub use experiments::{run_experiment, Config, EXPERIMENTS};
pub use report::Report;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Engine(#[from] freechaos_core::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown experiment {name:?}; registered: {}", registered.join(", "))]
    UnknownExperiment {
        name: String,
        registered: Vec<&'static str>,
    },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
}
