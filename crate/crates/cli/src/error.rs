use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] scgarch::Error),

    #[error("config: {0}")]
    Config(String),

    #[error("{failed} of {total} benchmark replications failed")]
    PartialBenchmark { failed: usize, total: usize },

    #[error("all {total} benchmark replications failed")]
    BenchmarkFailed { total: usize },
}

impl CliError {
    /// 2 for bad input, 3 for numerical failure, 4 for a partially failed benchmark.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_input_error() => 2,
            CliError::Config(_) => 2,
            CliError::Core(_) | CliError::BenchmarkFailed { .. } => 3,
            CliError::PartialBenchmark { .. } => 4,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
