use std::path::Path;

use mlstm_core::benchmark::BenchmarkError;
use mlstm_core::eval::EvalError;
use mlstm_core::model::ModelError;
use mlstm_core::nnkernel::KernelError;
use mlstm_core::synth::SynthError;
use mlstm_core::trackstore::TrackError;

/// Failure of a command, grouped by process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, unknown config keys or invalid values. Exit code 1.
    #[error("usage error: {0}")]
    Usage(String),
    /// Unreadable, malformed or inconsistent input data. Exit code 2.
    #[error("data error: {0}")]
    Data(String),
    /// Non-finite values or failed numerical checks. Exit code 3.
    #[error("numeric error: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Data(format!("{}: {err}", path.display()))
    }
}

impl From<TrackError> for CliError {
    fn from(e: TrackError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Numeric(_) | ModelError::Kernel(KernelError::NonFinite(_)) => CliError::Numeric(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Model(m) => m.into(),
            EvalError::Baseline(b) => CliError::Numeric(b.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<BenchmarkError> for CliError {
    fn from(e: BenchmarkError) -> Self {
        match e {
            BenchmarkError::Synth(s) => s.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
