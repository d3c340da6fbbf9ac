use std::process::ExitCode;

use dualcell_core::analysis::{AnalysisError, RobustnessError};
use dualcell_core::bloch::BlochError;
use dualcell_core::integrator::IntegrationError;
use dualcell_core::sweep::SweepError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or invalid configuration, malformed input.
    #[error("{0}")]
    Usage(String),
    /// Blow-up or an undefined statistic.
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Runtime(_) => 1,
        })
    }
}

impl From<BlochError> for CliError {
    fn from(e: BlochError) -> Self {
        match e {
            BlochError::NonFiniteState { .. } => CliError::Numerical(e.to_string()),
            BlochError::InvalidParameter { .. } => CliError::Usage(e.to_string()),
        }
    }
}

impl From<IntegrationError> for CliError {
    fn from(e: IntegrationError) -> Self {
        match e {
            IntegrationError::NonFinite { .. } => CliError::Numerical(e.to_string()),
            IntegrationError::State(b) => b.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::InvalidArgument(_) | AnalysisError::TooShort { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<RobustnessError> for CliError {
    fn from(e: RobustnessError) -> Self {
        match e {
            RobustnessError::Integration(e) => e.into(),
            RobustnessError::Analysis(e) => e.into(),
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Params(b) => b.into(),
            SweepError::Integration(i) => i.into(),
            SweepError::InvalidGrid(_) | SweepError::StaleCheckpoint { .. } | SweepError::MalformedCheckpoint { .. } => {
                CliError::Usage(e.to_string())
            }
            SweepError::Interrupted { .. } | SweepError::Io(_) => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("I/O error: {e}"))
    }
}
