use thiserror::Error;

/// Exit status 1: bad flags. 2: unreadable or malformed input. 3: the computation or the output failed.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("malformed input: {0}")]
    Input(String),
    #[error(transparent)]
    Compute(qitn::Error),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Compute(_) | CliError::Output(_) => 3,
        }
    }
}

impl From<qitn::Error> for CliError {
    fn from(e: qitn::Error) -> Self {
        match e {
            qitn::Error::Dimension(_) | qitn::Error::Network(_) => CliError::Input(e.to_string()),
            other => CliError::Compute(other),
        }
    }
}
