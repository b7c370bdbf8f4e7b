use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("missing artifact {0}; run the earlier stage first")]
    MissingArtifact(String),

    #[error(transparent)]
    Numerical(#[from] qdot_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{} validation check(s) failed: {}", .0.len(), .0.join(", "))]
    Validation(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::MissingArtifact(_) => 1,
            Self::Numerical(_) | Self::Io(_) => 2,
            Self::Validation(_) => 3,
        }
    }
}
