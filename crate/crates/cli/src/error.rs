use std::error::Error as _;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Invalid or unreadable config; nothing has been written.
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) | CliError::Io { .. } => 1,
        }
    }
}

impl From<mflin_core::Error> for CliError {
    fn from(e: mflin_core::Error) -> Self {
        let mut msg = e.to_string();
        let mut src = e.source();
        while let Some(s) = src {
            msg.push_str("\n  caused by: ");
            msg.push_str(&s.to_string());
            src = s.source();
        }
        CliError::Runtime(msg)
    }
}
