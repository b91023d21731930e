use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{key}: {reason}")]
    Validation { key: String, reason: String },
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: inlslab::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl CliError {
    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        CliError::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn validation(key: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Validation {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "ParseError",
            CliError::Validation { .. } => "ValidationError",
            CliError::Core { source, .. } => source.kind(),
            CliError::Io { .. } => "IoError",
        }
    }

    /// Process exit status: 2 for bad input, 1 for failed computations.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation { .. } => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            error: &'a str,
            message: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            line: Option<usize>,
            #[serde(skip_serializing_if = "Option::is_none")]
            key: Option<&'a str>,
        }
        let body = Body {
            error: self.kind(),
            message: self.to_string(),
            line: match self {
                CliError::Parse { line, .. } => Some(*line),
                _ => None,
            },
            key: match self {
                CliError::Validation { key, .. } => Some(key),
                _ => None,
            },
        };
        serde_json::to_string(&body).expect("error body serializes")
    }
}

/// Attaches a context string to core errors.
pub trait Context<T> {
    fn context(self, what: &str) -> Result<T>;
}

impl<T> Context<T> for inlslab::Result<T> {
    fn context(self, what: &str) -> Result<T> {
        self.map_err(|source| CliError::Core {
            context: what.to_string(),
            source,
        })
    }
}
