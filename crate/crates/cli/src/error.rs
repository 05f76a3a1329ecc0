use std::fmt;

/// Malformed input, located by line and, when known, by field.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.field {
            Some(field) => write!(f, "line {}: {field}: {}", self.line, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

/// Well-formed input describing an invalid game.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ValidationError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("invalid game: {0}")]
    Validation(#[from] ValidationError),
}

/// Everything that ends a command. `Input` maps to exit code 2, `Failed`
/// to exit code 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Load(_) | CliError::Input(_) => 2,
        }
    }
}

/// Core errors that say the input is unusable are input errors; the rest
/// are failures of the analysis itself.
impl From<hetroute_core::Error> for CliError {
    fn from(err: hetroute_core::Error) -> Self {
        use hetroute_core::Error as E;
        match err {
            E::NoPotential { .. } | E::BoundViolated { .. } | E::InfeasibleFlows { .. } => {
                CliError::Failed(err.to_string())
            }
            _ => CliError::Input(err.to_string()),
        }
    }
}
