use std::fmt;

/// Failures mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags as reported by the argument parser.
    Clap(clap::Error),
    /// Invalid configuration; `field` names the offending option.
    Config { field: String, reason: String },
    /// Non-finite values or an unmet truncation certificate in strict mode.
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Clap(e) if !e.use_stderr() => 0,
            CliError::Clap(_) | CliError::Config { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Clap(e) => write!(f, "{e}"),
            CliError::Config { field, reason } => write!(f, "invalid config: {field}: {reason}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<thinplate::Error> for CliError {
    fn from(e: thinplate::Error) -> Self {
        use thinplate::Error as E;
        match e {
            E::InvalidArgument { field, reason } => CliError::Config { field, reason },
            E::GridMismatch(m) => CliError::config("input", m),
            E::NonFinite { .. } => CliError::Numerical(e.to_string()),
            E::Io { .. } | E::Format { .. } => CliError::Io(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
