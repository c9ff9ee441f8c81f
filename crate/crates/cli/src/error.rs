use std::fmt;

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INVARIANT: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const CONFIG: i32 = 4;
    /// An input file, earlier output or cache directory is missing or unreadable.
    pub const MISSING: i32 = 5;
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(String),
    Missing(String),
    /// A check ran to completion and did not hold.
    Failed(String),
    Core(gpvortex::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Config(_) => exit::CONFIG,
            CliError::Missing(_) => exit::MISSING,
            CliError::Failed(_) => exit::INVARIANT,
            CliError::Core(e) => match e {
                gpvortex::Error::Domain(_) => exit::USAGE,
                gpvortex::Error::Invariant(_) | gpvortex::Error::Singular(_) => exit::INVARIANT,
                gpvortex::Error::Integrator { .. } | gpvortex::Error::NoBracket(_) | gpvortex::Error::Numerical(_) => {
                    exit::NUMERICAL
                }
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Config(m) => write!(f, "config: {m}"),
            CliError::Missing(m) => write!(f, "missing: {m}"),
            CliError::Failed(m) => write!(f, "check failed: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gpvortex::Error> for CliError {
    fn from(e: gpvortex::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// I/O failure on `path` while `doing` something.
pub fn io_error(path: &std::path::Path, doing: &str, e: std::io::Error) -> CliError {
    CliError::Missing(format!("{doing} {}: {e}", path.display()))
}
