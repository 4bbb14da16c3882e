use std::fmt;

/// Command failure with its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or input files: exit 2.
    Input(anyhow::Error),
    /// Failure while running: exit 3.
    Runtime(anyhow::Error),
    /// Calibration finished without a feasible point: exit 4.
    Infeasible(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Infeasible(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(e) => write!(f, "input error: {e:#}"),
            CliError::Runtime(e) => write!(f, "{e:#}"),
            CliError::Infeasible(m) => write!(f, "no feasible point found: {m}"),
        }
    }
}

/// Library errors map by kind: bad inputs exit 2, everything else 3.
impl From<edcal::Error> for CliError {
    fn from(e: edcal::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.into())
        } else {
            CliError::Runtime(e.into())
        }
    }
}

pub trait Context<T> {
    /// Reading an input failed: exit 2.
    fn input(self, what: impl FnOnce() -> String) -> Result<T, CliError>;
    /// Producing output failed: exit 3.
    fn runtime(self, what: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T, E: Into<anyhow::Error>> Context<T> for Result<T, E> {
    fn input(self, what: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|e| CliError::Input(e.into().context(what())))
    }

    fn runtime(self, what: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|e| CliError::Runtime(e.into().context(what())))
    }
}
