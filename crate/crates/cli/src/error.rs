use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input, bad parameters.
    Input(String),
    /// A solver, eigensolver or fit failed.
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            Self::Input(_) => 1,
            Self::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Input(m) | Self::Numerical(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

/// Parses `"0.5,0.75"`-style lists.
pub fn parse_list<T: std::str::FromStr>(src: &str, what: &str) -> Result<Vec<T>, CliError>
where
    T::Err: fmt::Display,
{
    src.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| CliError::Input(format!("{what}: {s:?}: {e}"))))
        .collect()
}
