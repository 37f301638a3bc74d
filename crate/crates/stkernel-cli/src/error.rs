use std::fmt;

/// Failure of a run, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed or inconsistent configuration or input file.
    Config { field: String, message: String },
    /// Error raised by the library.
    Library(stkernel::Error),
    /// Failure writing artifacts.
    Output(String),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { field: field.into(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Library(e) if e.is_validation() => 2,
            CliError::Library(_) | CliError::Output(_) => 3,
        }
    }

    /// Single-line `key=value` diagnostic.
    pub fn diagnostic(&self) -> String {
        let code = self.exit_code();
        match self {
            CliError::Config { field, message } => {
                format!("stkernel: error exit={code} kind=config field={field} message={message:?}")
            }
            CliError::Library(e) => {
                let kind = if e.is_validation() { "validation" } else { "numerical" };
                format!("stkernel: error exit={code} kind={kind} message={:?}", e.to_string())
            }
            CliError::Output(m) => format!("stkernel: error exit={code} kind=output message={m:?}"),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.diagnostic())
    }
}

impl From<stkernel::Error> for CliError {
    fn from(e: stkernel::Error) -> Self {
        CliError::Library(e)
    }
}
