use std::fmt;

/// Everything the binary can fail with. Each class has its own exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(String),
    Core(annlayout::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Core(e) => e.kind(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "usage" => 2,
            "config" | "serde" => 3,
            "io" => 4,
            "format" => 5,
            "contract" => 6,
            "bench" => 7,
            "undefined" => 8,
            _ => 1,
        }
    }

    /// `error kind=<kind> msg=<json string>` on one line.
    pub fn render(&self) -> String {
        let msg = self.to_string().replace('\n', " ");
        format!(
            "error kind={} msg={}",
            self.kind(),
            serde_json::to_string(msg.trim()).unwrap_or_default()
        )
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Config(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<annlayout::Error> for CliError {
    fn from(e: annlayout::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;
