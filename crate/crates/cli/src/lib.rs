//! File formats and subcommands of the `mm` tool.

pub mod commands;
pub mod format;

use std::path::Path;

pub use commands::{run, Cli, Report};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] mmetric::Error),
}

impl CliError {
    /// Prefixes syntax errors with the file they came from.
    pub fn in_file(self, path: &Path) -> Self {
        match self {
            CliError::Syntax(msg) if !msg.starts_with(&format!("{}:", path.display())) => {
                CliError::Syntax(format!("{}: {}", path.display(), msg))
            }
            other => other,
        }
    }
}

/// Runs `mm` on `args` (without the program name) and returns the exit
/// code with captured standard output and standard error.
pub fn run_captured<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let argv = std::iter::once(std::ffi::OsString::from("mm")).chain(args.into_iter().map(Into::into));
    match Cli::try_parse_from(argv) {
        Ok(cli) => {
            let json = cli.json;
            match run(&cli) {
                Ok(report) => (report.code, report.render(json), String::new()),
                Err(e) => (2, String::new(), format!("error: {}\n", e)),
            }
        }
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                (0, text, String::new())
            } else {
                (2, String::new(), text)
            }
        }
    }
}
