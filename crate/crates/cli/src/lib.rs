//! Command-line front end for `segscore`.
//!
//! Subcommands are plain functions that write human-readable output to a
//! [`Console`] and return an exit code, so they can be driven from tests as
//! well as from the `segscore` binary.
//!
//! Exit codes: 0 success, 1 fatal error, 2 evaluation finished but at least
//! one sample carries a flag, 3 lint found an error-severity violation.

pub mod commands;
pub mod config;
pub mod pairing;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use commands::{cmd_evaluate, cmd_lint, cmd_scenarios, cmd_visualize, EXIT_FATAL, EXIT_FLAGGED, EXIT_LINT_ERROR, EXIT_OK};
pub use config::{Cli, Command, Emit, RunArgs, RunConfig};

/// Output sink with optional ANSI styling.
pub struct Console<'a> {
    pub out: &'a mut dyn Write,
    pub color: bool,
}

impl<'a> Console<'a> {
    pub fn new(out: &'a mut dyn Write, color: bool) -> Self {
        Console { out, color }
    }

    /// Plain output, as used by tests and pipes.
    pub fn plain(out: &'a mut dyn Write) -> Self {
        Console { out, color: false }
    }

    fn paint(&self, code: &str, text: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }

    pub fn bold(&self, text: &str) -> String {
        self.paint("1", text)
    }

    pub fn red(&self, text: &str) -> String {
        self.paint("31", text)
    }

    pub fn yellow(&self, text: &str) -> String {
        self.paint("33", text)
    }
}

/// Whether ANSI styling is allowed by the environment.
pub fn color_allowed() -> bool {
    std::env::var_os("SEGSCORE_NO_COLOR").is_none()
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Errors are written to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_FATAL } else { EXIT_OK };
        }
    };
    let mut console = Console::new(out, color);
    let result = match &cli.command {
        Command::Lint { report } => cmd_lint(report, &mut console),
        Command::Evaluate(args) => RunConfig::from_args(args).and_then(|c| cmd_evaluate(&c, &mut console)),
        Command::Scenarios(args) => RunConfig::from_args(args).and_then(|c| cmd_scenarios(&c, &mut console)),
        Command::Visualize(args) => RunConfig::from_args(args).and_then(|c| cmd_visualize(&c, &mut console)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_FATAL
        }
    }
}
