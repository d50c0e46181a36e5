use std::io::{self, IsTerminal};
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = io::stdout();
    let color = stdout.is_terminal() && segscore_cli::color_allowed();
    let code = segscore_cli::run(std::env::args_os(), &mut stdout.lock(), &mut io::stderr(), color);
    ExitCode::from(code as u8)
}
