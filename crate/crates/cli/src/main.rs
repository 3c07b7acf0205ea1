use std::io;
use std::process::ExitCode;

use clap::Parser;
use cutters_cli::{run, Cli, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = run(cli, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code as u8)
}
