use std::io;
use std::process::ExitCode;

use clap::Parser;
use dephase_cli::{execute, Cli};

fn main() -> ExitCode {
    // clap reports usage errors itself with exit code 2
    let cli = Cli::parse();
    match execute(cli, &mut io::stdout().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dephase: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
