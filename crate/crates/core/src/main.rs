use std::io;
use std::process::ExitCode;

use clap::Parser;
use q2mono::cli::{self, Cli};

fn main() -> ExitCode {
    let args = Cli::parse();
    let code = match cli::run(args, &mut io::stdout().lock(), &mut io::stderr().lock()) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            cli::EXIT_ERROR
        }
    };
    ExitCode::from(code as u8)
}
