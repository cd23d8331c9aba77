use std::process::ExitCode;

use clap::Parser;
use repalign_cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match repalign_cli::run(&cli) {
        Ok(written) => {
            for path in written {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
