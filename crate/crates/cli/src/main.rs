use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = contralign_cli::Cli::parse();
    let mut out = std::io::stdout().lock();
    match contralign_cli::run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
