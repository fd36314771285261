use std::process::ExitCode;

use clap::Parser;
use gencheb_cli::args::Cli;
use gencheb_cli::commands;
use gencheb_cli::error::exit;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("gencheb: cannot configure thread pool: {e}");
            return ExitCode::from(exit::INTERNAL as u8);
        }
    }
    match commands::run(&cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gencheb: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
