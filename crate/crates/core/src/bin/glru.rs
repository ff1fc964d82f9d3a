use std::process::ExitCode;

use clap::Parser;
use glru::cli::{run, Cli, RunConfig};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let config = match RunConfig::from_cli(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("glru: {e}");
            return ExitCode::from(1);
        }
    };
    match run(&config) {
        Ok(summary) => {
            print!("{summary}");
            println!("results written to {}", config.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("glru: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
