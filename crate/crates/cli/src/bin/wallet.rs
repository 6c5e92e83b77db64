use std::process::ExitCode;

use clap::Parser;
use sfwt_cli::wallet::{run, Cli, EXIT_OTHER};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli, &mut std::io::stdout().lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_OTHER
        }
    };
    ExitCode::from(code as u8)
}
