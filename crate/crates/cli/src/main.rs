use std::fs::File;
use std::io::{self, BufWriter};
use std::process::ExitCode;

use clap::Parser;
use lrdrive_cli::{run, Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli.command).and_then(|table| {
        match cli.command.out() {
            Some(path) => table.write_to(BufWriter::new(File::create(path)?))?,
            None => table.write_to(BufWriter::new(io::stdout().lock()))?,
        }
        Ok::<_, CliError>(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
