use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use ptspec_cli::config::Format;
use ptspec_cli::report::{write_csv, write_json};
use ptspec_cli::run::{EXIT_FAILURE, EXIT_USAGE};
use ptspec_cli::{execute, parse_config, ConfigError, Outcome, RunConfig};

fn emit(config: &RunConfig, outcome: &Outcome) -> io::Result<()> {
    let sink: Box<dyn Write> = match &config.out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    match config.format {
        Format::Json => write_json(&outcome.report, &mut sink)?,
        Format::Csv => {
            write_csv(&outcome.rows, &mut sink)?;
            for c in &outcome.report.checks {
                eprintln!("{}: {:?} (measured {:e}, threshold {:e})", c.name, c.status, c.measured, c.threshold);
            }
            if let Some(err) = outcome.report.results.get("error") {
                eprintln!("error: {err}");
            }
        }
    }
    sink.flush()
}

fn main() -> ExitCode {
    let config = match parse_config(std::env::args_os().skip(1)) {
        Ok(c) => c,
        Err(ConfigError::Info(text)) => {
            print!("{text}");
            return ExitCode::SUCCESS;
        }
        Err(ConfigError::Usage(text)) => {
            eprint!("{text}");
            if !text.ends_with('\n') {
                eprintln!();
            }
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let outcome = execute(&config);
    if let Err(e) = emit(&config, &outcome) {
        eprintln!("ptspec: cannot write output: {e}");
        return ExitCode::from(EXIT_FAILURE as u8);
    }
    ExitCode::from(outcome.exit_code as u8)
}
