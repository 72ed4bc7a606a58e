//! Batch CLI for Bergman-space Toeplitz spectra.
//!
//! Usage: `bergman-spectra <command> --config <path> [--out <path>] [--format json|csv]`

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use bergman_spectra::cli::{run, validate_config, Command, Format};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(
    name = "bergman-spectra",
    about = "Toeplitz operator spectra on weighted Bergman spaces over projective space",
    version
)]
struct Args {
    /// Job command: spectrum, matrix, decompose, verify, or average.
    command: String,
    /// Path to the JSON job configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file (overrides the config's output.path); stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (overrides the config's output.format).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

fn main() -> ExitCode {
    let args = Args::parse();

    let Some(command) = Command::parse(&args.command) else {
        eprintln!(
            "unknown command `{}`; expected spectrum, matrix, decompose, verify, or average",
            args.command
        );
        return ExitCode::from(1);
    };

    let text = match fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read config {}: {e}", args.config.display());
            return ExitCode::from(1);
        }
    };

    let mut config = match validate_config(&text) {
        Ok(c) => c,
        Err(diags) => {
            eprintln!("{}", serde_json::to_string_pretty(&diags).unwrap());
            return ExitCode::from(1);
        }
    };
    if let Some(out) = args.out {
        config.out_path = Some(out);
    }
    if let Some(format) = args.format {
        config.format = match format {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        };
    }

    match run(command, &config) {
        Ok(result) => {
            if config.out_path.is_none() {
                print!("{}", result.document);
            }
            ExitCode::from(result.exit_code as u8)
        }
        Err(e @ bergman_spectra::Error::NonConvergence(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}
