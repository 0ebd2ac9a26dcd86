use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use rydmol::config::{parse_config, Format, Scenario};
use rydmol::run::{execute, render};

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// Molecule-Rydberg-atom CZ gate simulator and error-budget tool.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Scenario to run; must match the `scenario` field of the config.
    #[arg(value_parser = scenario_names())]
    scenario: String,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output path; overrides `output.path`. Without either, writes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; overrides `output.format`.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Worker threads for parallel sweeps.
    #[arg(long)]
    threads: Option<usize>,
}

fn scenario_names() -> Vec<&'static str> {
    Scenario::ALL.iter().map(|s| s.name()).collect()
}

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: invalid config {}:\n{e}", args.config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if cfg.scenario.name() != args.scenario {
        eprintln!(
            "error: command line asks for scenario {} but the config declares {}",
            args.scenario,
            cfg.scenario.name()
        );
        return ExitCode::from(EXIT_CONFIG);
    }
    let format = match args.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        None => cfg.format,
    };
    let outcome = match execute(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if e.is_config() { EXIT_CONFIG } else { EXIT_NUMERIC });
        }
    };
    let body = match render(&cfg, &outcome, format) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: cannot render output: {e}");
            return ExitCode::from(EXIT_NUMERIC);
        }
    };
    match args.out.or_else(|| cfg.output_path.clone().map(PathBuf::from)) {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, body) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_IO);
            }
        }
        None => print!("{body}"),
    }
    ExitCode::SUCCESS
}
