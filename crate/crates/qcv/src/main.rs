//! qcv: runs quasicoherent sheaf scenarios and reports per-degree tables and verdicts.
//!
//! Exit codes: 0 all verdicts as expected, 1 mismatch, 2 inconclusive, 3 input error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qcoh::linalg::FieldSpec;
use qcoh::report::{emit_report, run_scenario, Format, Outcome};
use qcoh::scenario::{builtin, parse_scenario_with, parse_window, Overrides, Scenario, BUILTIN_NAMES};

#[derive(Parser)]
#[command(name = "qcv", version, about = "Verify quasicoherent sheaf scenarios with exact arithmetic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file
    Run {
        file: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run an embedded scenario
    Builtin {
        name: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// List embedded scenarios
    List,
    /// Print the text of an embedded scenario
    Show { name: String },
}

#[derive(Args)]
struct RunOpts {
    /// Degree window LO:HI
    #[arg(long, allow_hyphen_values = true, value_parser = window_arg)]
    window: Option<(i64, i64)>,
    /// Initial denominator cap
    #[arg(long)]
    den_cap: Option<u32>,
    /// Coefficient field: Q or Fp:P
    #[arg(long, value_parser = field_arg)]
    field: Option<FieldSpec>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Table,
}

fn window_arg(s: &str) -> Result<(i64, i64), String> {
    parse_window(s).map_err(|e| e.to_string())
}

fn field_arg(s: &str) -> Result<FieldSpec, String> {
    FieldSpec::parse(s).map_err(|e| e.to_string())
}

const INPUT_ERROR: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for name in BUILTIN_NAMES {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Command::Show { name } => match qcoh::scenario::builtin_text(&name) {
            Some(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("error: unknown built-in `{name}`");
                ExitCode::from(INPUT_ERROR)
            }
        },
        Command::Run { file, opts } => {
            let overrides = opts.overrides();
            let scenario = std::fs::read_to_string(&file)
                .map_err(|e| format!("cannot read {}: {e}", file.display()))
                .and_then(|text| parse_scenario_with(&text, &overrides).map_err(|e| e.to_string()));
            execute(scenario, &opts)
        }
        Command::Builtin { name, opts } => {
            let scenario = builtin(&name, &opts.overrides()).map_err(|e| e.to_string());
            execute(scenario, &opts)
        }
    }
}

impl RunOpts {
    fn overrides(&self) -> Overrides {
        Overrides { window: self.window, den_cap: self.den_cap, field: self.field }
    }
}

fn execute(scenario: Result<Scenario, String>, opts: &RunOpts) -> ExitCode {
    let scenario = match scenario {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(INPUT_ERROR);
        }
    };
    let report = run_scenario(&scenario);
    let format = match opts.format {
        FormatArg::Json => Format::Json,
        FormatArg::Table => Format::Table,
    };
    let text = emit_report(&report, format);
    match &opts.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(INPUT_ERROR);
            }
        }
        None => print!("{text}"),
    }
    let outcome = report.outcome(&scenario.expect);
    match &outcome {
        Outcome::AsExpected => {}
        Outcome::Mismatch(names) => eprintln!("verdict mismatch: {}", names.join(", ")),
        Outcome::Inconclusive(names) => eprintln!("inconclusive: {}", names.join(", ")),
        Outcome::Failed(names) => eprintln!("failed: {}", names.join(", ")),
    }
    ExitCode::from(outcome.exit_code() as u8)
}
