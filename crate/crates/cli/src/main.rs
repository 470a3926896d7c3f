use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use subquantum_cli::config::RawConfig;
use subquantum_cli::{load_config_with, run_pipeline, Command};

/// Two-slit experiment runner.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    command: Command,

    /// Config file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Config overrides, `--key=value` or `--section.key=value`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "OVERRIDES")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let loaded = match &args.config {
        Some(path) => load_config_with(path, &args.overrides),
        None => {
            let mut raw = RawConfig::default();
            args.overrides
                .iter()
                .try_for_each(|o| raw.apply_override(o))
                .and_then(|_| raw.build())
        }
    };
    let cfg = match loaded {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    match run_pipeline(&cfg, args.command) {
        Ok(summary) => {
            print!("{}", summary.render());
            if summary.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
