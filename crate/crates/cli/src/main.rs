mod args;
mod commands;
mod error;
mod output;
mod plot;

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::{Cli, Command, RunConfig};
use error::{CliError, CliResult};
use output::Sink;

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    let cli = match &cli.command {
        Command::FromConfig(a) => {
            let text = fs::read_to_string(&a.path).map_err(|e| CliError::io(&a.path, e))?;
            let config: RunConfig = serde_json::from_str(&text)
                .map_err(|e| CliError::usage(format!("{}: {e}", a.path.display())))?;
            let argv = config.to_argv()?;
            Cli::try_parse_from(&argv).map_err(|e| CliError::usage(format!("{}: {e}", a.path.display())))?
        }
        _ => cli,
    };

    let start = Instant::now();
    let params = match cli.command.parameters() {
        serde_json::Value::Object(map) => map,
        _ => unreachable!("argument structs serialize to objects"),
    };
    let config = RunConfig {
        command: cli.command.name().to_string(),
        parameters: params,
        seed: Some(cli.seed),
        output_dir: Some(cli.output_dir.clone()),
        format: Some(cli.format),
    };
    let mut sink = Sink::create(&cli.output_dir, cli.format)?;
    let report = commands::run(&cli.command, cli.seed, &mut sink)?;
    sink.manifest(&config, report.summary, start.elapsed())?;
    match report.check_failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
