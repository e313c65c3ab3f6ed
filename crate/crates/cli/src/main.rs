mod args;
mod commands;
mod error;
mod report;

use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use args::{Cli, Command, Format};
use commands::{estimate, simulate, unitroot};
use error::CliError;
use report::RunReport;

fn run(cli: &Cli) -> Result<RunReport, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::usage("argument parsing", "--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage("thread pool setup", e))?;
    }
    match &cli.command {
        Command::Estimate(a) => estimate::run(a),
        Command::Unitroot(a) => unitroot::run_unitroot(a, cli.seed),
        Command::Coint(a) => unitroot::run_coint(a),
        Command::Simulate(a) => simulate::run_simulate(a, cli.seed),
        Command::Mc(a) => simulate::run_mc(a, cli.seed, cli.threads),
        Command::Moments(a) => unitroot::run_moments(a, cli.seed),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            eprintln!("\n{}", Cli::command().render_usage());
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(report) => {
            for w in &report.warnings {
                log::warn!("{w}");
            }
            match cli.format {
                Format::Json => println!("{}", report.render_json()),
                Format::Table => print!("{}", report.render_table()),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.kind.exit_code() as u8)
        }
    }
}
