use std::process::ExitCode;

use clap::Parser;
use geoseg_cli::commands::{self, Cli, Command, Outcome};
use geoseg_cli::server;

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Segment(args) => Ok(match commands::segment(&args)? {
            Outcome::Converged => ExitCode::SUCCESS,
            Outcome::MaxIterations => {
                eprintln!("warning: stopped at the iteration limit without converging");
                ExitCode::from(2)
            }
        }),
        Command::Distance(args) => commands::distance(&args).map(|_| ExitCode::SUCCESS),
        Command::Synth(args) => commands::synth(&args).map(|_| ExitCode::SUCCESS),
        Command::Sweep(args) => commands::sweep(&args).map(|_| ExitCode::SUCCESS),
        Command::Serve(args) => {
            let port = server::resolve_port(args.port)?;
            tokio::runtime::Runtime::new()?.block_on(server::serve(&args.host, port))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
