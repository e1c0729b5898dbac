use std::process::ExitCode;

use clap::Parser;
use rkg_cli::args::{Action, Cli};
use rkg_cli::{execute, replay, RunOutcome};

fn report(outcome: &RunOutcome) {
    println!("run {} -> {}", outcome.run_id, outcome.dir.display());
    for line in &outcome.summary {
        println!("  {line}");
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = cli.into_action().and_then(|action| match action {
        Action::Run(cfg) => execute(&cfg),
        Action::Replay { manifest, out } => replay(&manifest, out),
    });
    match result {
        Ok(outcome) => {
            report(&outcome);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
