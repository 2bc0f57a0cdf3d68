use std::process::ExitCode;

use clap::Parser;
use relindex_cli::runner::{all_pass, run, summary, write_jsonl};
use relindex_cli::{exit, Cli, ExperimentConfig};

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors.
    let cli = Cli::parse();
    let outcome = ExperimentConfig::resolve(&cli).and_then(|cfg| {
        let runs = run(&cfg)?;
        if let Some(path) = &cfg.out {
            write_jsonl(path, &runs)?;
        }
        Ok(runs)
    });
    match outcome {
        Ok(runs) => {
            print!("{}", summary(&runs));
            ExitCode::from(if all_pass(&runs) { exit::PASS } else { exit::IDENTITY_FAILURE })
        }
        Err(e) => {
            eprintln!("relindex: {e:#}");
            ExitCode::from(exit::USAGE)
        }
    }
}
