//! Trial orchestration, JSONL output and the stdout summary.

use std::io::Write;
use std::path::Path;

use anyhow::Context;
use rayon::prelude::*;
use relindex_core::{matrix_io, VerificationReport};
use serde::Serialize;

use crate::commands::{on_input, run_trial};
use crate::config::{Command, ExperimentConfig};

/// Caps the number of worker threads for sweeps.
pub const THREADS_ENV: &str = "XI_INDEX_THREADS";

/// One JSONL line.
#[derive(Debug, Serialize)]
pub struct Record<'a> {
    pub command: &'static str,
    #[serde(flatten)]
    pub report: &'a VerificationReport,
}

/// Reports of one command, ordered by trial index.
#[derive(Debug)]
pub struct CommandRun {
    pub command: Command,
    pub reports: Vec<VerificationReport>,
}

fn thread_pool() -> anyhow::Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .with_context(|| format!("{THREADS_ENV} must be a positive integer, got `{v}`"))?;
        builder = builder.num_threads(n);
    }
    builder.build().context("cannot start worker threads")
}

/// Runs the configured experiment. Errors are configuration or input
/// problems; identity failures are carried in the reports.
pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<Vec<CommandRun>> {
    if let Some(path) = &cfg.input {
        let m = matrix_io::read(path).with_context(|| format!("cannot load operator from {}", path.display()))?;
        let report = on_input(cfg, cfg.command, &m)?;
        return Ok(vec![CommandRun {
            command: cfg.command,
            reports: vec![report],
        }]);
    }
    let commands: Vec<Command> = if cfg.command == Command::Sweep {
        Command::SWEPT.to_vec()
    } else {
        vec![cfg.command]
    };
    let pool = thread_pool()?;
    Ok(commands
        .into_iter()
        .map(|command| {
            // Collecting an indexed parallel iterator keeps trial order.
            let reports = pool.install(|| {
                (0..cfg.trials as u64)
                    .into_par_iter()
                    .map(|t| run_trial(cfg, command, t))
                    .collect()
            });
            CommandRun { command, reports }
        })
        .collect())
}

pub fn all_pass(runs: &[CommandRun]) -> bool {
    runs.iter().all(|r| r.reports.iter().all(|x| x.pass))
}

pub fn write_jsonl(path: &Path, runs: &[CommandRun]) -> anyhow::Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut out = std::io::BufWriter::new(file);
    for run in runs {
        for report in &run.reports {
            let record = Record {
                command: run.command.name(),
                report,
            };
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()?;
    Ok(())
}

/// One line per command plus the first few failures.
pub fn summary(runs: &[CommandRun]) -> String {
    let mut s = String::new();
    for run in runs {
        let passed = run.reports.iter().filter(|r| r.pass).count();
        let worst = run.reports.iter().map(|r| r.residual).fold(0.0, f64::max);
        let elapsed: f64 = run.reports.iter().filter_map(|r| r.elapsed_ms).sum();
        s.push_str(&format!(
            "{}: {passed}/{} passed, max residual {worst:.3e}, {:.2} s cpu\n",
            run.command,
            run.reports.len(),
            elapsed / 1e3
        ));
        let strategies: Vec<String> = run
            .reports
            .iter()
            .filter(|r| r.inputs.trial.is_none())
            .flat_map(|r| {
                r.quantities
                    .iter()
                    .filter(|(k, _)| k.starts_with("tau_xi_"))
                    .map(|(k, v)| format!("  {k} = {}", serde_json::to_string(v).unwrap_or_default()))
            })
            .collect();
        for line in strategies {
            s.push_str(&line);
            s.push('\n');
        }
        for r in run.reports.iter().filter(|r| !r.pass).take(5) {
            let trial = r.inputs.trial.map(|t| format!("trial {t}")).unwrap_or_else(|| "input".into());
            let failing = r.details.iter().find(|c| !c.pass).map(|c| c.name.as_str()).unwrap_or("");
            s.push_str(&format!(
                "  FAIL {trial} [{}]: {failing}: residual {:.3e} > {:.1e}",
                r.inputs.descriptor, r.residual, r.tolerance
            ));
            if let Some(w) = r.warnings.first() {
                s.push_str(&format!(" ({w})"));
            }
            s.push('\n');
        }
    }
    let verdict = if all_pass(runs) { "PASS" } else { "FAIL" };
    s.push_str(&format!("overall: {verdict}\n"));
    s
}
