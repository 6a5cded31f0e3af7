//! `bbs`: command-line front end.

mod args;
mod commands;
mod output;

use std::fs;
use std::process::ExitCode;

use anyhow::{Context, Result};
use bbs_core::{DynamicsError, EnsembleError, ParseError};
use bbs_measure::{Execution, MeasureError};
use bbs_tba::AnalyticsError;
use clap::Parser;
use serde_json::json;

use args::{Cli, SUBCOMMANDS};
use commands::{Invalid, RunContext};

const EXIT_INVALID: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

/// Global flags; from a config file they go before the subcommand.
const GLOBAL_KEYS: [&str; 3] = ["format", "out", "workers"];

/// Splices `key = value` lines of the `--config` file into `argv` so that
/// explicit flags, which come later, override them.
fn expand_config(argv: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    for (k, a) in argv.iter().enumerate() {
        if a == "--config" {
            path = argv.get(k + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_owned());
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = fs::read_to_string(&path).with_context(|| format!("reading config file {path}"))?;
    let (mut global, mut local) = (Vec::new(), Vec::new());
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Invalid(format!("{path}:{}: expected `key = value`", n + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"');
        let dest = if GLOBAL_KEYS.contains(&key.as_str()) { &mut global } else { &mut local };
        match value {
            "true" => dest.push(format!("--{key}")),
            "false" => {}
            v => {
                dest.push(format!("--{key}"));
                dest.push(v.to_owned());
            }
        }
    }
    let sub = argv.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())).unwrap_or(argv.len() - 1);
    let mut out = Vec::with_capacity(argv.len() + global.len() + local.len());
    out.push(argv[0].clone());
    out.extend(global);
    out.extend_from_slice(&argv[1..=sub]);
    out.extend(local);
    out.extend_from_slice(&argv[sub + 1..]);
    Ok(out)
}

fn is_validation(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.is::<Invalid>()
            || e.is::<ParseError>()
            || e.is::<EnsembleError>()
            || matches!(e.downcast_ref::<MeasureError>(), Some(m) if m.is_validation())
            || matches!(e.downcast_ref::<AnalyticsError>(), Some(AnalyticsError::DomainError(_)))
            || matches!(
                e.downcast_ref::<DynamicsError>(),
                Some(DynamicsError::ZeroCapacity | DynamicsError::LoadOutOfRange { .. } | DynamicsError::BadIndex)
            )
    })
}

fn run(cli: &Cli) -> Result<()> {
    let manifest = json!({
        "program": "bbs",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command.name(),
        "parameters": serde_json::to_value(&cli.command)?,
    });
    let ctx = RunContext {
        exec: Execution::with_workers(cli.output.workers),
        format: cli.output.format,
        manifest: &manifest,
    };
    let table = commands::run(&cli.command, &ctx)?;
    table
        .emit(cli.output.out.as_deref(), cli.output.format, &manifest)
        .context("writing output")
}

fn main() -> ExitCode {
    let argv = match expand_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let cli = Cli::parse_from(argv);
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_validation(&e) { EXIT_INVALID } else { EXIT_RUNTIME })
        }
    }
}
