//! `rydcool`: C6 maps, dressed potentials, phonon-swap traces and pulse
//! design from a config file.
//!
//! Exit codes: 0 success, 1 invalid input, 2 failed computation (and any
//! failed self-test criterion).

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use rydcool::atomdata::{load_species, SpeciesData};
use rydcool::par::Execution;
use rydcool::Error;

use config::RunConfig;
use output::{Format, Provenance};

#[derive(Debug, Parser)]
#[command(name = "rydcool", version, about = "Rydberg-dressed sympathetic cooling of atom registers")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// selftest: skip the C6-map grid criterion.
    #[arg(long, global = true)]
    fast: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// C6 and deviation from identity over a grid of (n, dn).
    C6map,
    /// Data/auxiliary chain phonon swap trace.
    Swap,
    /// Adiabatic pulse trajectory, areas and optional optimization.
    Pulse,
    /// Dressed potentials over r with the exact-diagonalization column.
    Dress,
    /// Run the acceptance checks.
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::C6map => "c6map",
            Command::Swap => "swap",
            Command::Pulse => "pulse",
            Command::Dress => "dress",
            Command::Selftest => "selftest",
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}

/// The error chain joined by `: `, skipping causes already quoted by the
/// message above them.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !out.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let validation = e.chain().any(|c| {
        matches!(
            c.downcast_ref::<Error>(),
            Some(Error::Parse { .. } | Error::Io { .. } | Error::InvalidArgument(_) | Error::MissingSeries(_))
        )
    });
    if validation {
        1
    } else {
        2
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let (cfg, bytes) = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => (RunConfig::default(), Vec::new()),
    };
    let exec = match cli.threads {
        Some(0) => return Err(Error::InvalidArgument("--threads must be at least 1".into()).into()),
        Some(1) => Execution::Sequential,
        _ => Execution::Parallel,
    };
    #[cfg(feature = "parallel")]
    if let Some(n) = cli.threads.filter(|&n| n > 1) {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
        return pool.install(|| dispatch(cli, &cfg, &bytes, exec));
    }
    #[cfg(not(feature = "parallel"))]
    if cli.threads.is_some_and(|n| n > 1) {
        log::warn!("built without the `parallel` feature; --threads is ignored");
    }
    dispatch(cli, &cfg, &bytes, exec)
}

fn species(cfg: &RunConfig) -> rydcool::Result<SpeciesData> {
    match &cfg.species_file {
        Some(path) => load_species(path),
        None => Ok(SpeciesData::rb87()),
    }
}

fn dispatch(cli: &Cli, cfg: &RunConfig, bytes: &[u8], exec: Execution) -> Result<ExitCode> {
    if let Command::Selftest = cli.command {
        return selftest(cli, cfg, exec);
    }
    let sp = species(cfg)?;
    let table = match cli.command {
        Command::C6map => commands::c6map(&sp, &cfg.c6map, exec)?,
        Command::Swap => commands::swap(&cfg.swap)?,
        Command::Pulse => commands::pulse(&sp, &cfg.pulse)?,
        Command::Dress => commands::dress(&sp, &cfg.dress, exec)?,
        Command::Selftest => unreachable!(),
    };
    let prov = Provenance {
        command: cli.command.name(),
        config: bytes,
    };
    emit(cli, &output::render(&table, cli.format, &prov))?;
    Ok(ExitCode::SUCCESS)
}

fn selftest(cli: &Cli, cfg: &RunConfig, exec: Execution) -> Result<ExitCode> {
    let sp = species(cfg);
    let msg = sp.as_ref().err().map(|e| e.to_string());
    let results = rydcool::selftest::run_all(sp.as_ref().map_err(|_| msg.as_deref().unwrap_or_default()), cli.fast, exec);
    let passed = results.iter().filter(|r| r.passed).count();
    let text = match cli.format {
        Format::Csv => {
            let mut s: String = results.iter().map(|r| format!("{r}\n")).collect();
            s.push_str(&format!("{passed}/{} criteria passed\n", results.len()));
            s
        }
        Format::Json => {
            let rows: Vec<_> = results
                .iter()
                .map(|r| serde_json::json!({ "id": r.id, "name": r.name, "passed": r.passed, "detail": r.detail }))
                .collect();
            serde_json::to_string_pretty(&rows)? + "\n"
        }
    };
    emit(cli, &text)?;
    Ok(if passed == results.len() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(text.as_bytes()).context("writing to stdout")
        }
    }
}
