use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use congestion_cli::{execute_run, execute_sweep, Emit, RunConfig};

/// Wave-front tracking for the p-system with a singular congestion pressure.
///
/// Log verbosity follows CONGESTION_LOG (error, warn, info, debug, trace).
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// Output directory (overrides output.dir).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Seed of the random perturbation (overrides scenario.seed).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Artifacts to write, comma separated: csv, json, svg.
    #[arg(long, global = true, value_name = "LIST", value_parser = Emit::parse)]
    emit: Option<Emit>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One run at eos.eps.
    Run { config: PathBuf },
    /// Every eps of the [sweep] table plus the convergence report.
    Sweep { config: PathBuf },
    /// Parse and check the configuration without running it.
    Validate { config: PathBuf },
}

fn load(cli: &Cli, path: &Path) -> Result<RunConfig, ExitCode> {
    let mut cfg = match RunConfig::from_path(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return Err(ExitCode::from(2));
        }
    };
    let mut changed = false;
    if let Some(dir) = &cli.out {
        cfg.output = dir.clone();
        changed = true;
    }
    if let Some(seed) = cli.seed {
        cfg.scenario.seed = seed;
        changed = true;
    }
    if let Some(emit) = cli.emit {
        cfg.emit = emit;
    }
    if changed {
        let v = cfg.violations();
        if !v.is_empty() {
            eprintln!(
                "error: {} is invalid with the command-line overrides:\n  - {}",
                path.display(),
                v.join("\n  - ")
            );
            return Err(ExitCode::from(2));
        }
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CONGESTION_LOG", "warn"))
        .init();
    let cli = Cli::parse();
    let (path, sweep) = match &cli.command {
        Command::Run { config } => (config, false),
        Command::Sweep { config } => (config, true),
        Command::Validate { config } => {
            return match load(&cli, config) {
                Ok(cfg) => {
                    let eps = cfg.eps_values();
                    println!(
                        "{}: ok ({} eps value{}, output {})",
                        config.display(),
                        eps.len(),
                        if eps.len() == 1 { "" } else { "s" },
                        cfg.output.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(code) => code,
            };
        }
    };
    let cfg = match load(&cli, path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let result = if sweep {
        execute_sweep(&cfg)
    } else {
        execute_run(&cfg)
    };
    match result {
        Ok(outcome) => {
            for r in &outcome.reports {
                println!(
                    "eps {:e}: {} interactions, glimm {:?}, speed band {:?}{}",
                    r.eps,
                    r.interactions,
                    r.glimm.verdict,
                    r.speed_band.verdict,
                    if r.complete { "" } else { " (partial)" }
                );
            }
            println!("artifacts in {}", outcome.dir.display());
            if outcome.failed() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
