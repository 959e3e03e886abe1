use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lagrad::cli::{check_command, mms_command, run_command, sweep_command};
use lagrad::verify::mms::MmsPreset;
use lagrad::{load_config, Error, RunConfig};

/// Lagrangian viscous, radiative, reactive gas slab with free boundaries.
#[derive(Parser)]
#[command(name = "lagrad", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write snapshots and diagnostics.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a configuration and print the invariant pass/fail table.
    Check { config: PathBuf },
    /// Run a parameter grid concurrently and write a summary CSV.
    Sweep {
        manifest: PathBuf,
        #[arg(long, default_value = "sweep_out")]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print manufactured-solution convergence tables (CSV) for case `a` or `b`.
    Mms {
        case: String,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
}

fn load(path: &Path) -> Result<RunConfig, Error> {
    let cfg = load_config(path)?;
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load(&config)?;
            let run_id = config
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "run".into());
            let summary = run_command(&cfg, &run_id, &out)?;
            println!(
                "{run_id}: {} steps to t = {}, {} ({})",
                summary.steps,
                summary.t_final,
                summary.classification.as_str(),
                out.display()
            );
        }
        Command::Check { config } => {
            let cfg = load(&config)?;
            check_command(&cfg, &mut std::io::stdout())?;
        }
        Command::Sweep {
            manifest,
            out,
            jobs,
        } => {
            let rows = sweep_command(&manifest, &out, jobs)?;
            let failed = rows.iter().filter(|r| !r.completed()).count();
            println!(
                "{} runs, {failed} failed; summary in {}",
                rows.len(),
                out.join("summary.csv").display()
            );
        }
        Command::Mms { case, levels } => {
            let preset: MmsPreset = case.parse()?;
            mms_command(preset, levels, &mut std::io::stdout())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors count as validation failures
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
