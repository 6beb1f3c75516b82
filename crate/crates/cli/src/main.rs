use std::path::PathBuf;
use std::process::ExitCode;

use adialim_core::harness::Verdict;
use adialim_cli::output::verdict_label;
use adialim_cli::{config, presets, resolve_source};
use clap::{Parser, Subcommand};

/// Weak adiabatic limits for slowly driven oscillator modes: run, audit,
/// and report on the numerical experiments of `adialim-core`.
#[derive(Parser)]
#[command(name = "adialim", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML config file or a preset name.
    Run {
        /// Path to a config file, or a preset name (see `adialim presets`).
        config: String,
        /// Output directory; overrides the config's `output.directory`.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Worker threads for the sweep (default: all logical processors).
        #[arg(long, value_name = "N")]
        threads: Option<usize>,
    },
    /// List the built-in presets.
    Presets,
    /// Parse and schema-check a config file or preset without running it.
    Validate {
        /// Path to a config file, or a preset name.
        config: String,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run { config, out, threads } => {
            if let Some(n) = threads {
                anyhow::ensure!(n >= 1, "--threads must be at least 1");
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| anyhow::anyhow!("cannot configure {n} worker threads: {e}"))?;
            }
            let (verdict, written) = adialim_cli::run_command(&config, out.as_deref())?;
            println!("verdict: {}", verdict_label(verdict));
            for path in &written {
                println!("wrote {}", path.display());
            }
            Ok(match verdict {
                Verdict::Pass | Verdict::PassDegenerate => ExitCode::SUCCESS,
                Verdict::Fail => ExitCode::from(2),
            })
        }
        Command::Presets => {
            for preset in &presets::PRESETS {
                println!("{:<22} {}", preset.name, preset.description);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config } => {
            let (source, text) = resolve_source(&config)?;
            match config::parse_config(&text) {
                Ok(cfg) => {
                    cfg.to_sweep_spec()?;
                    println!(
                        "ok: {} is a valid {} configuration",
                        source,
                        cfg.experiment.name()
                    );
                    Ok(ExitCode::SUCCESS)
                }
                Err(err) => {
                    eprintln!("invalid configuration ({source})\n{err}");
                    Ok(ExitCode::from(1))
                }
            }
        }
    }
}
