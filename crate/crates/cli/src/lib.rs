//! Command-line front end for `adialim-core`.
//!
//! The binary exposes three subcommands:
//!
//! * `adialim run <config> [--out DIR] [--threads N]` — run an experiment
//!   from a TOML file or a preset name and write its reports;
//! * `adialim presets` — list the built-in presets;
//! * `adialim validate <config>` — schema-check a configuration without
//!   running it.
//!
//! Exit codes: `0` when the verdict passes, `2` when it fails, `1` for any
//! execution error (bad configuration, I/O, integrator failure).

pub mod config;
pub mod output;
pub mod presets;

use std::path::{Path, PathBuf};

use adialim_core::harness::{run_sweep, Verdict};
use anyhow::Context;

use config::{parse_config, RunConfig};

/// Where a configuration came from, for messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigSource {
    /// Read from a file on disk.
    File(PathBuf),
    /// A built-in preset.
    Preset(&'static str),
}

impl std::fmt::Display for ConfigSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigSource::File(p) => write!(f, "{}", p.display()),
            ConfigSource::Preset(name) => write!(f, "preset {name}"),
        }
    }
}

/// Resolves a `run`/`validate` argument to configuration text.
///
/// An existing file path wins; otherwise the argument is tried as a preset
/// name. The error for an unknown argument lists both interpretations.
pub fn resolve_source(arg: &str) -> anyhow::Result<(ConfigSource, String)> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        return Ok((ConfigSource::File(path.to_path_buf()), text));
    }
    if let Some(preset) = presets::find(arg) {
        return Ok((ConfigSource::Preset(preset.name), preset.toml.to_string()));
    }
    anyhow::bail!(
        "`{arg}` is neither a config file nor a preset name; run `adialim presets` for the built-in names"
    );
}

/// Parses, runs, and writes reports for one configuration.
///
/// Returns the verdict and the artifact paths written.
pub fn execute_run(
    cfg: &RunConfig,
    out_override: Option<&Path>,
) -> anyhow::Result<(Verdict, Vec<PathBuf>)> {
    let spec = cfg.to_sweep_spec()?;
    let report = run_sweep(&spec)?;
    let dir = out_override.unwrap_or(&cfg.output.directory);
    let written = output::write_outputs(&report, dir, &cfg.output.formats)?;
    Ok((report.verdict, written))
}

/// Full `run` command body: resolve, parse, execute.
pub fn run_command(arg: &str, out_override: Option<&Path>) -> anyhow::Result<(Verdict, Vec<PathBuf>)> {
    let (source, text) = resolve_source(arg)?;
    let cfg = parse_config(&text).with_context(|| format!("invalid configuration ({source})"))?;
    execute_run(&cfg, out_override)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolve_prefers_files_and_falls_back_to_presets() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(&path, "not parsed here").unwrap();
        let (source, text) = resolve_source(path.to_str().unwrap()).unwrap();
        assert_eq!(source, ConfigSource::File(path));
        assert_eq!(text, "not parsed here");

        let (source, text) = resolve_source("energy-bounds").unwrap();
        assert_eq!(source, ConfigSource::Preset("energy-bounds"));
        assert!(text.contains("experiment = \"energy-bounds\""));

        let err = resolve_source("no-such-thing").unwrap_err();
        assert!(err.to_string().contains("adialim presets"));
    }

    #[test]
    fn run_command_executes_a_small_config_end_to_end() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(
            &path,
            "schema_version = 1\nexperiment = \"energy-bounds\"\n\
             [profile]\ncase = \"A\"\nshape = \"constant\"\nm_minus = 1.0\n\
             [grid]\nn_nodes = 16\n\
             [sweep]\nT_values = [1.0, 2.0, 3.0, 4.0]\n\
             [output]\nformats = [\"json\"]\n",
        )
        .unwrap();
        let out = dir.path().join("results");
        let (verdict, written) = run_command(path.to_str().unwrap(), Some(&out)).unwrap();
        assert_eq!(verdict, Verdict::Pass);
        assert_eq!(written, vec![out.join("report.json")]);
        assert!(written[0].is_file());
    }
}
