//! Built-in experiment presets.
//!
//! Each preset is an ordinary TOML configuration embedded in the binary and
//! parsed through the same schema as user files, so `adialim run <name>`
//! and `adialim run <file>` take exactly the same path. Together the seven
//! presets exercise every claim the harness knows how to check.

/// A named, embedded configuration.
#[derive(Debug, Clone, Copy)]
pub struct Preset {
    /// Name accepted by `run` and `validate`.
    pub name: &'static str,
    /// One-line account of what the run establishes.
    pub description: &'static str,
    /// The embedded TOML text.
    pub toml: &'static str,
}

/// All presets, in listing order.
pub const PRESETS: [Preset; 7] = [
    Preset {
        name: "adiabatic-rate-caseA",
        description: "fits the decay of the weighted gap between the exact and adiabatic propagators across a positive mass ramp; slope ≈ −1 confirms first-order convergence in the drive time",
        toml: r#"
schema_version = 1
experiment = "adiabatic-rate"

[profile]
case = "A"
m_minus = 1.0
m_plus = 2.0

[sweep]
T_values = [16.0, 32.0, 64.0, 128.0, 256.0]

[integrator]
rel_tol = 1e-11
"#,
    },
    Preset {
        name: "wkb-rate-caseA",
        description: "fits the decay of the gap between the phase-integral (WKB) factorization and the exact propagator; slope ≈ −1 confirms the error order of the truncated expansion",
        toml: r#"
schema_version = 1
experiment = "wkb-rate"

[profile]
case = "A"
m_minus = 1.0
m_plus = 2.0

[sweep]
T_values = [16.0, 32.0, 64.0, 128.0, 256.0]

[integrator]
rel_tol = 1e-11
"#,
    },
    Preset {
        name: "intertwining-audit",
        description: "checks that the auxiliary adiabatic flow transports the instantaneous spectral projector exactly, leaving only integrator noise",
        toml: r#"
schema_version = 1
experiment = "intertwining-audit"

[profile]
case = "A"
m_minus = 1.0
m_plus = 2.0

[sweep]
T_values = [2.0, 4.0, 8.0, 16.0]

[integrator]
rel_tol = 1e-11
"#,
    },
    Preset {
        name: "vacuum-limit",
        description: "verifies that a vacuum prepared before a mass turn-on converges weakly, mode by mode under spectral smearing, to the outgoing vacuum",
        toml: r#"
schema_version = 1
experiment = "vacuum-limit"

[profile]
case = "B"
m_minus = 0.0
m_plus = 1.0

[sweep]
T_values = [16.0, 32.0, 64.0, 128.0, 256.0]
threshold = 1e-2

[integrator]
rel_tol = 1e-9
"#,
    },
    Preset {
        name: "kms-defect",
        description: "verifies the weak limit of a thermal state across a mass change and records the spread of its effective temperature: the limit is thermal mode by mode but at no single temperature",
        toml: r#"
schema_version = 1
experiment = "kms-limit"

[profile]
case = "A"
m_minus = 1.0
m_plus = 2.0

[sweep]
T_values = [16.0, 32.0, 64.0, 128.0, 256.0]
threshold = 1e-2

[integrator]
rel_tol = 1e-9

[state]
beta = 1.0
"#,
    },
    Preset {
        name: "hadamard-limit",
        description: "verifies that a smoothly excited state converges weakly to the outgoing vacuum plus a remainder whose weighted norms decay rapidly in the mode frequency",
        toml: r#"
schema_version = 1
experiment = "hadamard-limit"

[profile]
case = "A"
m_minus = 1.0
m_plus = 2.0

[sweep]
T_values = [16.0, 32.0, 64.0, 128.0, 256.0]
threshold = 1e-2

[integrator]
rel_tol = 1e-9

[state]
hadamard_preset = "gaussian"
"#,
    },
    Preset {
        name: "energy-bounds",
        description: "audits the weighted-norm estimates that keep the driven dynamics uniformly bounded in the drive time, at a lattice of start and end times",
        toml: r#"
schema_version = 1
experiment = "energy-bounds"

[profile]
case = "A"
m_minus = 1.0
m_plus = 2.0

[sweep]
T_values = [2.0, 4.0, 8.0, 16.0]

[integrator]
rel_tol = 1e-9
"#,
    },
];

/// Looks up a preset by name.
pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use adialim_core::harness::Experiment;

    #[test]
    fn there_are_seven_presets_with_unique_names() {
        let mut names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        assert_eq!(names.len(), 7);
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), 7);
    }

    #[test]
    fn every_preset_parses_and_builds_a_sweep() {
        for preset in &PRESETS {
            let cfg = parse_config(preset.toml)
                .unwrap_or_else(|e| panic!("preset {} is invalid:\n{e}", preset.name));
            cfg.to_sweep_spec()
                .unwrap_or_else(|e| panic!("preset {} does not build: {e}", preset.name));
            assert!(!preset.description.is_empty());
        }
    }

    #[test]
    fn preset_experiments_cover_every_runner() {
        let mut kinds: Vec<Experiment> = PRESETS
            .iter()
            .map(|p| parse_config(p.toml).unwrap().experiment)
            .collect();
        kinds.sort_by_key(|e| e.name());
        kinds.dedup();
        assert_eq!(kinds.len(), 7, "each experiment appears exactly once");
    }

    #[test]
    fn lookup_is_by_exact_name() {
        assert!(find("vacuum-limit").is_some());
        assert!(find("kms-defect").is_some());
        assert!(find("Vacuum-Limit").is_none());
        assert!(find("nonexistent").is_none());
    }
}
