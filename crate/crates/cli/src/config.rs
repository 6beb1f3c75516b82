//! Experiment configuration: a versioned TOML schema.
//!
//! One file format describes every experiment. Parsing is strict and
//! helpful: unknown keys are rejected with a suggestion, every violation is
//! collected (not just the first), and all defaults are explicit so the
//! harness can echo the complete effective configuration into its reports.
//!
//! ```toml
//! schema_version = 1
//! experiment = "vacuum-limit"
//!
//! [profile]
//! case = "B"            # A: positive mass; B: turns on; C: turns off
//! shape = "smoothstep"  # or "constant"
//! m_minus = 0.0         # defaults depend on the case
//! m_plus = 1.0
//!
//! [grid]
//! delta = 0.5
//! R = 4.0
//! n_nodes = 33
//! measure_power = 2
//!
//! [sweep]
//! T_values = [16.0, 32.0, 64.0, 128.0, 256.0]
//! threshold = 1e-2
//!
//! [integrator]
//! rel_tol = 1e-9
//! abs_tol = 1e-13
//! max_steps = 2000000
//! initial_step = 0.0
//!
//! [state]
//! kind = "vacuum"       # must match the experiment for limit runs
//! beta = 1.0
//! hadamard_preset = "gaussian"
//!
//! [test_function]
//! support = [0.5, 4.0]
//!
//! [output]
//! directory = "out"
//! formats = ["json", "csv", "summary"]
//! ```

use std::fmt;
use std::path::PathBuf;

use adialim_core::harness::{Experiment, StateParams, SweepSpec};
use adialim_core::profile::{MassProfile, MonotonicityCase};
use adialim_core::propagators::IntegratorConfig;
use adialim_core::smearing::{build_grid, TestFunction, MAX_MEASURE_POWER};

/// The schema version this build reads.
pub const SCHEMA_VERSION: i64 = 1;

/// All experiment names, for messages and validation.
pub const EXPERIMENT_NAMES: [&str; 7] = [
    "adiabatic-rate",
    "wkb-rate",
    "vacuum-limit",
    "kms-limit",
    "hadamard-limit",
    "energy-bounds",
    "intertwining-audit",
];

/// Profile block.
#[derive(Debug, Clone)]
pub struct ProfileConfig {
    /// Monotonicity case.
    pub case: MonotonicityCase,
    /// `"smoothstep"` or `"constant"`.
    pub shape: String,
    /// Initial mass.
    pub m_minus: f64,
    /// Final mass.
    pub m_plus: f64,
}

/// Grid block.
#[derive(Debug, Clone)]
pub struct GridConfig {
    /// Infrared cutoff δ.
    pub delta: f64,
    /// Ultraviolet cutoff R.
    pub r: f64,
    /// Base node count.
    pub n_nodes: usize,
    /// Spectral density exponent.
    pub measure_power: u32,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            delta: 0.5,
            r: 4.0,
            n_nodes: 33,
            measure_power: 2,
        }
    }
}

/// Sweep block.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Slow-time scales.
    pub t_values: Vec<f64>,
    /// Limit-experiment pass threshold.
    pub threshold: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            t_values: vec![16.0, 32.0, 64.0, 128.0, 256.0],
            threshold: 1e-2,
        }
    }
}

/// State block.
#[derive(Debug, Clone)]
pub struct StateConfig {
    /// Optional explicit kind; checked against the experiment.
    pub kind: Option<String>,
    /// Inverse temperature.
    pub beta: f64,
    /// Hadamard data preset name.
    pub hadamard_preset: String,
}

impl Default for StateConfig {
    fn default() -> Self {
        StateConfig {
            kind: None,
            beta: 1.0,
            hadamard_preset: "gaussian".to_string(),
        }
    }
}

/// Test-function block.
#[derive(Debug, Clone)]
pub struct TestFunctionConfig {
    /// Support [δ′, R′] of the C² bump.
    pub support: (f64, f64),
}

impl Default for TestFunctionConfig {
    fn default() -> Self {
        TestFunctionConfig { support: (0.5, 4.0) }
    }
}

/// Report formats the CLI can write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    /// Full report as `report.json`.
    Json,
    /// Sweep rows as `rows.csv`.
    Csv,
    /// Human-readable `summary.txt` (the only artifact with a timestamp).
    Summary,
}

/// Output block.
#[derive(Debug, Clone)]
pub struct OutputConfig {
    /// Destination directory; `--out` overrides.
    pub directory: PathBuf,
    /// Which artifacts to write.
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: PathBuf::from("out"),
            formats: vec![OutputFormat::Json, OutputFormat::Csv, OutputFormat::Summary],
        }
    }
}

/// A fully validated experiment configuration with all defaults applied.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Experiment selector.
    pub experiment: Experiment,
    /// Profile block.
    pub profile: ProfileConfig,
    /// Grid block.
    pub grid: GridConfig,
    /// Sweep block.
    pub sweep: SweepConfig,
    /// Integrator block.
    pub integrator: IntegratorConfig,
    /// State block.
    pub state: StateConfig,
    /// Test-function block.
    pub test_function: TestFunctionConfig,
    /// Output block.
    pub output: OutputConfig,
}

/// Why a configuration was rejected.
#[derive(Debug)]
pub enum ConfigError {
    /// The text is not well-formed TOML.
    Syntax(String),
    /// The document violates the schema; every violation is listed.
    Violations(Vec<String>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Syntax(msg) => write!(f, "TOML parse error: {msg}"),
            ConfigError::Violations(list) => {
                writeln!(
                    f,
                    "configuration has {} violation{}:",
                    list.len(),
                    if list.len() == 1 { "" } else { "s" }
                )?;
                for v in list {
                    writeln!(f, "  - {v}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// Misspelling → canonical key, for suggestion messages.
const KEY_ALIASES: [(&str, &str); 18] = [
    ("epsilon_max", "R"),
    ("eps_max", "R"),
    ("r", "R"),
    ("epsilon_min", "delta"),
    ("eps_min", "delta"),
    ("nodes", "n_nodes"),
    ("n", "n_nodes"),
    ("power", "measure_power"),
    ("t_values", "T_values"),
    ("ts", "T_values"),
    ("tolerance", "rel_tol"),
    ("tol", "rel_tol"),
    ("rtol", "rel_tol"),
    ("atol", "abs_tol"),
    ("temperature", "beta"),
    ("preset", "hadamard_preset"),
    ("dir", "directory"),
    ("out", "directory"),
];

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn suggest(key: &str, known: &[&str]) -> Option<String> {
    if let Some(&(_, canon)) = KEY_ALIASES
        .iter()
        .find(|(alias, canon)| *alias == key && known.contains(canon))
    {
        return Some(canon.to_string());
    }
    known
        .iter()
        .map(|&k| (levenshtein(key, k), k))
        .filter(|&(d, _)| d <= 2)
        .min_by_key(|&(d, _)| d)
        .map(|(_, k)| k.to_string())
}

/// Accumulates schema violations with dotted key paths.
struct Checker {
    violations: Vec<String>,
}

impl Checker {
    fn new() -> Self {
        Checker { violations: Vec::new() }
    }

    fn push(&mut self, path: &str, message: impl fmt::Display) {
        self.violations.push(format!("{path}: {message}"));
    }

    fn unknown_keys(&mut self, table: &toml::Table, path: &str, known: &[&str]) {
        for key in table.keys() {
            if !known.contains(&key.as_str()) {
                let loc = dotted(path, key);
                match suggest(key, known) {
                    Some(s) => self.push(&loc, format!("unknown key; did you mean `{s}`?")),
                    None => self.push(
                        &loc,
                        format!("unknown key; valid keys here: {}", known.join(", ")),
                    ),
                }
            }
        }
    }

    fn f64(&mut self, table: &toml::Table, path: &str, key: &str, default: f64) -> f64 {
        match table.get(key) {
            None => default,
            Some(toml::Value::Float(x)) => *x,
            Some(toml::Value::Integer(n)) => *n as f64,
            Some(other) => {
                self.push(&dotted(path, key), format!("expected a number, got {}", kind_of(other)));
                default
            }
        }
    }

    fn uint(&mut self, table: &toml::Table, path: &str, key: &str, default: u64) -> u64 {
        match table.get(key) {
            None => default,
            Some(toml::Value::Integer(n)) if *n >= 0 => *n as u64,
            Some(toml::Value::Integer(n)) => {
                self.push(&dotted(path, key), format!("expected a non-negative integer, got {n}"));
                default
            }
            Some(other) => {
                self.push(&dotted(path, key), format!("expected an integer, got {}", kind_of(other)));
                default
            }
        }
    }

    fn string(&mut self, table: &toml::Table, path: &str, key: &str, default: &str) -> String {
        match table.get(key) {
            None => default.to_string(),
            Some(toml::Value::String(s)) => s.clone(),
            Some(other) => {
                self.push(&dotted(path, key), format!("expected a string, got {}", kind_of(other)));
                default.to_string()
            }
        }
    }

    fn f64_array(&mut self, table: &toml::Table, path: &str, key: &str) -> Option<Vec<f64>> {
        let raw = table.get(key)?;
        let loc = dotted(path, key);
        let toml::Value::Array(items) = raw else {
            self.push(&loc, format!("expected an array of numbers, got {}", kind_of(raw)));
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            match item {
                toml::Value::Float(x) => out.push(*x),
                toml::Value::Integer(n) => out.push(*n as f64),
                other => {
                    self.push(&loc, format!("element {i} is {}, expected a number", kind_of(other)));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn section<'a>(&mut self, root: &'a toml::Table, key: &str) -> Option<&'a toml::Table> {
        match root.get(key) {
            None => None,
            Some(toml::Value::Table(t)) => Some(t),
            Some(other) => {
                self.push(key, format!("expected a table, got {}", kind_of(other)));
                None
            }
        }
    }
}

fn dotted(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn kind_of(v: &toml::Value) -> &'static str {
    match v {
        toml::Value::String(_) => "a string",
        toml::Value::Integer(_) => "an integer",
        toml::Value::Float(_) => "a float",
        toml::Value::Boolean(_) => "a boolean",
        toml::Value::Datetime(_) => "a datetime",
        toml::Value::Array(_) => "an array",
        toml::Value::Table(_) => "a table",
    }
}

fn parse_experiment(name: &str, c: &mut Checker) -> Option<Experiment> {
    let exp = match name {
        "adiabatic-rate" => Experiment::AdiabaticRate,
        "wkb-rate" => Experiment::WkbRate,
        "vacuum-limit" => Experiment::VacuumLimit,
        "kms-limit" => Experiment::KmsLimit,
        "hadamard-limit" => Experiment::HadamardLimit,
        "energy-bounds" => Experiment::EnergyBounds,
        "intertwining-audit" => Experiment::IntertwiningAudit,
        other => {
            c.push(
                "experiment",
                format!("unknown experiment `{other}`; one of: {}", EXPERIMENT_NAMES.join(", ")),
            );
            return None;
        }
    };
    Some(exp)
}

/// Default masses (m₋, m₊) per monotonicity case.
fn default_masses(case: MonotonicityCase) -> (f64, f64) {
    match case {
        MonotonicityCase::A => (1.0, 2.0),
        MonotonicityCase::B => (0.0, 1.0),
        MonotonicityCase::C => (1.0, 0.0),
    }
}

const TOP_KEYS: [&str; 9] = [
    "schema_version",
    "experiment",
    "profile",
    "grid",
    "sweep",
    "integrator",
    "state",
    "test_function",
    "output",
];
const PROFILE_KEYS: [&str; 4] = ["case", "shape", "m_minus", "m_plus"];
const GRID_KEYS: [&str; 4] = ["delta", "R", "n_nodes", "measure_power"];
const SWEEP_KEYS: [&str; 2] = ["T_values", "threshold"];
const INTEGRATOR_KEYS: [&str; 4] = ["rel_tol", "abs_tol", "max_steps", "initial_step"];
const STATE_KEYS: [&str; 3] = ["kind", "beta", "hadamard_preset"];
const TEST_FUNCTION_KEYS: [&str; 1] = ["support"];
const OUTPUT_KEYS: [&str; 2] = ["directory", "formats"];

/// Parses and schema-checks a TOML configuration, reporting every violation.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let root: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        ConfigError::Syntax(e.to_string().trim_end().to_string())
    })?;
    let mut c = Checker::new();
    c.unknown_keys(&root, "", &TOP_KEYS);

    match root.get("schema_version") {
        Some(toml::Value::Integer(v)) if *v == SCHEMA_VERSION => {}
        Some(toml::Value::Integer(v)) => c.push(
            "schema_version",
            format!("this build reads schema version {SCHEMA_VERSION}, the file declares {v}"),
        ),
        Some(other) => c.push("schema_version", format!("expected an integer, got {}", kind_of(other))),
        None => c.push("schema_version", format!("missing; add `schema_version = {SCHEMA_VERSION}`")),
    }

    let experiment = match root.get("experiment") {
        Some(toml::Value::String(name)) => parse_experiment(name, &mut c),
        Some(other) => {
            c.push("experiment", format!("expected a string, got {}", kind_of(other)));
            None
        }
        None => {
            c.push(
                "experiment",
                format!("missing; one of: {}", EXPERIMENT_NAMES.join(", ")),
            );
            None
        }
    };

    // Profile block: `case` is the only required key anywhere.
    let profile = match c.section(&root, "profile") {
        Some(t) => {
            c.unknown_keys(t, "profile", &PROFILE_KEYS);
            let case = match t.get("case") {
                Some(toml::Value::String(s)) => match s.to_ascii_uppercase().as_str() {
                    "A" => Some(MonotonicityCase::A),
                    "B" => Some(MonotonicityCase::B),
                    "C" => Some(MonotonicityCase::C),
                    other => {
                        c.push("profile.case", format!("must be \"A\", \"B\", or \"C\", got \"{other}\""));
                        None
                    }
                },
                Some(other) => {
                    c.push("profile.case", format!("expected a string, got {}", kind_of(other)));
                    None
                }
                None => {
                    c.push("profile.case", "missing; must be \"A\", \"B\", or \"C\"");
                    None
                }
            };
            let shape = c.string(t, "profile", "shape", "smoothstep");
            if shape != "smoothstep" && shape != "constant" {
                c.push(
                    "profile.shape",
                    format!("must be \"smoothstep\" or \"constant\", got \"{shape}\""),
                );
            }
            let (dm_minus, dm_plus) = default_masses(case.unwrap_or(MonotonicityCase::A));
            let m_minus = c.f64(t, "profile", "m_minus", dm_minus);
            let m_plus = if shape == "constant" {
                let m_plus = c.f64(t, "profile", "m_plus", m_minus);
                if m_plus != m_minus {
                    c.push(
                        "profile.m_plus",
                        format!("a constant profile needs m_plus = m_minus, got {m_plus} vs {m_minus}"),
                    );
                }
                m_plus
            } else {
                c.f64(t, "profile", "m_plus", dm_plus)
            };
            for (key, m) in [("profile.m_minus", m_minus), ("profile.m_plus", m_plus)] {
                if !m.is_finite() || m < 0.0 {
                    c.push(key, format!("mass must be finite and ≥ 0, got {m}"));
                }
            }
            case.map(|case| ProfileConfig {
                case,
                shape,
                m_minus,
                m_plus,
            })
        }
        None => {
            c.push("profile", "missing table; at least `case` must be set");
            None
        }
    };

    let grid = {
        let d = GridConfig::default();
        match c.section(&root, "grid") {
            Some(t) => {
                c.unknown_keys(t, "grid", &GRID_KEYS);
                let g = GridConfig {
                    delta: c.f64(t, "grid", "delta", d.delta),
                    r: c.f64(t, "grid", "R", d.r),
                    n_nodes: c.uint(t, "grid", "n_nodes", d.n_nodes as u64) as usize,
                    measure_power: c.uint(t, "grid", "measure_power", d.measure_power as u64) as u32,
                };
                if !(g.delta.is_finite() && g.delta > 0.0) {
                    c.push("grid.delta", format!("must be finite and positive, got {}", g.delta));
                }
                if !(g.r.is_finite() && g.r > g.delta) {
                    c.push(
                        "grid.delta / grid.R",
                        format!("need delta < R, got delta = {} and R = {}", g.delta, g.r),
                    );
                }
                if g.n_nodes < 16 {
                    c.push("grid.n_nodes", format!("need at least 16 nodes, got {}", g.n_nodes));
                }
                if g.measure_power > MAX_MEASURE_POWER {
                    c.push(
                        "grid.measure_power",
                        format!("must be ≤ {MAX_MEASURE_POWER}, got {}", g.measure_power),
                    );
                }
                g
            }
            None => d,
        }
    };

    let sweep = {
        let d = SweepConfig::default();
        match c.section(&root, "sweep") {
            Some(t) => {
                c.unknown_keys(t, "sweep", &SWEEP_KEYS);
                let t_values = c.f64_array(t, "sweep", "T_values").unwrap_or(d.t_values);
                let threshold = c.f64(t, "sweep", "threshold", d.threshold);
                SweepConfig { t_values, threshold }
            }
            None => d,
        }
    };
    if sweep.t_values.len() < 4 {
        c.push(
            "sweep.T_values",
            format!("need at least 4 sweep points, got {}", sweep.t_values.len()),
        );
    }
    if sweep.t_values.windows(2).any(|w| !(w[1] > w[0])) {
        c.push("sweep.T_values", "must be strictly increasing");
    }
    if sweep.t_values.iter().any(|&t| !t.is_finite() || t < 1.0) {
        c.push("sweep.T_values", "slow-time scales must be finite and ≥ 1");
    }
    if !sweep.threshold.is_finite() || sweep.threshold <= 0.0 {
        c.push(
            "sweep.threshold",
            format!("must be finite and positive, got {}", sweep.threshold),
        );
    }

    let integrator = {
        let d = IntegratorConfig::default().with_rel_tol(1e-9);
        match c.section(&root, "integrator") {
            Some(t) => {
                c.unknown_keys(t, "integrator", &INTEGRATOR_KEYS);
                IntegratorConfig {
                    rel_tol: c.f64(t, "integrator", "rel_tol", d.rel_tol),
                    abs_tol: c.f64(t, "integrator", "abs_tol", d.abs_tol),
                    max_steps: c.uint(t, "integrator", "max_steps", d.max_steps as u64) as usize,
                    initial_step: c.f64(t, "integrator", "initial_step", d.initial_step),
                }
            }
            None => d,
        }
    };
    if let Err(e) = integrator.validate() {
        c.push("integrator", e);
    }

    let state = {
        let d = StateConfig::default();
        match c.section(&root, "state") {
            Some(t) => {
                c.unknown_keys(t, "state", &STATE_KEYS);
                let kind = t.get("kind").and_then(|v| v.as_str()).map(str::to_string);
                if let Some(toml::Value::String(_)) | None = t.get("kind") {
                } else {
                    c.push("state.kind", "expected a string");
                }
                StateConfig {
                    kind,
                    beta: c.f64(t, "state", "beta", d.beta),
                    hadamard_preset: c.string(t, "state", "hadamard_preset", &d.hadamard_preset),
                }
            }
            None => d,
        }
    };
    if !state.beta.is_finite() || state.beta <= 0.0 {
        c.push("state.beta", format!("must be finite and positive, got {}", state.beta));
    }
    if let (Some(kind), Some(exp)) = (&state.kind, experiment) {
        let implied = match exp {
            Experiment::VacuumLimit => Some("vacuum"),
            Experiment::KmsLimit => Some("kms"),
            Experiment::HadamardLimit => Some("hadamard"),
            _ => None,
        };
        if let Some(implied) = implied {
            if kind != implied {
                c.push(
                    "state.kind",
                    format!("the {} experiment uses the {implied} state, got \"{kind}\"", exp.name()),
                );
            }
        }
    }

    let test_function = {
        let d = TestFunctionConfig::default();
        match c.section(&root, "test_function") {
            Some(t) => {
                c.unknown_keys(t, "test_function", &TEST_FUNCTION_KEYS);
                match c.f64_array(t, "test_function", "support") {
                    Some(v) if v.len() == 2 => TestFunctionConfig { support: (v[0], v[1]) },
                    Some(v) => {
                        c.push(
                            "test_function.support",
                            format!("expected exactly two numbers [lo, hi], got {}", v.len()),
                        );
                        d
                    }
                    None => d,
                }
            }
            None => d,
        }
    };
    let (lo, hi) = test_function.support;
    if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
        c.push(
            "test_function.support",
            format!("need 0 < lo < hi, got [{lo}, {hi}]"),
        );
    } else if lo < grid.delta || hi > grid.r {
        c.push(
            "test_function.support / grid",
            format!(
                "support [{lo}, {hi}] must lie inside the grid range [{}, {}]",
                grid.delta, grid.r
            ),
        );
    }

    let output = {
        let d = OutputConfig::default();
        match c.section(&root, "output") {
            Some(t) => {
                c.unknown_keys(t, "output", &OUTPUT_KEYS);
                let directory = PathBuf::from(c.string(
                    t,
                    "output",
                    "directory",
                    &d.directory.display().to_string(),
                ));
                let formats = match t.get("formats") {
                    None => d.formats.clone(),
                    Some(toml::Value::Array(items)) => {
                        let mut out = Vec::new();
                        for item in items {
                            match item.as_str() {
                                Some("json") => out.push(OutputFormat::Json),
                                Some("csv") => out.push(OutputFormat::Csv),
                                Some("summary") => out.push(OutputFormat::Summary),
                                Some(other) => c.push(
                                    "output.formats",
                                    format!("unknown format \"{other}\"; one of: json, csv, summary"),
                                ),
                                None => c.push("output.formats", "entries must be strings"),
                            }
                        }
                        if out.is_empty() {
                            c.push("output.formats", "at least one format is required");
                            d.formats.clone()
                        } else {
                            out
                        }
                    }
                    Some(other) => {
                        c.push("output.formats", format!("expected an array, got {}", kind_of(other)));
                        d.formats.clone()
                    }
                };
                OutputConfig { directory, formats }
            }
            None => d,
        }
    };

    // Experiment-specific preconditions worth failing at validation time.
    if let (Some(exp), Some(p)) = (experiment, &profile) {
        let needs_case_a = matches!(
            exp,
            Experiment::AdiabaticRate | Experiment::WkbRate | Experiment::KmsLimit
        );
        if needs_case_a && p.case != MonotonicityCase::A {
            c.push(
                "profile.case",
                format!("the {} experiment needs case A (strictly positive mass), got {}", exp.name(), p.case),
            );
        }
        if exp == Experiment::HadamardLimit && state.hadamard_preset != "gaussian" {
            c.push(
                "state.hadamard_preset",
                format!("unknown preset \"{}\"; known presets: gaussian", state.hadamard_preset),
            );
        }
    }

    if !c.violations.is_empty() {
        return Err(ConfigError::Violations(c.violations));
    }
    Ok(RunConfig {
        experiment: experiment.expect("no violations recorded"),
        profile: profile.expect("no violations recorded"),
        grid,
        sweep,
        integrator,
        state,
        test_function,
        output,
    })
}

impl RunConfig {
    /// Builds the harness request this configuration describes.
    pub fn to_sweep_spec(&self) -> adialim_core::Result<SweepSpec> {
        let profile = match self.profile.shape.as_str() {
            "constant" => MassProfile::constant(self.profile.m_minus)?,
            _ => MassProfile::smoothstep(self.profile.case, self.profile.m_minus, self.profile.m_plus)?,
        };
        let grid = build_grid(self.grid.delta, self.grid.r, self.grid.n_nodes, self.grid.measure_power)?;
        let f = TestFunction::c2_bump(self.test_function.support.0, self.test_function.support.1)?;
        let spec = SweepSpec::new(self.experiment, self.sweep.t_values.clone(), profile, grid)
            .with_cfg(self.integrator)
            .with_state(StateParams {
                beta: self.state.beta,
                hadamard_preset: self.state.hadamard_preset.clone(),
            })
            .with_test_function(f)
            .with_threshold(self.sweep.threshold);
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn violations(text: &str) -> Vec<String> {
        match parse_config(text) {
            Err(ConfigError::Violations(v)) => v,
            other => panic!("expected violations, got {other:?}"),
        }
    }

    const MINIMAL: &str = "schema_version = 1\nexperiment = \"vacuum-limit\"\n[profile]\ncase = \"B\"\n";

    #[test]
    fn minimal_config_fills_documented_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.experiment, Experiment::VacuumLimit);
        assert_eq!(cfg.profile.case, MonotonicityCase::B);
        assert_eq!(cfg.profile.shape, "smoothstep");
        assert_eq!((cfg.profile.m_minus, cfg.profile.m_plus), (0.0, 1.0));
        assert_eq!(cfg.grid.n_nodes, 33);
        assert_eq!(cfg.grid.measure_power, 2);
        assert_eq!(cfg.sweep.t_values, vec![16.0, 32.0, 64.0, 128.0, 256.0]);
        assert_eq!(cfg.integrator.rel_tol, 1e-9);
        assert_eq!(cfg.test_function.support, (0.5, 4.0));
        assert_eq!(cfg.output.directory, PathBuf::from("out"));
        assert_eq!(cfg.output.formats.len(), 3);
        let spec = cfg.to_sweep_spec().unwrap();
        assert_eq!(spec.experiment, Experiment::VacuumLimit);
    }

    #[test]
    fn inverted_cutoffs_name_both_keys() {
        let text = format!("{MINIMAL}[grid]\ndelta = 4.0\nR = 0.5\n");
        let v = violations(&text);
        assert!(
            v.iter().any(|m| m.contains("grid.delta / grid.R") && m.contains("delta < R")),
            "got {v:?}"
        );
    }

    #[test]
    fn unknown_key_suggests_the_canonical_name() {
        let text = format!("{MINIMAL}[grid]\nepsilon_max = 4.0\n");
        let v = violations(&text);
        assert!(
            v.iter().any(|m| m.contains("grid.epsilon_max") && m.contains("did you mean `R`?")),
            "got {v:?}"
        );
    }

    #[test]
    fn typos_are_matched_by_edit_distance() {
        let text = format!("{MINIMAL}[integrator]\nrel_tl = 1e-9\n");
        let v = violations(&text);
        assert!(
            v.iter().any(|m| m.contains("integrator.rel_tl") && m.contains("did you mean `rel_tol`?")),
            "got {v:?}"
        );
    }

    #[test]
    fn all_violations_are_collected_at_once() {
        let text = "schema_version = 3\nexperiment = \"warp-drive\"\n[profile]\ncase = \"Q\"\nm_minus = -1.0\n[sweep]\nT_values = [8.0, 4.0]\n";
        let v = violations(text);
        assert!(v.len() >= 5, "expected at least 5 violations, got {v:#?}");
        assert!(v.iter().any(|m| m.starts_with("schema_version")));
        assert!(v.iter().any(|m| m.starts_with("experiment")));
        assert!(v.iter().any(|m| m.starts_with("profile.case")));
        assert!(v.iter().any(|m| m.starts_with("profile.m_minus")));
        assert!(v.iter().any(|m| m.starts_with("sweep.T_values")));
    }

    #[test]
    fn syntax_errors_carry_location_information() {
        let err = parse_config("schema_version = = 1").unwrap_err();
        let ConfigError::Syntax(msg) = err else {
            panic!("expected a syntax error")
        };
        assert!(msg.contains("line 1"), "got: {msg}");
    }

    #[test]
    fn every_experiment_name_parses() {
        for name in EXPERIMENT_NAMES {
            let case = if matches!(name, "adiabatic-rate" | "wkb-rate" | "kms-limit") {
                "A"
            } else {
                "B"
            };
            let text = format!(
                "schema_version = 1\nexperiment = \"{name}\"\n[profile]\ncase = \"{case}\"\n"
            );
            let cfg = parse_config(&text).unwrap();
            assert_eq!(cfg.experiment.name(), name);
        }
    }

    #[test]
    fn state_kind_must_match_the_experiment() {
        let text = format!("{MINIMAL}[state]\nkind = \"kms\"\n");
        let v = violations(&text);
        assert!(v.iter().any(|m| m.starts_with("state.kind") && m.contains("vacuum")), "got {v:?}");
    }

    #[test]
    fn rate_experiments_reject_degenerate_cases_early() {
        let text = "schema_version = 1\nexperiment = \"kms-limit\"\n[profile]\ncase = \"B\"\n";
        let v = violations(text);
        assert!(v.iter().any(|m| m.starts_with("profile.case") && m.contains("case A")), "got {v:?}");
    }

    #[test]
    fn support_must_sit_inside_the_grid() {
        let text = format!("{MINIMAL}[test_function]\nsupport = [0.1, 4.0]\n");
        let v = violations(&text);
        assert!(v.iter().any(|m| m.contains("support") && m.contains("grid range")), "got {v:?}");
    }

    #[test]
    fn constant_profiles_need_one_mass() {
        let text = "schema_version = 1\nexperiment = \"energy-bounds\"\n[profile]\ncase = \"A\"\nshape = \"constant\"\nm_minus = 1.0\nm_plus = 2.0\n";
        let v = violations(text);
        assert!(v.iter().any(|m| m.starts_with("profile.m_plus")), "got {v:?}");
        let text = "schema_version = 1\nexperiment = \"energy-bounds\"\n[profile]\ncase = \"A\"\nshape = \"constant\"\nm_minus = 1.5\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.profile.m_plus, 1.5);
        cfg.to_sweep_spec().unwrap();
    }
}
