//! Experiment harness: sweeps, rate fits, and verdicts.
//!
//! Each experiment drives the mode dynamics across a sweep of slow-time
//! scales T and reduces the observations to one scalar metric per T:
//!
//! * `AdiabaticRate` — max over modes of the weighted propagator gap
//!   ‖W_E(1)·(U_T − U_T^ad)·W_E(−1)⁻¹‖ at (t, s) = (1, −1), expected O(T⁻¹);
//! * `WkbRate` — max over modes of ‖U_T^wkb − U_T‖, also O(T⁻¹);
//! * `VacuumLimit` / `KmsLimit` / `HadamardLimit` — the smeared distance
//!   between the finite-T pull-back and the closed-form adiabatic limit,
//!   on per-T grids refined to satisfy the sampling rule n ≥ 4TR/π;
//! * `EnergyBounds` — the weighted-norm supremum ‖W_X(t)·U_T(t,s)·W_X(s)⁻¹‖
//!   over a (t, s) lattice with t ≤ s, checked against the analytic bound
//!   for the profile's monotonicity case;
//! * `IntertwiningAudit` — max of ‖P(t)·U_T^ad(t,s) − U_T^ad(t,s)·P(s)‖,
//!   which the adiabatic flow must keep at integrator noise for all (t, s).
//!
//! Rates are fitted by ordinary least squares on (log T, log metric) with
//! the smallest T discarded as pre-asymptotic; metrics inside the noise
//! floor (a fixed multiple of the integrator tolerance) yield no slope and
//! a `pass-degenerate` verdict instead. Reports echo the full configuration
//! and carry no timestamps, so a rerun at thread count 1 reproduces them
//! byte for byte: per-mode work is parallelized, but every reduction is a
//! max or a fixed-order pairwise sum, independent of scheduling.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Error;
use crate::mode::{spectral_projector, weight_matrix, Mode, WeightSpace};
use crate::profile::{MassProfile, MonotonicityCase};
use crate::propagators::{evolve_adiabatic, evolve_exact, wkb_propagator, IntegratorConfig};
use crate::quad::{integrate, pairwise_sum};
use crate::smearing::{build_grid, required_nodes, weak_limit_error, ModeGrid, TestFunction};
use crate::states::{
    adiabatic_limit_closed_form, hadamard_covariance, hadamard_remainder, kms_covariance,
    kms_defect, smoothing_report, vacuum_covariance, HadamardData, ReferenceTime,
};
use crate::Result;

/// Accepted fitted-slope window for the adiabatic-rate experiment.
pub const ADIABATIC_SLOPE_WINDOW: (f64, f64) = (-1.15, -0.85);

/// Accepted fitted-slope window for the WKB-rate experiment.
pub const WKB_SLOPE_WINDOW: (f64, f64) = (-1.2, -0.8);

/// Additive slack allowed on the weighted-norm bounds.
pub const ENERGY_BOUND_SLACK: f64 = 1e-6;

/// Intertwining residual allowance as a multiple of the relative tolerance.
pub const INTERTWINING_TOL_FACTOR: f64 = 100.0;

/// Metrics within this multiple of the integrator tolerance (scaled by the
/// measure mass for smeared metrics) are treated as noise.
pub const NOISE_FLOOR_FACTOR: f64 = 10.0;

/// The audit lattice: experiments quantified over (t, s) sample this set.
pub const TIME_LATTICE: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

/// Quadrature degree for phase and bound integrals over the window.
const WINDOW_QUAD_DEGREE: usize = 64;

/// Highest weight power N recorded by smoothing diagnostics (N = 0..=8).
const SMOOTHING_ORDER: usize = 8;

/// The experiment selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// Weighted gap between exact and adiabatic propagators vs T.
    AdiabaticRate,
    /// Gap between WKB and exact propagators vs T.
    WkbRate,
    /// Weak-limit error for a vacuum input.
    VacuumLimit,
    /// Weak-limit error for a thermal input, plus the KMS defect.
    KmsLimit,
    /// Weak-limit error for a Hadamard-class input, plus smoothing suprema.
    HadamardLimit,
    /// Weighted-norm suprema against the case bounds.
    EnergyBounds,
    /// Projector transport by the adiabatic flow.
    IntertwiningAudit,
}

impl Experiment {
    /// The kebab-case name used in configs and reports.
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::AdiabaticRate => "adiabatic-rate",
            Experiment::WkbRate => "wkb-rate",
            Experiment::VacuumLimit => "vacuum-limit",
            Experiment::KmsLimit => "kms-limit",
            Experiment::HadamardLimit => "hadamard-limit",
            Experiment::EnergyBounds => "energy-bounds",
            Experiment::IntertwiningAudit => "intertwining-audit",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// State-kind parameters for the limit experiments.
#[derive(Debug, Clone, Serialize)]
pub struct StateParams {
    /// Inverse temperature for thermal inputs.
    pub beta: f64,
    /// Named Hadamard data preset; `"gaussian"` is built in.
    pub hadamard_preset: String,
}

impl Default for StateParams {
    fn default() -> Self {
        StateParams {
            beta: 1.0,
            hadamard_preset: "gaussian".to_string(),
        }
    }
}

/// Resolves a named Hadamard data preset.
pub fn hadamard_data_preset(name: &str) -> Result<HadamardData> {
    match name {
        "gaussian" => Ok(HadamardData::gaussian()),
        other => Err(Error::invalid(
            "hadamard_preset",
            format!("unknown preset `{other}`; known presets: gaussian"),
        )),
    }
}

/// A full experiment request.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    /// Which experiment to run.
    pub experiment: Experiment,
    /// Slow-time scales, strictly increasing, at least four, each ≥ 1.
    pub t_values: Vec<f64>,
    /// The mass profile under test.
    pub profile: MassProfile,
    /// Base spectral grid; weak-limit sweeps refine it per T as required.
    pub grid: ModeGrid,
    /// Integrator tolerances and budgets.
    pub cfg: IntegratorConfig,
    /// State parameters for limit experiments.
    pub state: StateParams,
    /// Smearing vector for weak-limit metrics.
    pub test_function: TestFunction,
    /// Pass threshold on the final metric of a limit experiment.
    pub threshold: f64,
}

impl SweepSpec {
    /// Builds a spec with default integrator, state, test function, and a
    /// 1e−2 limit threshold.
    pub fn new(
        experiment: Experiment,
        t_values: Vec<f64>,
        profile: MassProfile,
        grid: ModeGrid,
    ) -> Self {
        SweepSpec {
            experiment,
            t_values,
            profile,
            grid,
            cfg: IntegratorConfig::default(),
            state: StateParams::default(),
            test_function: TestFunction::default_bump(),
            threshold: 1e-2,
        }
    }

    /// Returns the spec with the integrator configuration replaced.
    pub fn with_cfg(mut self, cfg: IntegratorConfig) -> Self {
        self.cfg = cfg;
        self
    }

    /// Returns the spec with the state parameters replaced.
    pub fn with_state(mut self, state: StateParams) -> Self {
        self.state = state;
        self
    }

    /// Returns the spec with the test function replaced.
    pub fn with_test_function(mut self, f: TestFunction) -> Self {
        self.test_function = f;
        self
    }

    /// Returns the spec with the limit threshold replaced.
    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    /// Validates all invariants shared by the runners.
    pub fn validate(&self) -> Result<()> {
        if self.t_values.len() < 4 {
            return Err(Error::invalid(
                "t_values",
                format!("need at least 4 sweep points, got {}", self.t_values.len()),
            ));
        }
        for pair in self.t_values.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(Error::invalid(
                    "t_values",
                    format!("must be strictly increasing, got {} after {}", pair[1], pair[0]),
                ));
            }
        }
        for &t in &self.t_values {
            if !t.is_finite() || t < 1.0 {
                return Err(Error::invalid(
                    "t_values",
                    format!("slow-time scales must be finite and ≥ 1, got {t}"),
                ));
            }
        }
        if !self.threshold.is_finite() || self.threshold <= 0.0 {
            return Err(Error::invalid(
                "threshold",
                format!("must be finite and positive, got {}", self.threshold),
            ));
        }
        if !self.state.beta.is_finite() || self.state.beta <= 0.0 {
            return Err(Error::invalid(
                "beta",
                format!("must be finite and positive, got {}", self.state.beta),
            ));
        }
        if self.experiment == Experiment::HadamardLimit {
            hadamard_data_preset(&self.state.hadamard_preset)?;
        }
        self.cfg.validate()?;
        self.profile.validate()
    }

    /// The configuration echo embedded in every report.
    pub fn metadata(&self) -> Metadata {
        Metadata {
            experiment: self.experiment,
            t_values: self.t_values.clone(),
            profile: ProfileEcho {
                case: self.profile.case(),
                shape: self.profile.shape().to_string(),
                m_minus: self.profile.m_minus(),
                m_plus: self.profile.m_plus(),
            },
            grid: GridEcho {
                delta: self.grid.delta(),
                r: self.grid.r(),
                n_nodes: self.grid.n_nodes(),
                measure_power: self.grid.measure_power(),
            },
            integrator: self.cfg,
            state: self.state.clone(),
            test_function: TestFunctionEcho {
                support: self.test_function.support(),
                smoothness_class: self.test_function.smoothness_class(),
            },
            threshold: self.threshold,
        }
    }
}

/// Profile parameters echoed into reports.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileEcho {
    /// Monotonicity case.
    pub case: MonotonicityCase,
    /// Shape label, e.g. `"smoothstep"` or `"constant"`.
    pub shape: String,
    /// Initial mass.
    pub m_minus: f64,
    /// Final mass.
    pub m_plus: f64,
}

/// Grid parameters echoed into reports.
#[derive(Debug, Clone, Serialize)]
pub struct GridEcho {
    /// Infrared cutoff δ.
    pub delta: f64,
    /// Ultraviolet cutoff R.
    pub r: f64,
    /// Base node count (weak-limit sweeps may refine per T).
    pub n_nodes: usize,
    /// Spectral density exponent.
    pub measure_power: u32,
}

/// Test-function parameters echoed into reports.
#[derive(Debug, Clone, Serialize)]
pub struct TestFunctionEcho {
    /// Support interval [δ′, R′].
    pub support: (f64, f64),
    /// Number of continuous derivatives.
    pub smoothness_class: u32,
}

/// The reproducible configuration echo carried by every report.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    /// Experiment name.
    pub experiment: Experiment,
    /// Requested slow-time scales.
    pub t_values: Vec<f64>,
    /// Profile echo.
    pub profile: ProfileEcho,
    /// Base-grid echo.
    pub grid: GridEcho,
    /// Integrator settings.
    pub integrator: IntegratorConfig,
    /// State parameters.
    pub state: StateParams,
    /// Test-function echo.
    pub test_function: TestFunctionEcho,
    /// Limit-experiment threshold.
    pub threshold: f64,
}

/// One sweep observation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    /// Slow-time scale T.
    pub t_scale: f64,
    /// The experiment's scalar metric at this T.
    pub metric: f64,
    /// Spectral nodes actually used at this T.
    pub n_nodes: usize,
    /// Relative tolerance in force.
    pub rel_tol: f64,
}

/// Experiment outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// All declared tolerance rules hold.
    Pass,
    /// Nothing to measure: the metric sits at the integrator noise floor.
    PassDegenerate,
    /// A declared tolerance rule is violated.
    Fail,
}

/// Result of a rate fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum FitOutcome {
    /// Least-squares slope on (log T, log metric), smallest T discarded.
    Fitted {
        /// Fitted exponent.
        slope: f64,
        /// Standard error of the slope.
        stderr: f64,
    },
    /// A metric sits at the noise floor; no rate can be claimed.
    BelowNoiseFloor {
        /// Smallest metric in the sweep.
        min_metric: f64,
        /// The floor it undercuts.
        floor: f64,
    },
}

/// Fits log metric = slope·log T + c by ordinary least squares, discarding
/// the smallest T as pre-asymptotic.
///
/// Returns [`FitOutcome::BelowNoiseFloor`] when any metric is ≤ `noise_floor`
/// (fitting noise would manufacture a rate). With exactly two points after
/// the discard the slope is an interpolation and `stderr` is 0.
pub fn fit_rate(rows: &[SweepRow], noise_floor: f64) -> Result<FitOutcome> {
    if rows.len() < 3 {
        return Err(Error::invalid(
            "rows",
            format!("need at least 3 sweep rows to fit a rate, got {}", rows.len()),
        ));
    }
    if !noise_floor.is_finite() || noise_floor <= 0.0 {
        return Err(Error::invalid(
            "noise_floor",
            format!("must be finite and positive, got {noise_floor}"),
        ));
    }
    let min_metric = rows.iter().map(|r| r.metric).fold(f64::INFINITY, f64::min);
    if min_metric <= noise_floor {
        return Ok(FitOutcome::BelowNoiseFloor {
            min_metric,
            floor: noise_floor,
        });
    }
    let xs: Vec<f64> = rows[1..].iter().map(|r| r.t_scale.ln()).collect();
    let ys: Vec<f64> = rows[1..].iter().map(|r| r.metric.ln()).collect();
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let dof = xs.len().saturating_sub(2);
    let stderr = if dof == 0 {
        0.0
    } else {
        (ss_res / dof as f64 / sxx).sqrt()
    };
    Ok(FitOutcome::Fitted { slope, stderr })
}

/// Experiment-specific diagnostics attached to a report.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Details {
    /// Propagator-gap rate experiments.
    Rate {
        /// Worst ‖U†qU − q‖ over every integration of the sweep.
        max_pseudo_unitarity_residual: f64,
    },
    /// Weak-limit experiment with vacuum input.
    Limit {
        /// Metric at the largest T.
        final_error: f64,
        /// Whether the metric decreased at every measurable step (both rows
        /// above the noise floor) and never re-emerged from the floor.
        monotone: bool,
    },
    /// Weak-limit experiment with thermal input.
    KmsLimit {
        /// Metric at the largest T.
        final_error: f64,
        /// Whether the metric decreased at every measurable step (both rows
        /// above the noise floor) and never re-emerged from the floor.
        monotone: bool,
        /// Spread of the effective inverse temperature of the limit.
        kms_defect: f64,
    },
    /// Weak-limit experiment with Hadamard-class input.
    HadamardLimit {
        /// Metric at the largest T.
        final_error: f64,
        /// Whether the metric decreased at every measurable step (both rows
        /// above the noise floor) and never re-emerged from the floor.
        monotone: bool,
        /// sup ⟨ε⟩^N ‖r(ε)‖ over the base grid for N = 0, …, 8.
        smoothing: Vec<f64>,
    },
    /// Weighted-norm audit.
    EnergyBounds {
        /// Analytic bound for the profile's case (1 for B and C).
        bound: f64,
        /// Largest weighted norm over T, lattice, and modes.
        supremum: f64,
    },
    /// Projector-transport audit.
    Intertwining {
        /// Largest ‖P(t)U^ad − U^adP(s)‖ over T, lattice, and modes.
        max_residual: f64,
        /// Worst ‖U†qU − q‖ over every integration of the sweep.
        max_pseudo_unitarity_residual: f64,
    },
}

/// A finished experiment: configuration echo, observations, fit, verdict.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    /// Full configuration echo.
    pub metadata: Metadata,
    /// One observation per sweep point.
    pub rows: Vec<SweepRow>,
    /// Fitted log-log slope, when the experiment fits one.
    pub fitted_slope: Option<f64>,
    /// Standard error of the slope.
    pub slope_ci: Option<f64>,
    /// Whether the metrics sat at the noise floor (no slope claimed).
    pub below_noise_floor: bool,
    /// Outcome under the declared tolerance rules.
    pub verdict: Verdict,
    /// Experiment-specific diagnostics.
    pub details: Details,
}

impl ExperimentReport {
    /// Serializes the full report as pretty-printed JSON.
    pub fn to_json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::ReportSerialization {
            reason: e.to_string(),
        })
    }

    /// Renders the rows as CSV with header `T,error,n_nodes,rel_tol`.
    pub fn rows_to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io_err = |e: csv::Error| Error::ReportSerialization { reason: e.to_string() };
        w.write_record(["T", "error", "n_nodes", "rel_tol"]).map_err(io_err)?;
        for row in &self.rows {
            w.serialize((row.t_scale, row.metric, row.n_nodes, row.rel_tol))
                .map_err(io_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::ReportSerialization {
            reason: e.to_string(),
        })?;
        String::from_utf8(bytes).map_err(|e| Error::ReportSerialization {
            reason: e.to_string(),
        })
    }
}

fn ensure_experiment(spec: &SweepSpec, expected: Experiment) -> Result<()> {
    if spec.experiment != expected {
        return Err(Error::invalid(
            "experiment",
            format!("this runner handles {expected}, the sweep requests {}", spec.experiment),
        ));
    }
    Ok(())
}

fn require_case_a(spec: &SweepSpec) -> Result<()> {
    if spec.profile.case() != MonotonicityCase::A {
        return Err(Error::invalid(
            "profile",
            format!(
                "the {} experiment needs a strictly positive mass (case A), got case {}",
                spec.experiment,
                spec.profile.case()
            ),
        ));
    }
    Ok(())
}

/// The (t, s) lattice pairs; `ordered_only` keeps t ≤ s.
fn lattice_pairs(ordered_only: bool) -> Vec<(f64, f64)> {
    let mut pairs = Vec::new();
    for &t in TIME_LATTICE.iter() {
        for &s in TIME_LATTICE.iter() {
            if !ordered_only || t <= s {
                pairs.push((t, s));
            }
        }
    }
    pairs
}

fn fold_max(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0f64, f64::max)
}

/// Shared body of the two propagator-gap rate experiments.
fn run_gap_rate(
    spec: &SweepSpec,
    window: (f64, f64),
    gap: impl Fn(&Mode, f64) -> Result<(f64, f64)> + Sync,
) -> Result<ExperimentReport> {
    let mut rows = Vec::with_capacity(spec.t_values.len());
    let mut max_residual = 0.0f64;
    for &t_scale in &spec.t_values {
        let per_mode: Vec<(f64, f64)> = spec
            .grid
            .nodes()
            .par_iter()
            .map(|&eps| gap(&Mode::new(eps)?, t_scale))
            .collect::<Result<Vec<_>>>()?;
        let metric = fold_max(per_mode.iter().map(|&(g, _)| g));
        max_residual = max_residual.max(fold_max(per_mode.iter().map(|&(_, r)| r)));
        rows.push(SweepRow {
            t_scale,
            metric,
            n_nodes: spec.grid.n_nodes(),
            rel_tol: spec.cfg.rel_tol,
        });
    }
    let fit = fit_rate(&rows, NOISE_FLOOR_FACTOR * spec.cfg.rel_tol)?;
    let (fitted_slope, slope_ci, below_noise_floor, verdict) = match fit {
        FitOutcome::Fitted { slope, stderr } => {
            let ok = slope >= window.0 && slope <= window.1;
            (
                Some(slope),
                Some(stderr),
                false,
                if ok { Verdict::Pass } else { Verdict::Fail },
            )
        }
        FitOutcome::BelowNoiseFloor { .. } => (None, None, true, Verdict::PassDegenerate),
    };
    Ok(ExperimentReport {
        metadata: spec.metadata(),
        rows,
        fitted_slope,
        slope_ci,
        below_noise_floor,
        verdict,
        details: Details::Rate {
            max_pseudo_unitarity_residual: max_residual,
        },
    })
}

/// Sweeps the weighted exact-vs-adiabatic propagator gap and fits its decay.
pub fn run_adiabatic_rate(spec: &SweepSpec) -> Result<ExperimentReport> {
    ensure_experiment(spec, Experiment::AdiabaticRate)?;
    spec.validate()?;
    require_case_a(spec)?;
    let p = &spec.profile;
    let cfg = &spec.cfg;
    run_gap_rate(spec, ADIABATIC_SLOPE_WINDOW, |mode, t_scale| {
        let exact = evolve_exact(mode, p, t_scale, 1.0, -1.0, cfg)?;
        let adiab = evolve_adiabatic(mode, p, t_scale, 1.0, -1.0, cfg)?;
        let w_out = weight_matrix(WeightSpace::EnergyE, mode, 1.0, p)?;
        let w_in_inv = weight_matrix(WeightSpace::EnergyE, mode, -1.0, p)?.inverse()?;
        let gap = (w_out * (exact.u - adiab.u) * w_in_inv).op_norm();
        let residual = exact
            .pseudo_unitarity_residual
            .max(adiab.pseudo_unitarity_residual);
        Ok((gap, residual))
    })
}

/// Sweeps the WKB-vs-exact propagator gap and fits its decay.
pub fn run_wkb_rate(spec: &SweepSpec) -> Result<ExperimentReport> {
    ensure_experiment(spec, Experiment::WkbRate)?;
    spec.validate()?;
    require_case_a(spec)?;
    let p = &spec.profile;
    let cfg = &spec.cfg;
    run_gap_rate(spec, WKB_SLOPE_WINDOW, |mode, t_scale| {
        let exact = evolve_exact(mode, p, t_scale, 1.0, -1.0, cfg)?;
        let wkb = wkb_propagator(mode, p, t_scale, 1.0, -1.0, WINDOW_QUAD_DEGREE)?;
        Ok(((wkb - exact.u).op_norm(), exact.pseudo_unitarity_residual))
    })
}

/// Sweeps the weak-limit error of a covariance pull-back against its
/// closed-form limit; covers the vacuum, KMS, and Hadamard experiments.
pub fn run_limit_experiment(spec: &SweepSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let family = match spec.experiment {
        Experiment::VacuumLimit => vacuum_covariance(&spec.profile, ReferenceTime::MinusOne),
        Experiment::KmsLimit => {
            require_case_a(spec)?;
            kms_covariance(&spec.profile, spec.state.beta, ReferenceTime::MinusOne)?
        }
        Experiment::HadamardLimit => hadamard_covariance(
            &spec.profile,
            hadamard_data_preset(&spec.state.hadamard_preset)?,
            ReferenceTime::MinusOne,
        ),
        other => {
            return Err(Error::invalid(
                "experiment",
                format!("this runner handles the limit experiments, the sweep requests {other}"),
            ))
        }
    };
    let mut rows = Vec::with_capacity(spec.t_values.len());
    for &t_scale in &spec.t_values {
        let n = spec.grid.n_nodes().max(required_nodes(t_scale, spec.grid.r()));
        let grid = build_grid(spec.grid.delta(), spec.grid.r(), n, spec.grid.measure_power())?;
        let metric = weak_limit_error(
            &family,
            &spec.profile,
            t_scale,
            &spec.test_function,
            &grid,
            &spec.cfg,
        )?;
        rows.push(SweepRow {
            t_scale,
            metric,
            n_nodes: n,
            rel_tol: spec.cfg.rel_tol,
        });
    }
    let final_error = rows.last().expect("validated non-empty").metric;
    // The pairing scales with the measure mass, so the noise floor does too.
    let mass = pairwise_sum(spec.grid.weights());
    let floor = NOISE_FLOOR_FACTOR * spec.cfg.rel_tol * mass.max(1.0);
    // Convergence can only be judged while the metric is measurable: the
    // signal often decays under the integration noise mid-sweep, so the
    // decrease is required step by step until the sequence first enters the
    // noise floor, and climbing back out of the floor is a violation.
    let above: Vec<bool> = rows.iter().map(|r| r.metric > floor).collect();
    let mut monotone = true;
    for i in 1..rows.len() {
        let decreased = rows[i].metric < rows[i - 1].metric;
        if (above[i] && above[i - 1] && !decreased) || (above[i] && !above[i - 1]) {
            monotone = false;
        }
    }
    let fit = fit_rate(&rows, floor)?;
    let (fitted_slope, slope_ci, below_noise_floor) = match fit {
        FitOutcome::Fitted { slope, stderr } => (Some(slope), Some(stderr), false),
        FitOutcome::BelowNoiseFloor { .. } => (None, None, true),
    };
    let mut verdict = if above.iter().all(|&a| !a) {
        Verdict::PassDegenerate
    } else if monotone && final_error < spec.threshold {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let details = match spec.experiment {
        Experiment::VacuumLimit => Details::Limit {
            final_error,
            monotone,
        },
        Experiment::KmsLimit => {
            let limit = adiabatic_limit_closed_form(&family, &spec.profile)?;
            let defect = kms_defect(&limit, &spec.profile, spec.state.beta, spec.grid.nodes())?;
            // A genuinely varying mass must leave a thermal memory.
            if spec.profile.m_minus() != spec.profile.m_plus() && defect <= 1e-10 {
                verdict = Verdict::Fail;
            }
            Details::KmsLimit {
                final_error,
                monotone,
                kms_defect: defect,
            }
        }
        Experiment::HadamardLimit => {
            let limit = adiabatic_limit_closed_form(&family, &spec.profile)?;
            let remainder = hadamard_remainder(&limit, &spec.profile)?;
            Details::HadamardLimit {
                final_error,
                monotone,
                smoothing: smoothing_report(&remainder, SMOOTHING_ORDER, spec.grid.nodes())?,
            }
        }
        _ => unreachable!("matched above"),
    };
    Ok(ExperimentReport {
        metadata: spec.metadata(),
        rows,
        fitted_slope,
        slope_ci,
        below_noise_floor,
        verdict,
        details,
    })
}

/// The analytic weighted-norm bound for a profile on a grid with infrared
/// cutoff δ: exp(½∫ sup_ε |a′/a| dt) for case A (the supremum sits at ε = δ),
/// and exactly 1 for cases B and C.
pub fn energy_bound(p: &MassProfile, delta: f64) -> Result<f64> {
    match p.case() {
        MonotonicityCase::A => {
            let g = integrate(WINDOW_QUAD_DEGREE, -1.0, 1.0, |t| {
                p.m_sq_d1(t).abs() / (delta * delta + p.m_sq(t))
            })?;
            Ok((0.5 * g).exp())
        }
        MonotonicityCase::B | MonotonicityCase::C => Ok(1.0),
    }
}

/// Audits the weighted-norm suprema ‖W_X(t)·U_T(t,s)·W_X(s)⁻¹‖ over the
/// lattice (t ≤ s) against the case bound.
pub fn run_energy_bounds(spec: &SweepSpec) -> Result<ExperimentReport> {
    ensure_experiment(spec, Experiment::EnergyBounds)?;
    spec.validate()?;
    let space = match spec.profile.case() {
        MonotonicityCase::A => WeightSpace::EnergyE,
        MonotonicityCase::B => WeightSpace::B,
        MonotonicityCase::C => WeightSpace::C,
    };
    let bound = energy_bound(&spec.profile, spec.grid.delta())?;
    let pairs = lattice_pairs(true);
    let mut items: Vec<(f64, f64, f64)> = Vec::new();
    for &eps in spec.grid.nodes() {
        for &(t, s) in &pairs {
            items.push((eps, t, s));
        }
    }
    let mut rows = Vec::with_capacity(spec.t_values.len());
    let mut supremum = 0.0f64;
    for &t_scale in &spec.t_values {
        let norms: Vec<f64> = items
            .par_iter()
            .map(|&(eps, t, s)| -> Result<f64> {
                let mode = Mode::new(eps)?;
                let run = evolve_exact(&mode, &spec.profile, t_scale, t, s, &spec.cfg)?;
                let w_t = weight_matrix(space, &mode, t, &spec.profile)?;
                let w_s_inv = weight_matrix(space, &mode, s, &spec.profile)?.inverse()?;
                Ok((w_t * run.u * w_s_inv).op_norm())
            })
            .collect::<Result<Vec<_>>>()?;
        let metric = fold_max(norms);
        supremum = supremum.max(metric);
        rows.push(SweepRow {
            t_scale,
            metric,
            n_nodes: spec.grid.n_nodes(),
            rel_tol: spec.cfg.rel_tol,
        });
    }
    let verdict = if supremum <= bound + ENERGY_BOUND_SLACK {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ExperimentReport {
        metadata: spec.metadata(),
        rows,
        fitted_slope: None,
        slope_ci: None,
        below_noise_floor: false,
        verdict,
        details: Details::EnergyBounds { bound, supremum },
    })
}

/// Audits projector transport ‖P(t)·U^ad(t,s) − U^ad(t,s)·P(s)‖ over the
/// full lattice; the adiabatic flow must keep it at integrator noise.
pub fn run_intertwining_audit(spec: &SweepSpec) -> Result<ExperimentReport> {
    ensure_experiment(spec, Experiment::IntertwiningAudit)?;
    spec.validate()?;
    let pairs = lattice_pairs(false);
    let mut items: Vec<(f64, f64, f64)> = Vec::new();
    for &eps in spec.grid.nodes() {
        for &(t, s) in &pairs {
            items.push((eps, t, s));
        }
    }
    let mut rows = Vec::with_capacity(spec.t_values.len());
    let mut max_residual = 0.0f64;
    let mut max_pu = 0.0f64;
    for &t_scale in &spec.t_values {
        let measured: Vec<(f64, f64)> = items
            .par_iter()
            .map(|&(eps, t, s)| -> Result<(f64, f64)> {
                let mode = Mode::new(eps)?;
                let run = evolve_adiabatic(&mode, &spec.profile, t_scale, t, s, &spec.cfg)?;
                let p_t = spectral_projector(&mode, t, &spec.profile)?;
                let p_s = spectral_projector(&mode, s, &spec.profile)?;
                let resid = (p_t * run.u - run.u * p_s).op_norm();
                Ok((resid, run.pseudo_unitarity_residual))
            })
            .collect::<Result<Vec<_>>>()?;
        let metric = fold_max(measured.iter().map(|&(r, _)| r));
        max_residual = max_residual.max(metric);
        max_pu = max_pu.max(fold_max(measured.iter().map(|&(_, r)| r)));
        rows.push(SweepRow {
            t_scale,
            metric,
            n_nodes: spec.grid.n_nodes(),
            rel_tol: spec.cfg.rel_tol,
        });
    }
    let verdict = if max_residual <= INTERTWINING_TOL_FACTOR * spec.cfg.rel_tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ExperimentReport {
        metadata: spec.metadata(),
        rows,
        fitted_slope: None,
        slope_ci: None,
        below_noise_floor: false,
        verdict,
        details: Details::Intertwining {
            max_residual,
            max_pseudo_unitarity_residual: max_pu,
        },
    })
}

/// Dispatches a spec to its runner.
pub fn run_sweep(spec: &SweepSpec) -> Result<ExperimentReport> {
    match spec.experiment {
        Experiment::AdiabaticRate => run_adiabatic_rate(spec),
        Experiment::WkbRate => run_wkb_rate(spec),
        Experiment::VacuumLimit | Experiment::KmsLimit | Experiment::HadamardLimit => {
            run_limit_experiment(spec)
        }
        Experiment::EnergyBounds => run_energy_bounds(spec),
        Experiment::IntertwiningAudit => run_intertwining_audit(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rows_from(ts: &[f64], metric: impl Fn(f64) -> f64) -> Vec<SweepRow> {
        ts.iter()
            .map(|&t| SweepRow {
                t_scale: t,
                metric: metric(t),
                n_nodes: 16,
                rel_tol: 1e-11,
            })
            .collect()
    }

    fn small_grid() -> ModeGrid {
        build_grid(0.5, 4.0, 16, 2).unwrap()
    }

    fn case_a_spec(experiment: Experiment) -> SweepSpec {
        SweepSpec::new(
            experiment,
            vec![8.0, 16.0, 32.0, 64.0],
            MassProfile::smoothstep(MonotonicityCase::A, 1.0, 2.0).unwrap(),
            small_grid(),
        )
        .with_cfg(IntegratorConfig::default().with_rel_tol(1e-9))
    }

    #[test]
    fn fit_rate_recovers_exact_power_laws() {
        let ts = [8.0, 16.0, 32.0, 64.0, 128.0];
        let FitOutcome::Fitted { slope, stderr } =
            fit_rate(&rows_from(&ts, |t| 7.0 / t), 1e-10).unwrap()
        else {
            panic!("expected a fit")
        };
        assert_relative_eq!(slope, -1.0, epsilon = 1e-12);
        assert!(stderr < 1e-12);
        let FitOutcome::Fitted { slope, .. } =
            fit_rate(&rows_from(&ts, |t| 3.0 / (t * t)), 1e-10).unwrap()
        else {
            panic!("expected a fit")
        };
        assert_relative_eq!(slope, -2.0, epsilon = 1e-12);
    }

    #[test]
    fn fit_rate_tolerates_small_noise() {
        let ts = [8.0, 16.0, 32.0, 64.0, 128.0];
        let wiggle = [1.01, 0.99, 1.008, 0.994, 1.004];
        let rows: Vec<SweepRow> = ts
            .iter()
            .zip(wiggle)
            .map(|(&t, w)| SweepRow {
                t_scale: t,
                metric: w / t,
                n_nodes: 16,
                rel_tol: 1e-11,
            })
            .collect();
        let FitOutcome::Fitted { slope, stderr } = fit_rate(&rows, 1e-10).unwrap() else {
            panic!("expected a fit")
        };
        assert!((slope + 1.0).abs() < 0.05, "slope {slope} too far from −1");
        assert!(stderr > 0.0);
    }

    #[test]
    fn fit_rate_reports_the_noise_floor() {
        let ts = [8.0, 16.0, 32.0, 64.0];
        let out = fit_rate(&rows_from(&ts, |_| 5e-11), 1e-10).unwrap();
        assert!(matches!(out, FitOutcome::BelowNoiseFloor { .. }));
    }

    #[test]
    fn fit_rate_needs_enough_rows() {
        let ts = [8.0, 16.0];
        assert!(fit_rate(&rows_from(&ts, |t| 1.0 / t), 1e-10).is_err());
        assert!(fit_rate(&rows_from(&[8.0, 16.0, 32.0], |t| 1.0 / t), 0.0).is_err());
    }

    #[test]
    fn sweep_spec_validation_catches_bad_requests() {
        let mut spec = case_a_spec(Experiment::AdiabaticRate);
        spec.t_values = vec![8.0, 4.0, 16.0, 32.0];
        assert!(spec.validate().is_err());
        let mut spec = case_a_spec(Experiment::AdiabaticRate);
        spec.t_values.truncate(3);
        assert!(spec.validate().is_err());
        let mut spec = case_a_spec(Experiment::AdiabaticRate);
        spec.t_values[0] = 0.5;
        assert!(spec.validate().is_err());
        let spec = case_a_spec(Experiment::AdiabaticRate).with_threshold(0.0);
        assert!(spec.validate().is_err());
        let mut spec = case_a_spec(Experiment::KmsLimit);
        spec.state.beta = -1.0;
        assert!(spec.validate().is_err());
        let mut spec = case_a_spec(Experiment::HadamardLimit);
        spec.state.hadamard_preset = "nonsense".to_string();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn runners_reject_mismatched_specs() {
        let spec = case_a_spec(Experiment::VacuumLimit);
        assert!(run_adiabatic_rate(&spec).is_err());
        assert!(run_wkb_rate(&spec).is_err());
        assert!(run_energy_bounds(&spec).is_err());
        assert!(run_intertwining_audit(&spec).is_err());
        let spec = case_a_spec(Experiment::AdiabaticRate);
        assert!(run_limit_experiment(&spec).is_err());
    }

    #[test]
    fn rate_experiments_require_strictly_positive_mass() {
        let profile = MassProfile::smoothstep(MonotonicityCase::B, 0.0, 1.0).unwrap();
        let mut spec = case_a_spec(Experiment::AdiabaticRate);
        spec.profile = profile.clone();
        assert!(run_adiabatic_rate(&spec).is_err());
        let mut spec = case_a_spec(Experiment::WkbRate);
        spec.profile = profile;
        assert!(run_wkb_rate(&spec).is_err());
    }

    #[test]
    fn adiabatic_rate_on_constant_mass_is_degenerate() {
        let mut spec = case_a_spec(Experiment::AdiabaticRate);
        spec.profile = MassProfile::constant(1.0).unwrap();
        spec.t_values = vec![1.0, 2.0, 4.0, 8.0];
        let report = run_adiabatic_rate(&spec).unwrap();
        assert_eq!(report.verdict, Verdict::PassDegenerate);
        assert!(report.below_noise_floor);
        assert!(report.fitted_slope.is_none());
        let Details::Rate {
            max_pseudo_unitarity_residual,
        } = report.details
        else {
            panic!("wrong details")
        };
        assert!(max_pseudo_unitarity_residual < 1e-7);

        // Reports serialize to JSON and CSV with the documented columns.
        let json = report.to_json_string().unwrap();
        assert!(json.contains("\"verdict\""));
        assert!(json.contains("\"adiabatic-rate\""));
        let csv_text = report.rows_to_csv().unwrap();
        let mut lines = csv_text.lines();
        assert_eq!(lines.next(), Some("T,error,n_nodes,rel_tol"));
        assert_eq!(lines.count(), 4);
    }

    #[test]
    fn adiabatic_rate_sees_first_order_decay() {
        let spec = case_a_spec(Experiment::AdiabaticRate);
        let report = run_adiabatic_rate(&spec).unwrap();
        for pair in report.rows.windows(2) {
            assert!(pair[1].metric < pair[0].metric, "gap must shrink with T");
        }
        let slope = report.fitted_slope.expect("metrics are far above noise");
        assert!(
            (-1.4..=-0.6).contains(&slope),
            "slope {slope} inconsistent with first-order decay"
        );
        let Details::Rate {
            max_pseudo_unitarity_residual,
        } = report.details
        else {
            panic!("wrong details")
        };
        assert!(max_pseudo_unitarity_residual < 1e-7);
    }

    #[test]
    fn wkb_rate_sees_first_order_decay() {
        let spec = case_a_spec(Experiment::WkbRate);
        let report = run_wkb_rate(&spec).unwrap();
        for pair in report.rows.windows(2) {
            assert!(pair[1].metric < pair[0].metric, "gap must shrink with T");
        }
        let slope = report.fitted_slope.expect("metrics are far above noise");
        assert!(
            (-1.4..=-0.6).contains(&slope),
            "slope {slope} inconsistent with first-order decay"
        );
    }

    #[test]
    fn vacuum_limit_converges_in_case_b() {
        let mut spec = case_a_spec(Experiment::VacuumLimit).with_threshold(1.0);
        spec.profile = MassProfile::smoothstep(MonotonicityCase::B, 0.0, 1.0).unwrap();
        spec.t_values = vec![4.0, 8.0, 16.0, 32.0];
        let report = run_limit_experiment(&spec).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        let Details::Limit {
            final_error,
            monotone,
        } = report.details
        else {
            panic!("wrong details")
        };
        assert!(monotone);
        assert!(final_error < 1.0);
        // Per-T grids obey the sampling rule.
        for row in &report.rows {
            assert!(row.n_nodes >= required_nodes(row.t_scale, 4.0).min(16));
        }
        assert!(report.rows[3].n_nodes > report.rows[0].n_nodes);
    }

    #[test]
    fn kms_limit_records_a_thermal_memory() {
        let mut spec = case_a_spec(Experiment::KmsLimit).with_threshold(1.0);
        spec.t_values = vec![4.0, 8.0, 16.0, 32.0];
        let report = run_limit_experiment(&spec).unwrap();
        let Details::KmsLimit {
            kms_defect,
            monotone,
            ..
        } = report.details
        else {
            panic!("wrong details")
        };
        assert!(kms_defect > 0.1, "defect {kms_defect} should be O(1)");
        assert!(monotone);
        assert_eq!(report.verdict, Verdict::Pass);
    }

    #[test]
    fn kms_limit_requires_case_a() {
        let mut spec = case_a_spec(Experiment::KmsLimit);
        spec.profile = MassProfile::smoothstep(MonotonicityCase::B, 0.0, 1.0).unwrap();
        assert!(run_limit_experiment(&spec).is_err());
    }

    #[test]
    fn kms_limit_on_constant_mass_has_no_memory() {
        let mut spec = case_a_spec(Experiment::KmsLimit);
        spec.profile = MassProfile::constant(1.0).unwrap();
        spec.t_values = vec![1.0, 2.0, 4.0, 8.0];
        let report = run_limit_experiment(&spec).unwrap();
        assert_eq!(report.verdict, Verdict::PassDegenerate);
        let Details::KmsLimit { kms_defect, .. } = report.details else {
            panic!("wrong details")
        };
        assert!(kms_defect <= 1e-10, "defect {kms_defect:e} should vanish");
    }

    #[test]
    fn hadamard_limit_reports_smoothing() {
        let mut spec = case_a_spec(Experiment::HadamardLimit).with_threshold(1.0);
        spec.t_values = vec![4.0, 8.0, 16.0, 32.0];
        let report = run_limit_experiment(&spec).unwrap();
        let Details::HadamardLimit {
            smoothing,
            monotone,
            ..
        } = &report.details
        else {
            panic!("wrong details")
        };
        assert_eq!(smoothing.len(), SMOOTHING_ORDER + 1);
        for pair in smoothing.windows(2) {
            assert!(pair[0] <= pair[1]);
        }
        assert!(*monotone);
        assert_eq!(report.verdict, Verdict::Pass);
    }

    #[test]
    fn energy_bound_closed_forms() {
        // Case A, m: 1 → 2, δ = ½: ∫|a′|/a dt = ln((δ²+4)/(δ²+1)) = ln 3.4.
        let p = MassProfile::smoothstep(MonotonicityCase::A, 1.0, 2.0).unwrap();
        let bound = energy_bound(&p, 0.5).unwrap();
        assert_relative_eq!(bound, 3.4f64.sqrt(), epsilon = 1e-10);
        let p = MassProfile::smoothstep(MonotonicityCase::B, 0.0, 1.0).unwrap();
        assert_eq!(energy_bound(&p, 0.5).unwrap(), 1.0);
        let p = MassProfile::constant(2.0).unwrap();
        assert_relative_eq!(energy_bound(&p, 0.5).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn energy_bounds_hold_in_every_case() {
        let profiles = [
            MassProfile::smoothstep(MonotonicityCase::A, 1.0, 2.0).unwrap(),
            MassProfile::smoothstep(MonotonicityCase::B, 0.0, 1.0).unwrap(),
            MassProfile::smoothstep(MonotonicityCase::C, 1.0, 0.0).unwrap(),
        ];
        for profile in profiles {
            let case = profile.case();
            let mut spec = case_a_spec(Experiment::EnergyBounds);
            spec.profile = profile;
            spec.t_values = vec![1.0, 2.0, 4.0, 8.0];
            let report = run_energy_bounds(&spec).unwrap();
            let Details::EnergyBounds { bound, supremum } = report.details else {
                panic!("wrong details")
            };
            assert_eq!(report.verdict, Verdict::Pass, "case {case}: {supremum} vs {bound}");
            assert!(supremum <= bound + ENERGY_BOUND_SLACK);
            assert!(supremum > 0.9, "weighted norms include ‖I‖ = 1 at t = s");
        }
    }

    #[test]
    fn intertwining_audit_stays_at_integrator_noise() {
        let mut spec = case_a_spec(Experiment::IntertwiningAudit);
        spec.t_values = vec![2.0, 4.0, 8.0, 16.0];
        let report = run_intertwining_audit(&spec).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        let Details::Intertwining {
            max_residual,
            max_pseudo_unitarity_residual,
        } = report.details
        else {
            panic!("wrong details")
        };
        assert!(max_residual <= INTERTWINING_TOL_FACTOR * 1e-9);
        assert!(max_pseudo_unitarity_residual <= 1e-7);
        assert!(report.fitted_slope.is_none());
    }

    #[test]
    fn run_sweep_dispatches_by_experiment() {
        let mut spec = case_a_spec(Experiment::EnergyBounds);
        spec.profile = MassProfile::constant(1.0).unwrap();
        spec.t_values = vec![1.0, 2.0, 4.0, 8.0];
        let report = run_sweep(&spec).unwrap();
        assert!(matches!(report.details, Details::EnergyBounds { .. }));
        assert_eq!(report.metadata.experiment, Experiment::EnergyBounds);
        assert_eq!(report.metadata.profile.shape, "constant");
    }
}
