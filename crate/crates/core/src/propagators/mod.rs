//! Propagators of the mode dynamics: exact, adiabatic, frozen, Magnus, WKB.
//!
//! For a mode ε under a mass profile m², the flows integrated here are
//!
//! ```text
//!     exact:      ∂_t U(t, s) = iT·H(t) U(t, s),                 U(s, s) = 1,
//!     adiabatic:  ∂_t U^ad(t, s) = (iT·H(t) − [P(t), P′(t)]) U^ad(t, s),
//! ```
//!
//! with H the frozen generator and P its spectral projector. Both generators
//! lie in the Lie algebra of the charge form q (A†q + qA = 0 — the commutator
//! term is a real multiple of diag(1, −1)), so both flows are q-pseudo-unitary
//! exactly; the reported residual ‖U†qU − q‖ measures integration error only.
//! The adiabatic flow additionally intertwines the projectors,
//! P(t)U^ad(t, s) = U^ad(t, s)P(s), which is what makes it the reference
//! dynamics for adiabatic-limit statements: the exact flow approaches it at
//! rate O(1/T) in the weighted norms of [`crate::mode::weight_matrix`].
//!
//! Adaptive integration uses an embedded Dormand–Prince RK5(4) scheme
//! (module `dopri5`); [`magnus_propagator`] provides an independent
//! fixed-step fourth-order Magnus integrator — exactly pseudo-unitary by
//! construction, since it exponentiates Lie-algebra elements — used as a
//! cross-check, and [`wkb_propagator`] the explicit oscillatory approximation.

mod dopri5;
mod wkb;

pub use wkb::{wkb_phase, wkb_propagator, wkb_symbol};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Error;
use crate::mat2::{c64, Mat2};
use crate::mode::{charge_form, dispersion, generator, squared_dispersion, Mode, T_MAX, T_MIN};
use crate::profile::MassProfile;
use crate::Result;

pub(crate) use wkb::check_t_scale;

/// Tolerances and budgets for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorConfig {
    /// Relative tolerance; must lie in (0, 1e−3].
    pub rel_tol: f64,
    /// Absolute tolerance floor; must be non-negative.
    pub abs_tol: f64,
    /// Budget for accepted + rejected steps per integration; at least 1000.
    pub max_steps: usize,
    /// Initial step size; 0 selects one automatically from the generator norm.
    pub initial_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-11,
            abs_tol: 1e-13,
            max_steps: 2_000_000,
            initial_step: 0.0,
        }
    }
}

impl IntegratorConfig {
    /// Returns the config after setting the relative tolerance.
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    /// Returns the config after setting the absolute tolerance.
    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    /// Returns the config after setting the step budget.
    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    /// Returns the config after setting the initial step.
    pub fn with_initial_step(mut self, initial_step: f64) -> Self {
        self.initial_step = initial_step;
        self
    }

    /// Validates all invariants.
    pub fn validate(&self) -> Result<()> {
        if !self.rel_tol.is_finite() || self.rel_tol <= 0.0 || self.rel_tol > 1e-3 {
            return Err(Error::invalid(
                "rel_tol",
                format!("relative tolerance must lie in (0, 1e-3], got {}", self.rel_tol),
            ));
        }
        if !self.abs_tol.is_finite() || self.abs_tol < 0.0 {
            return Err(Error::invalid(
                "abs_tol",
                format!("absolute tolerance must be finite and ≥ 0, got {}", self.abs_tol),
            ));
        }
        if self.max_steps < 1000 {
            return Err(Error::invalid(
                "max_steps",
                format!("step budget must be at least 1000, got {}", self.max_steps),
            ));
        }
        if !self.initial_step.is_finite() || self.initial_step < 0.0 {
            return Err(Error::invalid(
                "initial_step",
                format!("initial step must be finite and ≥ 0, got {}", self.initial_step),
            ));
        }
        Ok(())
    }
}

/// A computed propagator with its quality diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropagatorResult {
    /// The propagator U(t, s).
    pub u: Mat2,
    /// ‖U†qU − q‖ in operator norm — integration error only, since the flow
    /// preserves q exactly.
    pub pseudo_unitarity_residual: f64,
    /// Accepted steps (≥ 1).
    pub steps_taken: usize,
    /// Rejected trial steps.
    pub rejected_steps: usize,
    /// The relative tolerance this run was asked to honor.
    pub tolerance_used: f64,
}

/// ‖U†qU − q‖ against the conserved charge form.
pub fn pseudo_unitarity_residual(u: &Mat2) -> f64 {
    let q = charge_form().to_mat();
    (u.adjoint() * q * *u - q).op_norm()
}

fn check_window(tau: f64) -> Result<()> {
    if !tau.is_finite() || !(T_MIN..=T_MAX).contains(&tau) {
        return Err(Error::TimeOutOfRange {
            t: tau,
            min: T_MIN,
            max: T_MAX,
        });
    }
    Ok(())
}

fn evolve_with<F>(rhs: F, t: f64, s: f64, cfg: &IntegratorConfig) -> Result<PropagatorResult>
where
    F: Fn(f64) -> Result<Mat2>,
{
    cfg.validate()?;
    if t == s {
        return Ok(PropagatorResult {
            u: Mat2::identity(),
            pseudo_unitarity_residual: 0.0,
            steps_taken: 1,
            rejected_steps: 0,
            tolerance_used: cfg.rel_tol,
        });
    }
    let run = dopri5::integrate(
        rhs,
        Mat2::identity(),
        s,
        t,
        cfg.rel_tol,
        cfg.abs_tol,
        cfg.max_steps,
        cfg.initial_step,
    )?;
    if !run.state.is_finite() {
        return Err(Error::NonFinite {
            context: format!("propagator U({t}, {s})"),
        });
    }
    Ok(PropagatorResult {
        u: run.state,
        pseudo_unitarity_residual: pseudo_unitarity_residual(&run.state),
        steps_taken: run.accepted.max(1),
        rejected_steps: run.rejected,
        tolerance_used: cfg.rel_tol,
    })
}

/// The exact propagator U_T(t, s) of ∂_t U = iT·H(t)U.
pub fn evolve_exact(
    mode: &Mode,
    p: &MassProfile,
    t_scale: f64,
    t: f64,
    s: f64,
    cfg: &IntegratorConfig,
) -> Result<PropagatorResult> {
    check_t_scale(t_scale)?;
    check_window(t)?;
    check_window(s)?;
    // Validate the dispersion once at the endpoints; the profile invariants
    // then keep a(τ) positive in between, so the stage-level right-hand side
    // can use the closed form without re-checking.
    squared_dispersion(mode, t, p)?;
    squared_dispersion(mode, s, p)?;
    let eps_sq = mode.eps() * mode.eps();
    let it = c64(0.0, t_scale);
    evolve_with(
        |tau| {
            Ok(Mat2::new(
                Complex64::ZERO,
                it,
                it * (eps_sq + p.m_sq(tau)),
                Complex64::ZERO,
            ))
        },
        t,
        s,
        cfg,
    )
}

/// The adiabatic propagator U^ad_T(t, s) of ∂_t U = (iT·H − [P, P′])U.
///
/// Its hallmark is exact projector intertwining: P(t)U^ad(t, s) = U^ad(t, s)P(s).
pub fn evolve_adiabatic(
    mode: &Mode,
    p: &MassProfile,
    t_scale: f64,
    t: f64,
    s: f64,
    cfg: &IntegratorConfig,
) -> Result<PropagatorResult> {
    check_t_scale(t_scale)?;
    check_window(t)?;
    check_window(s)?;
    squared_dispersion(mode, t, p)?;
    squared_dispersion(mode, s, p)?;
    let eps_sq = mode.eps() * mode.eps();
    let it = c64(0.0, t_scale);
    // [P, P′] = (ε_τ′ / 2ε_τ)·diag(1, −1) = (m²′(τ)/4a(τ))·diag(1, −1).
    evolve_with(
        |tau| {
            let a = eps_sq + p.m_sq(tau);
            let kappa = 0.25 * p.m_sq_d1(tau) / a;
            Ok(Mat2::new(c64(-kappa, 0.0), it, it * a, c64(kappa, 0.0)))
        },
        t,
        s,
        cfg,
    )
}

/// The frozen propagator exp(iTΔ·H(t₀)) in closed form:
/// cos(ε T Δ)·1 + i sin(ε T Δ)/ε · H(t₀) with ε = ε_{t₀}.
///
/// Δ is unrestricted — the generator stays frozen at t₀.
pub fn frozen_propagator(
    mode: &Mode,
    p: &MassProfile,
    t_scale: f64,
    t0: f64,
    delta: f64,
) -> Result<Mat2> {
    check_t_scale(t_scale)?;
    if !delta.is_finite() {
        return Err(Error::invalid("delta", format!("time offset must be finite, got {delta}")));
    }
    let eps_t = dispersion(mode, t0, p)?;
    let h = generator(mode, t0, p)?;
    let theta = t_scale * delta * eps_t;
    Ok(theta.cos() * Mat2::identity() + c64(0.0, theta.sin() / eps_t) * h)
}

/// Fixed-step fourth-order Magnus integrator for the exact flow.
///
/// Per step of width h (two-point Gauss nodes t₁, t₂):
///
/// ```text
///     Ω = (h/2)(A₁ + A₂) + (√3 h²/12)[A₂, A₁],      Aᵢ = iT·H(tᵢ),
/// ```
///
/// and U ← exp(Ω)·U. Each Ω lies in the q Lie algebra, so the result is
/// exactly pseudo-unitary regardless of step size — an independent
/// cross-check for [`evolve_exact`] with completely different error behavior.
pub fn magnus_propagator(
    mode: &Mode,
    p: &MassProfile,
    t_scale: f64,
    t: f64,
    s: f64,
    n_steps: usize,
) -> Result<Mat2> {
    check_t_scale(t_scale)?;
    check_window(t)?;
    check_window(s)?;
    if n_steps == 0 {
        return Err(Error::invalid("n_steps", "Magnus integrator needs at least one step"));
    }
    if t == s {
        return Ok(Mat2::identity());
    }
    let h = (t - s) / n_steps as f64;
    let rotate = c64(0.0, t_scale);
    let gauss_offset = 3.0f64.sqrt() / 6.0;
    let mut u = Mat2::identity();
    for k in 0..n_steps {
        let tau = s + k as f64 * h;
        let t1 = tau + (0.5 - gauss_offset) * h;
        let t2 = tau + (0.5 + gauss_offset) * h;
        let a1 = rotate * generator(mode, t1, p)?;
        let a2 = rotate * generator(mode, t2, p)?;
        let omega = (0.5 * h) * (a1 + a2) + (3.0f64.sqrt() * h * h / 12.0) * a2.commutator(&a1);
        u = omega.exp() * u;
    }
    Ok(u)
}
