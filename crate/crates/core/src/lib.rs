//! Mode-wise adiabatic dynamics for oscillators with slowly varying mass.
//!
//! This crate studies the family of linear oscillators
//!
//! ```text
//!     ∂²φ/∂t² + (ε² + m²(t)) φ = 0,        t ∈ [−1, 1],
//! ```
//!
//! one mode per spectral parameter ε > 0, with the time dependence slowed down
//! by a scale T ≥ 1 (mass frozen outside [−1, 1]). Each mode is rewritten as a
//! first-order complex 2×2 system whose flow preserves a Hermitian charge form,
//! and three flows are provided side by side:
//!
//! * the **exact flow** of the rescaled system,
//! * the **adiabatic flow**, transported by spectral projectors of the frozen
//!   generator, and
//! * the **WKB approximation**, an explicit oscillatory symbol.
//!
//! On top of the flows sit quasi-free reference states (vacuum, thermal,
//! Hadamard-class) given by Hermitian covariance forms, the closed-form
//! covariance obtained in the slow-drive limit T → ∞, and spectrally smeared
//! comparisons between pulled-back and limiting covariances. A small harness
//! fits convergence rates in T and checks T-uniform energy bounds, and the
//! `adialim` binary in the companion CLI crate drives it from TOML configs.
//!
//! # Layout
//!
//! * [`mat2`] — complex 2×2 matrices, Hermitian forms, closed-form exponential.
//! * [`quad`] — Gauss–Legendre rules and composite spectral grids.
//! * [`profile`] — mass profiles m²(t) with monotonicity classes.
//! * [`mode`] — per-mode frozen-time objects: dispersion, generator, charge
//!   forms, spectral projectors, diagonalizing frames, weight matrices.
//! * [`propagators`] — exact/adiabatic evolution (embedded RK5(4)), frozen
//!   propagator, Magnus cross-check, WKB symbol and propagator.
//! * [`states`] — covariance families, the hat transform, the closed-form
//!   adiabatic limit, thermal defect, Hadamard remainder.
//! * [`smearing`] — test functions, smeared pairings, pull-backs, weak-limit
//!   errors.
//! * [`harness`] — experiment runners, rate fits, reports.
//!
//! Everything is deterministic: fixed quadrature rules, fixed reduction orders,
//! and no hidden global state, so byte-identical inputs give byte-identical
//! reports at any thread count.

pub mod error;
pub mod harness;
pub mod mat2;
pub mod mode;
pub mod profile;
pub mod propagators;
pub mod quad;
pub mod smearing;
pub mod states;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
