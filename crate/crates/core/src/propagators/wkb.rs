//! WKB symbol, phase, and propagator.
//!
//! The oscillatory part of the exact flow is captured by the WKB ansatz with
//! the first-order symbol
//!
//! ```text
//!     b_T(t) = ε_t + (i/2) T⁻¹ ∂_t ln ε_t,
//! ```
//!
//! which solves the Riccati equation of the mode up to an O(T⁻²) residual:
//!
//! ```text
//!     i T⁻¹ ∂_t b_T − b_T² + a(t) = T⁻² ( ¼ (∂_t ln ε_t)² − ½ ∂_t² ln ε_t )
//!                                 = T⁻² ( ¾ (ε_t′/ε_t)² − ½ ε_t″/ε_t ).
//! ```
//!
//! With b⁺ = b_T and b⁻ = −b̄_T (so b⁺ − b⁻ = 2ε_t), the matrix
//!
//! ```text
//!     𝒯_T(t) = (2ε_t)^{−1/2} [[1, −1], [b⁺, −b⁻]],
//!     𝒯_T(t)⁻¹ = (2ε_t)^{−1/2} [[−b⁻, 1], [−b⁺, 1]]
//! ```
//!
//! has unit determinant and satisfies 𝒯_T†q𝒯_T = q̂ exactly, and the WKB
//! propagator
//!
//! ```text
//!     U_T^{wkb}(t, s) = 𝒯_T(t) · diag(e^{iTφ}, e^{−iTφ}) · 𝒯_T(s)⁻¹,
//!     φ = ∫_s^t ε_σ dσ,
//! ```
//!
//! is therefore exactly q-pseudo-unitary while approximating the exact flow
//! to O(T⁻¹). For constant mass it degenerates to the frozen propagator.

use num_complex::Complex64;

use crate::error::Error;
use crate::mat2::{c64, Mat2};
use crate::mode::{dispersion, dispersion_d1, Mode, T_MAX, T_MIN};
use crate::profile::MassProfile;
use crate::quad;
use crate::Result;

/// Validates the slow-time scale T ≥ 1.
pub(crate) fn check_t_scale(t_scale: f64) -> Result<()> {
    if !t_scale.is_finite() || t_scale < 1.0 {
        return Err(Error::invalid(
            "t_scale",
            format!("slow-time scale must be finite and ≥ 1, got {t_scale}"),
        ));
    }
    Ok(())
}

/// The WKB symbol b_T(t) = ε_t + (i/2) T⁻¹ (ε_t′/ε_t).
pub fn wkb_symbol(mode: &Mode, p: &MassProfile, t_scale: f64, t: f64) -> Result<Complex64> {
    check_t_scale(t_scale)?;
    let eps_t = dispersion(mode, t, p)?;
    let d1 = dispersion_d1(mode, t, p)?;
    Ok(c64(eps_t, 0.5 * d1 / (eps_t * t_scale)))
}

/// The accumulated phase φ(t, s) = ∫_s^t ε_σ dσ by an n-point Gauss–Legendre
/// rule (n ≥ 8); orientation-aware, so t < s yields the negative phase.
pub fn wkb_phase(mode: &Mode, p: &MassProfile, t: f64, s: f64, n_quad: usize) -> Result<f64> {
    if n_quad < 8 {
        return Err(Error::invalid(
            "n_quad",
            format!("phase quadrature needs at least 8 nodes, got {n_quad}"),
        ));
    }
    for tau in [t, s] {
        if !tau.is_finite() || !(T_MIN..=T_MAX).contains(&tau) {
            return Err(Error::TimeOutOfRange {
                t: tau,
                min: T_MIN,
                max: T_MAX,
            });
        }
    }
    let eps_sq = mode.eps() * mode.eps();
    quad::integrate(n_quad, s, t, |sigma| (eps_sq + p.m_sq(sigma)).sqrt())
}

/// The WKB frame 𝒯_T(t) and its closed-form inverse.
fn wkb_frame(mode: &Mode, p: &MassProfile, t_scale: f64, t: f64) -> Result<(Mat2, Mat2)> {
    let eps_t = dispersion(mode, t, p)?;
    let b_plus = wkb_symbol(mode, p, t_scale, t)?;
    let b_minus = -b_plus.conj();
    let s = (2.0 * eps_t).sqrt().recip();
    let one = Complex64::ONE;
    let forward = Mat2::new(s * one, -s * one, s * b_plus, -s * b_minus);
    let inverse = Mat2::new(-s * b_minus, s * one, -s * b_plus, s * one);
    Ok((forward, inverse))
}

/// The WKB propagator U_T^{wkb}(t, s); `n_quad` controls the phase quadrature.
pub fn wkb_propagator(
    mode: &Mode,
    p: &MassProfile,
    t_scale: f64,
    t: f64,
    s: f64,
    n_quad: usize,
) -> Result<Mat2> {
    check_t_scale(t_scale)?;
    let phase = t_scale * wkb_phase(mode, p, t, s, n_quad)?;
    let (frame_t, _) = wkb_frame(mode, p, t_scale, t)?;
    let (_, frame_s_inv) = wkb_frame(mode, p, t_scale, s)?;
    let rotation = Mat2::diag(c64(0.0, phase).exp(), c64(0.0, -phase).exp());
    Ok(frame_t * rotation * frame_s_inv)
}
