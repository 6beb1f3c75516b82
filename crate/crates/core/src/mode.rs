//! Frozen-time objects of a single oscillator mode.
//!
//! A mode with spectral parameter ε > 0 under a mass profile m²(t) has the
//! first-order form
//!
//! ```text
//!     ∂_t f = i T · H(t) f,      H(t) = [[0, 1], [a(t), 0]],      a(t) = ε² + m²(t),
//! ```
//!
//! for f = (φ, (iT)⁻¹∂_tφ). This module provides everything about H(t) at a
//! frozen time t:
//!
//! * the dispersion ε_t = √a(t) with its first two time derivatives,
//! * the conserved charge form q = `[[0,1],[1,0]]` and its diagonal counterpart
//!   q̂ = diag(1, −1): generators satisfy (iTH)†q + q(iTH) = 0, so all flows
//!   built from them are q-pseudo-unitary,
//! * the spectral projector P(t) onto the ε_t-eigenspace of H(t), with
//!   H P = P H = ε_t P, and its time derivative,
//! * the diagonalizing frame 𝒯(t) with 𝒯†q𝒯 = q̂ and 𝒯⁻¹H𝒯 = diag(ε_t, −ε_t),
//! * diagonal weight matrices defining the energy norm and the auxiliary
//!   weighted norms in which the evolution admits T-uniform bounds.
//!
//! All closed forms:
//!
//! ```text
//!     ε_t′ = m²′/(2ε_t),                ε_t″ = m²″/(2ε_t) − (m²′)²/(4ε_t³),
//!     P(t) = ½ [[1, ε_t⁻¹], [ε_t, 1]],  P′(t) = ½ [[0, −ε_t′/ε_t²], [ε_t′, 0]],
//!     𝒯(t) = (2ε_t)^{−1/2} [[1, −1], [ε_t, ε_t]],
//!     𝒯(t)⁻¹ = 2^{−1/2} [[ε_t^{1/2}, ε_t^{−1/2}], [−ε_t^{1/2}, ε_t^{−1/2}]].
//! ```

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Error;
use crate::mat2::{HermForm2, Mat2};
use crate::profile::MassProfile;
use crate::Result;

/// Lower end of the driving window.
pub const T_MIN: f64 = -1.0;
/// Upper end of the driving window.
pub const T_MAX: f64 = 1.0;

/// A single oscillator mode, identified by its spectral parameter ε > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    eps: f64,
}

impl Mode {
    /// Creates a mode; ε must be finite and strictly positive.
    pub fn new(eps: f64) -> Result<Self> {
        if !eps.is_finite() || eps <= 0.0 {
            return Err(Error::invalid(
                "eps",
                format!("spectral parameter must be finite and positive, got {eps}"),
            ));
        }
        Ok(Mode { eps })
    }

    /// The spectral parameter ε.
    #[inline]
    pub fn eps(&self) -> f64 {
        self.eps
    }
}

/// Validates t ∈ [−1, 1].
fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || !(T_MIN..=T_MAX).contains(&t) {
        return Err(Error::TimeOutOfRange {
            t,
            min: T_MIN,
            max: T_MAX,
        });
    }
    Ok(())
}

/// The squared dispersion a(t) = ε² + m²(t); fails if it degenerates.
pub fn squared_dispersion(mode: &Mode, t: f64, p: &MassProfile) -> Result<f64> {
    check_time(t)?;
    let a = mode.eps * mode.eps + p.m_sq(t);
    if !a.is_finite() || a <= 1e-300 {
        return Err(Error::DegenerateDispersion { t, value: a });
    }
    Ok(a)
}

/// The dispersion ε_t = √(ε² + m²(t)).
pub fn dispersion(mode: &Mode, t: f64, p: &MassProfile) -> Result<f64> {
    Ok(squared_dispersion(mode, t, p)?.sqrt())
}

/// d ε_t / dt = m²′(t) / (2 ε_t).
pub fn dispersion_d1(mode: &Mode, t: f64, p: &MassProfile) -> Result<f64> {
    let eps_t = dispersion(mode, t, p)?;
    Ok(p.m_sq_d1(t) / (2.0 * eps_t))
}

/// d² ε_t / dt² = m²″/(2ε_t) − (m²′)²/(4ε_t³).
pub fn dispersion_d2(mode: &Mode, t: f64, p: &MassProfile) -> Result<f64> {
    let eps_t = dispersion(mode, t, p)?;
    let d1 = p.m_sq_d1(t);
    Ok(p.m_sq_d2(t) / (2.0 * eps_t) - d1 * d1 / (4.0 * eps_t * eps_t * eps_t))
}

/// The frozen generator H(t) = [[0, 1], [a(t), 0]]; satisfies H² = ε_t²·1.
pub fn generator(mode: &Mode, t: f64, p: &MassProfile) -> Result<Mat2> {
    let a = squared_dispersion(mode, t, p)?;
    Ok(Mat2::from_real(0.0, 1.0, a, 0.0))
}

/// The conserved charge form q = [[0, 1], [1, 0]].
pub fn charge_form() -> HermForm2 {
    HermForm2::new(0.0, Complex64::ONE, 0.0)
}

/// The diagonal charge form q̂ = diag(1, −1) reached by the frame transform.
pub fn diag_charge_form() -> HermForm2 {
    HermForm2::diag(1.0, -1.0)
}

/// The spectral projector P(t) = ½[[1, ε_t⁻¹], [ε_t, 1]] onto the +ε_t
/// eigenspace of H(t); idempotent with H P = P H = ε_t P.
pub fn spectral_projector(mode: &Mode, t: f64, p: &MassProfile) -> Result<Mat2> {
    let eps_t = dispersion(mode, t, p)?;
    Ok(Mat2::from_real(0.5, 0.5 / eps_t, 0.5 * eps_t, 0.5))
}

/// d P / dt = ½ [[0, −ε_t′/ε_t²], [ε_t′, 0]].
pub fn projector_derivative(mode: &Mode, t: f64, p: &MassProfile) -> Result<Mat2> {
    let eps_t = dispersion(mode, t, p)?;
    let d1 = dispersion_d1(mode, t, p)?;
    Ok(Mat2::from_real(0.0, -0.5 * d1 / (eps_t * eps_t), 0.5 * d1, 0.0))
}

/// The diagonalizing frame (𝒯(t), 𝒯(t)⁻¹).
///
/// 𝒯 maps the diagonal picture into the physical one: 𝒯†q𝒯 = q̂ and
/// 𝒯⁻¹H𝒯 = diag(ε_t, −ε_t). The inverse is returned in closed form so the
/// pair is exact to rounding.
pub fn frame(mode: &Mode, t: f64, p: &MassProfile) -> Result<(Mat2, Mat2)> {
    let eps_t = dispersion(mode, t, p)?;
    let s = (2.0 * eps_t).sqrt().recip();
    let forward = Mat2::from_real(s, -s, s * eps_t, s * eps_t);
    let (rt, rti) = (eps_t.sqrt(), eps_t.sqrt().recip());
    let inv_s = 0.5f64.sqrt();
    let inverse = Mat2::from_real(inv_s * rt, inv_s * rti, -inv_s * rt, inv_s * rti);
    Ok((forward, inverse))
}

/// Weighted norms in which evolution estimates are phrased.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WeightSpace {
    /// Energy weight diag(ε_t, 1): the natural norm for class-A profiles.
    EnergyE,
    /// diag(⟨ε⟩^{1/2}, ⟨ε⟩^{−1/2}), with ⟨ε⟩ = √(1 + ε²); time-independent.
    A,
    /// diag(ε^{−1/2} ε_t, ε^{−1/2}): the contractive norm for class-B profiles.
    B,
    /// diag(⟨ε⟩^{1/2}, ⟨ε⟩^{1/2} ε_t⁻¹): the contractive norm for class-C profiles.
    C,
}

/// The diagonal weight matrix W(space, t) defining ‖f‖ = |W f|.
pub fn weight_matrix(space: WeightSpace, mode: &Mode, t: f64, p: &MassProfile) -> Result<Mat2> {
    let eps_t = dispersion(mode, t, p)?;
    let bracket = (1.0 + mode.eps * mode.eps).sqrt();
    let w = match space {
        WeightSpace::EnergyE => Mat2::from_real(eps_t, 0.0, 0.0, 1.0),
        WeightSpace::A => Mat2::from_real(bracket.sqrt(), 0.0, 0.0, bracket.sqrt().recip()),
        WeightSpace::B => {
            let s = mode.eps.sqrt().recip();
            Mat2::from_real(s * eps_t, 0.0, 0.0, s)
        }
        WeightSpace::C => Mat2::from_real(bracket.sqrt(), 0.0, 0.0, bracket.sqrt() / eps_t),
    };
    Ok(w)
}
