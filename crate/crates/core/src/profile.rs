//! Time-dependent squared-mass profiles m²(t).
//!
//! A [`MassProfile`] is the sole time-dependent ingredient of the mode
//! dynamics: the squared dispersion of a mode with spectral parameter ε is
//! a(t) = ε² + m²(t). Profiles are defined on the driving window [−1, 1] and
//! continued by constants outside it, carry their first two derivatives
//! explicitly, and declare one of three monotonicity classes:
//!
//! * **A** — m² strictly positive on the whole window;
//! * **B** — m² vanishes at t = −1, is non-decreasing, positive at t = +1;
//! * **C** — m² positive at t = −1, non-increasing, vanishing at t = +1.
//!
//! Class A keeps the dispersion uniformly massive; classes B and C switch a
//! mass on/off and are the regimes where limits of vacua stay vacua. The
//! class determines which weighted norm the T-uniform energy bounds hold in
//! (see [`crate::mode::weight_matrix`] and the harness energy-bound runner).
//!
//! Every constructor validates its invariants on a 1001-point uniform grid —
//! sign, monotonicity, endpoint values m²(∓1) = m∓², and finite-difference
//! consistency of the supplied derivatives — so downstream code can assume a
//! well-formed profile.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::Error;
use crate::Result;

/// Monotonicity class of a mass profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MonotonicityCase {
    /// m² strictly positive on [−1, 1].
    A,
    /// m² vanishing at t = −1, non-decreasing, positive at t = +1.
    B,
    /// m² positive at t = −1, non-increasing, vanishing at t = +1.
    C,
}

impl fmt::Display for MonotonicityCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonotonicityCase::A => write!(f, "A"),
            MonotonicityCase::B => write!(f, "B"),
            MonotonicityCase::C => write!(f, "C"),
        }
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A squared-mass profile with explicit first and second derivatives.
#[derive(Clone)]
pub struct MassProfile {
    case: MonotonicityCase,
    shape: String,
    m_minus: f64,
    m_plus: f64,
    m_sq: ScalarFn,
    m_sq_d1: ScalarFn,
    m_sq_d2: ScalarFn,
}

impl fmt::Debug for MassProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MassProfile")
            .field("case", &self.case)
            .field("shape", &self.shape)
            .field("m_minus", &self.m_minus)
            .field("m_plus", &self.m_plus)
            .finish()
    }
}

/// The quintic smoothstep s(u) = 6u⁵ − 15u⁴ + 10u³ on [0, 1], clamped outside.
///
/// s interpolates 0 → 1 with s′ = s″ = 0 at both ends, so profiles built on it
/// are C² across the window boundary under constant continuation.
fn smoothstep5(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    ((6.0 * u - 15.0) * u + 10.0) * u * u * u
}

/// s′(u) = 30 u² (u − 1)², clamped to 0 outside [0, 1].
fn smoothstep5_d1(u: f64) -> f64 {
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    30.0 * u * u * (u - 1.0) * (u - 1.0)
}

/// s″(u) = 60 u (2u − 1)(u − 1), clamped to 0 outside [0, 1].
fn smoothstep5_d2(u: f64) -> f64 {
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    60.0 * u * (2.0 * u - 1.0) * (u - 1.0)
}

impl MassProfile {
    /// A profile interpolating m²(−1) = m₋² to m²(+1) = m₊² along the quintic
    /// smoothstep, constant outside [−1, 1].
    ///
    /// The case must match the endpoints: A needs both masses positive, B
    /// needs m₋ = 0 < m₊, C needs m₋ > 0 = m₊.
    pub fn smoothstep(case: MonotonicityCase, m_minus: f64, m_plus: f64) -> Result<Self> {
        let (lo_sq, hi_sq) = (m_minus * m_minus, m_plus * m_plus);
        let diff = hi_sq - lo_sq;
        let profile = MassProfile {
            case,
            shape: "smoothstep".to_string(),
            m_minus,
            m_plus,
            // u = (t + 1)/2 maps the window onto [0, 1]; du/dt = 1/2.
            m_sq: Arc::new(move |t| lo_sq + diff * smoothstep5(0.5 * (t + 1.0))),
            m_sq_d1: Arc::new(move |t| 0.5 * diff * smoothstep5_d1(0.5 * (t + 1.0))),
            m_sq_d2: Arc::new(move |t| 0.25 * diff * smoothstep5_d2(0.5 * (t + 1.0))),
        };
        profile.validate()?;
        Ok(profile)
    }

    /// The constant profile m²(t) ≡ m², class A; requires m > 0.
    pub fn constant(m: f64) -> Result<Self> {
        let m_sq = m * m;
        let profile = MassProfile {
            case: MonotonicityCase::A,
            shape: "constant".to_string(),
            m_minus: m,
            m_plus: m,
            m_sq: Arc::new(move |_| m_sq),
            m_sq_d1: Arc::new(|_| 0.0),
            m_sq_d2: Arc::new(|_| 0.0),
        };
        profile.validate()?;
        Ok(profile)
    }

    /// A user-supplied profile; all invariants of `case` are validated, and
    /// the supplied derivatives are checked against finite differences.
    pub fn custom(
        label: impl Into<String>,
        case: MonotonicityCase,
        m_minus: f64,
        m_plus: f64,
        m_sq: impl Fn(f64) -> f64 + Send + Sync + 'static,
        m_sq_d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        m_sq_d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let profile = MassProfile {
            case,
            shape: format!("custom:{}", label.into()),
            m_minus,
            m_plus,
            m_sq: Arc::new(m_sq),
            m_sq_d1: Arc::new(m_sq_d1),
            m_sq_d2: Arc::new(m_sq_d2),
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Monotonicity class.
    #[inline]
    pub fn case(&self) -> MonotonicityCase {
        self.case
    }

    /// Shape label (`"smoothstep"`, `"constant"`, or `"custom:<label>"`).
    #[inline]
    pub fn shape(&self) -> &str {
        &self.shape
    }

    /// Mass at t = −1.
    #[inline]
    pub fn m_minus(&self) -> f64 {
        self.m_minus
    }

    /// Mass at t = +1.
    #[inline]
    pub fn m_plus(&self) -> f64 {
        self.m_plus
    }

    /// m²(t).
    #[inline]
    pub fn m_sq(&self, t: f64) -> f64 {
        (self.m_sq)(t)
    }

    /// d m²/dt.
    #[inline]
    pub fn m_sq_d1(&self, t: f64) -> f64 {
        (self.m_sq_d1)(t)
    }

    /// d² m²/dt².
    #[inline]
    pub fn m_sq_d2(&self, t: f64) -> f64 {
        (self.m_sq_d2)(t)
    }

    /// Checks all class invariants on a 1001-point grid; constructors call
    /// this, so it only needs to be invoked directly after deserializing or
    /// wrapping foreign closures.
    pub fn validate(&self) -> Result<()> {
        const GRID: usize = 1001;
        let scale = 1.0 + self.m_minus * self.m_minus + self.m_plus * self.m_plus;

        if !self.m_minus.is_finite() || !self.m_plus.is_finite() || self.m_minus < 0.0 || self.m_plus < 0.0
        {
            return Err(Error::invalid(
                "m_minus/m_plus",
                format!(
                    "asymptotic masses must be finite and non-negative, got ({}, {})",
                    self.m_minus, self.m_plus
                ),
            ));
        }

        // Endpoint consistency.
        let at_minus = self.m_sq(-1.0);
        let at_plus = self.m_sq(1.0);
        if (at_minus - self.m_minus * self.m_minus).abs() > 1e-12 * scale {
            return Err(Error::ProfileInvariant {
                reason: format!(
                    "m_sq(-1) = {at_minus} does not match m_minus^2 = {}",
                    self.m_minus * self.m_minus
                ),
            });
        }
        if (at_plus - self.m_plus * self.m_plus).abs() > 1e-12 * scale {
            return Err(Error::ProfileInvariant {
                reason: format!(
                    "m_sq(1) = {at_plus} does not match m_plus^2 = {}",
                    self.m_plus * self.m_plus
                ),
            });
        }

        // Sign, finiteness, and monotonicity on the grid.
        for i in 0..GRID {
            let t = -1.0 + 2.0 * i as f64 / (GRID - 1) as f64;
            let v = self.m_sq(t);
            let d1 = self.m_sq_d1(t);
            let d2 = self.m_sq_d2(t);
            if !v.is_finite() || !d1.is_finite() || !d2.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("mass profile `{}` at t = {t}", self.shape),
                });
            }
            if v < 0.0 {
                return Err(Error::ProfileInvariant {
                    reason: format!("m_sq({t}) = {v} is negative"),
                });
            }
            match self.case {
                MonotonicityCase::A => {
                    if v <= 0.0 {
                        return Err(Error::ProfileInvariant {
                            reason: format!("case A requires m_sq > 0, but m_sq({t}) = {v}"),
                        });
                    }
                }
                MonotonicityCase::B => {
                    if d1 < -1e-12 * scale {
                        return Err(Error::ProfileInvariant {
                            reason: format!("case B requires non-decreasing m_sq, but m_sq_d1({t}) = {d1}"),
                        });
                    }
                }
                MonotonicityCase::C => {
                    if d1 > 1e-12 * scale {
                        return Err(Error::ProfileInvariant {
                            reason: format!("case C requires non-increasing m_sq, but m_sq_d1({t}) = {d1}"),
                        });
                    }
                }
            }
        }

        // Endpoint-mass/class consistency.
        match self.case {
            MonotonicityCase::A => {
                if self.m_minus <= 0.0 || self.m_plus <= 0.0 {
                    return Err(Error::ProfileInvariant {
                        reason: "case A requires m_minus > 0 and m_plus > 0".to_string(),
                    });
                }
            }
            MonotonicityCase::B => {
                if self.m_minus != 0.0 || self.m_plus <= 0.0 {
                    return Err(Error::ProfileInvariant {
                        reason: "case B requires m_minus = 0 and m_plus > 0".to_string(),
                    });
                }
            }
            MonotonicityCase::C => {
                if self.m_plus != 0.0 || self.m_minus <= 0.0 {
                    return Err(Error::ProfileInvariant {
                        reason: "case C requires m_minus > 0 and m_plus = 0".to_string(),
                    });
                }
            }
        }

        // Finite-difference consistency of the supplied derivatives, sampled
        // away from the window boundary (constant continuation makes higher
        // derivatives one-sided there).
        for i in 0..21 {
            let t = -0.99 + 1.98 * i as f64 / 20.0;
            let h = 1e-4;
            // Fourth-order central differences.
            let fd1 = (8.0 * (self.m_sq(t + h) - self.m_sq(t - h))
                - (self.m_sq(t + 2.0 * h) - self.m_sq(t - 2.0 * h)))
                / (12.0 * h);
            let fd2 = (-30.0 * self.m_sq(t)
                + 16.0 * (self.m_sq(t + h) + self.m_sq(t - h))
                - (self.m_sq(t + 2.0 * h) + self.m_sq(t - 2.0 * h)))
                / (12.0 * h * h);
            if (self.m_sq_d1(t) - fd1).abs() > 1e-6 * scale {
                return Err(Error::ProfileInvariant {
                    reason: format!(
                        "m_sq_d1({t}) = {} disagrees with finite differences ({fd1})",
                        self.m_sq_d1(t)
                    ),
                });
            }
            if (self.m_sq_d2(t) - fd2).abs() > 1e-5 * scale {
                return Err(Error::ProfileInvariant {
                    reason: format!(
                        "m_sq_d2({t}) = {} disagrees with finite differences ({fd2})",
                        self.m_sq_d2(t)
                    ),
                });
            }
        }

        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn smoothstep_midpoint_values() {
        // m: 1 → 2 gives m²: 1 → 4 and s(1/2) = 1/2, s′(1/2) = 15/8.
        let p = MassProfile::smoothstep(MonotonicityCase::A, 1.0, 2.0).unwrap();
        assert_relative_eq!(p.m_sq(0.0), 2.5, epsilon = 1e-15);
        assert_relative_eq!(p.m_sq_d1(0.0), 2.8125, epsilon = 1e-15);
        assert_relative_eq!(p.m_sq_d2(0.0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn smoothstep_is_flat_at_the_window_boundary() {
        let p = MassProfile::smoothstep(MonotonicityCase::A, 1.0, 2.0).unwrap();
        assert_relative_eq!(p.m_sq(-1.0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(p.m_sq(1.0), 4.0, epsilon = 1e-15);
        for t in [-1.0, 1.0, -1.5, 2.0] {
            assert_eq!(p.m_sq_d1(t), 0.0);
            assert_eq!(p.m_sq_d2(t), 0.0);
        }
        // Constant continuation outside the window.
        assert_eq!(p.m_sq(-3.0), 1.0);
        assert_eq!(p.m_sq(5.0), 4.0);
    }

    #[test]
    fn derivatives_match_finite_differences_on_a_grid() {
        let p = MassProfile::smoothstep(MonotonicityCase::A, 0.7, 1.9).unwrap();
        let h = 1e-5;
        for i in 0..41 {
            let t = -0.98 + 1.96 * i as f64 / 40.0;
            let fd1 = (8.0 * (p.m_sq(t + h) - p.m_sq(t - h)) - (p.m_sq(t + 2.0 * h) - p.m_sq(t - 2.0 * h)))
                / (12.0 * h);
            assert_relative_eq!(p.m_sq_d1(t), fd1, epsilon = 1e-9, max_relative = 1e-8);
            let fd2 = (8.0 * (p.m_sq_d1(t + h) - p.m_sq_d1(t - h))
                - (p.m_sq_d1(t + 2.0 * h) - p.m_sq_d1(t - 2.0 * h)))
                / (12.0 * h);
            assert_relative_eq!(p.m_sq_d2(t), fd2, epsilon = 1e-9, max_relative = 1e-8);
        }
    }

    #[test]
    fn constant_profile_has_zero_derivatives() {
        let p = MassProfile::constant(1.3).unwrap();
        assert_eq!(p.case(), MonotonicityCase::A);
        assert_relative_eq!(p.m_sq(0.37), 1.69, epsilon = 1e-15);
        assert_eq!(p.m_sq_d1(0.37), 0.0);
        assert_eq!(p.m_sq_d2(0.37), 0.0);
        assert_eq!(p.m_minus(), p.m_plus());
    }

    #[test]
    fn constant_profile_requires_positive_mass() {
        assert!(MassProfile::constant(0.0).is_err());
        assert!(MassProfile::constant(-1.0).is_err());
        assert!(MassProfile::constant(f64::NAN).is_err());
    }

    #[test]
    fn case_endpoint_consistency_is_enforced() {
        // Case A with a vanishing endpoint mass.
        assert!(MassProfile::smoothstep(MonotonicityCase::A, 0.0, 1.0).is_err());
        // Case B must start massless…
        assert!(MassProfile::smoothstep(MonotonicityCase::B, 0.5, 1.0).is_err());
        // …and these are fine.
        assert!(MassProfile::smoothstep(MonotonicityCase::B, 0.0, 1.0).is_ok());
        assert!(MassProfile::smoothstep(MonotonicityCase::C, 1.0, 0.0).is_ok());
        // Case C must end massless.
        assert!(MassProfile::smoothstep(MonotonicityCase::C, 1.0, 0.2).is_err());
    }

    #[test]
    fn monotonicity_violations_are_detected() {
        // A decreasing profile declared as case B.
        let r = MassProfile::custom(
            "decreasing",
            MonotonicityCase::B,
            0.0,
            1.0,
            |t| 0.5 - 0.5 * t,
            |_| -0.5,
            |_| 0.0,
        );
        assert!(matches!(r, Err(Error::ProfileInvariant { .. })));
    }

    #[test]
    fn derivative_slips_are_detected() {
        // Correct value, wrong first derivative.
        let r = MassProfile::custom(
            "bad-derivative",
            MonotonicityCase::A,
            1.0,
            1.0,
            |t| 1.0 + 0.1 * t * t,
            |_| 0.0,
            |_| 0.2,
        );
        assert!(matches!(r, Err(Error::ProfileInvariant { .. })));
    }

    #[test]
    fn negative_mass_squared_is_rejected() {
        let r = MassProfile::custom(
            "dips-negative",
            MonotonicityCase::A,
            1.0,
            1.0,
            |t| 1.0 - 1.5 * (1.0 - t * t),
            |t| 3.0 * t,
            |_| 3.0,
        );
        assert!(r.is_err());
    }

    #[test]
    fn custom_profile_with_consistent_data_validates() {
        // m²(t) = 2 + sin(πt/2)·0 + … pick something strictly positive & smooth:
        // m² = 2 + cos(πt)/4 has m(∓1) = √(2+1/4·cos(∓π)) = √1.75 at both ends.
        let w = std::f64::consts::PI;
        let m_end = (2.0 - 0.25f64).sqrt();
        let p = MassProfile::custom(
            "cosine-dip",
            MonotonicityCase::A,
            m_end,
            m_end,
            move |t| 2.0 + 0.25 * (w * t).cos(),
            move |t| -0.25 * w * (w * t).sin(),
            move |t| -0.25 * w * w * (w * t).cos(),
        )
        .unwrap();
        assert_eq!(p.shape(), "custom:cosine-dip");
        assert_relative_eq!(p.m_sq(0.0), 2.25, epsilon = 1e-15);
    }
}
