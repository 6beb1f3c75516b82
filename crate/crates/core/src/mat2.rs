//! Complex 2×2 matrices and Hermitian 2×2 forms.
//!
//! Everything in this crate lives in ℂ², so a dedicated fixed-size type beats
//! a generic linear-algebra dependency: all operations are closed-form, `Copy`,
//! and allocation-free. The two types are
//!
//! * [`Mat2`] — a general complex 2×2 matrix (generators, propagators, frames,
//!   projectors), with determinant/inverse/adjoint, the spectral norm, and a
//!   closed-form matrix exponential via the Cayley–Hamilton identity
//!   N² = δ²·1 for traceless N;
//! * [`HermForm2`] — a Hermitian 2×2 form (charge forms, covariances), stored
//!   with exact Hermitian symmetry and equipped with congruence transforms
//!   V†·M·V and closed-form real eigenvalues.
//!
//! The matrix exponential uses
//!
//! ```text
//!     exp(M) = e^{tr M / 2} ( cosh δ · 1 + sinh(δ)/δ · N ),
//!     N = M − (tr M / 2)·1,     δ² = N₁₁² + N₁₂ N₂₁,
//! ```
//!
//! with a Taylor fallback for sinh(δ)/δ at small |δ|; it is exact for the
//! generators appearing here and keeps group-like structure to rounding
//! (e.g. it maps the Lie algebra {A : A†q + qA = 0} of a charge form q into
//! its pseudo-unitary group).

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Error;
use crate::Result;

/// Convenience constructor for a complex scalar.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A complex 2×2 matrix with row-major named entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    /// Row 1, column 1.
    pub a11: Complex64,
    /// Row 1, column 2.
    pub a12: Complex64,
    /// Row 2, column 1.
    pub a21: Complex64,
    /// Row 2, column 2.
    pub a22: Complex64,
}

impl Mat2 {
    /// Builds a matrix from its four entries, row-major.
    #[inline]
    pub fn new(a11: Complex64, a12: Complex64, a21: Complex64, a22: Complex64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    /// Builds a matrix from real entries, row-major.
    #[inline]
    pub fn from_real(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2::new(c64(a11, 0.0), c64(a12, 0.0), c64(a21, 0.0), c64(a22, 0.0))
    }

    /// The zero matrix.
    #[inline]
    pub fn zero() -> Self {
        Mat2::from_real(0.0, 0.0, 0.0, 0.0)
    }

    /// The identity matrix.
    #[inline]
    pub fn identity() -> Self {
        Mat2::from_real(1.0, 0.0, 0.0, 1.0)
    }

    /// Diagonal matrix diag(d1, d2).
    #[inline]
    pub fn diag(d1: Complex64, d2: Complex64) -> Self {
        Mat2::new(d1, Complex64::ZERO, Complex64::ZERO, d2)
    }

    /// Matrix trace.
    #[inline]
    pub fn trace(&self) -> Complex64 {
        self.a11 + self.a22
    }

    /// Matrix determinant.
    #[inline]
    pub fn det(&self) -> Complex64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    /// Entrywise complex conjugate.
    #[inline]
    pub fn conj(&self) -> Self {
        Mat2::new(
            self.a11.conj(),
            self.a12.conj(),
            self.a21.conj(),
            self.a22.conj(),
        )
    }

    /// Transpose.
    #[inline]
    pub fn transpose(&self) -> Self {
        Mat2::new(self.a11, self.a21, self.a12, self.a22)
    }

    /// Conjugate transpose (adjoint) M†.
    #[inline]
    pub fn adjoint(&self) -> Self {
        Mat2::new(
            self.a11.conj(),
            self.a21.conj(),
            self.a12.conj(),
            self.a22.conj(),
        )
    }

    /// Inverse, or [`Error::SingularMatrix`] when the determinant vanishes
    /// numerically.
    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        let det_abs = det.norm();
        if !det_abs.is_finite() || det_abs < 1e-300 {
            return Err(Error::SingularMatrix { det_abs });
        }
        let inv_det = det.finv();
        Ok(Mat2::new(
            self.a22 * inv_det,
            -self.a12 * inv_det,
            -self.a21 * inv_det,
            self.a11 * inv_det,
        ))
    }

    /// Frobenius norm √(Σ|aᵢⱼ|²).
    #[inline]
    pub fn frobenius_norm(&self) -> f64 {
        (self.a11.norm_sqr() + self.a12.norm_sqr() + self.a21.norm_sqr() + self.a22.norm_sqr())
            .sqrt()
    }

    /// Largest entry modulus maxᵢⱼ |aᵢⱼ|.
    #[inline]
    pub fn max_abs(&self) -> f64 {
        self.a11
            .norm()
            .max(self.a12.norm())
            .max(self.a21.norm())
            .max(self.a22.norm())
    }

    /// Operator (spectral) norm: the largest singular value.
    ///
    /// For a 2×2 matrix the singular values solve
    /// σ² = (‖M‖_F² ± √(‖M‖_F⁴ − 4|det M|²)) / 2 in closed form.
    pub fn op_norm(&self) -> f64 {
        let t = self.a11.norm_sqr() + self.a12.norm_sqr() + self.a21.norm_sqr() + self.a22.norm_sqr();
        let d = self.det().norm_sqr();
        let disc = (t * t - 4.0 * d).max(0.0);
        (0.5 * (t + disc.sqrt())).sqrt()
    }

    /// True when every entry is finite.
    #[inline]
    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }

    /// Matrix exponential, exact up to rounding via Cayley–Hamilton.
    ///
    /// Splitting M = μ·1 + N with μ = tr M / 2 leaves N traceless, so
    /// N² = δ²·1 with δ² = N₁₁² + N₁₂N₂₁ and the power series collapses to
    /// cosh δ · 1 + sinh(δ)/δ · N. The quotient sinh(δ)/δ is evaluated by
    /// series below |δ| = 1e−4 to avoid cancellation.
    pub fn exp(&self) -> Self {
        let mu = 0.5 * self.trace();
        let n = Mat2::new(self.a11 - mu, self.a12, self.a21, self.a22 - mu);
        let delta_sq = n.a11 * n.a11 + n.a12 * n.a21;
        let delta = delta_sq.sqrt();
        let (cosh_d, sinhc_d) = if delta.norm() < 1e-4 {
            // cosh δ = 1 + δ²/2 + δ⁴/24, sinh δ / δ = 1 + δ²/6 + δ⁴/120;
            // truncation error O(δ⁶) < 1e−24 is far below rounding here.
            let d2 = delta_sq;
            let d4 = d2 * d2;
            (
                Complex64::ONE + 0.5 * d2 + d4 / 24.0,
                Complex64::ONE + d2 / 6.0 + d4 / 120.0,
            )
        } else {
            (delta.cosh(), delta.sinh() / delta)
        };
        let scale = mu.exp();
        Mat2::new(
            scale * (cosh_d + sinhc_d * n.a11),
            scale * (sinhc_d * n.a12),
            scale * (sinhc_d * n.a21),
            scale * (cosh_d + sinhc_d * n.a22),
        )
    }

    /// Commutator [self, other] = self·other − other·self.
    #[inline]
    pub fn commutator(&self, other: &Mat2) -> Self {
        *self * *other - *other * *self
    }

    /// Applies the matrix to a vector (f₀, f₁).
    #[inline]
    pub fn apply(&self, f: (Complex64, Complex64)) -> (Complex64, Complex64) {
        (
            self.a11 * f.0 + self.a12 * f.1,
            self.a21 * f.0 + self.a22 * f.1,
        )
    }
}

impl serde::Serialize for Mat2 {
    /// Serializes row-major as four [re, im] pairs.
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = serializer.serialize_seq(Some(4))?;
        for entry in [self.a11, self.a12, self.a21, self.a22] {
            seq.serialize_element(&[entry.re, entry.im])?;
        }
        seq.end()
    }
}

impl std::ops::Add for Mat2 {
    type Output = Mat2;
    #[inline]
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 + rhs.a11,
            self.a12 + rhs.a12,
            self.a21 + rhs.a21,
            self.a22 + rhs.a22,
        )
    }
}

impl std::ops::Sub for Mat2 {
    type Output = Mat2;
    #[inline]
    fn sub(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 - rhs.a11,
            self.a12 - rhs.a12,
            self.a21 - rhs.a21,
            self.a22 - rhs.a22,
        )
    }
}

impl std::ops::Neg for Mat2 {
    type Output = Mat2;
    #[inline]
    fn neg(self) -> Mat2 {
        Mat2::new(-self.a11, -self.a12, -self.a21, -self.a22)
    }
}

impl std::ops::Mul for Mat2 {
    type Output = Mat2;
    #[inline]
    fn mul(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * rhs.a11 + self.a12 * rhs.a21,
            self.a11 * rhs.a12 + self.a12 * rhs.a22,
            self.a21 * rhs.a11 + self.a22 * rhs.a21,
            self.a21 * rhs.a12 + self.a22 * rhs.a22,
        )
    }
}

impl std::ops::Mul<Mat2> for Complex64 {
    type Output = Mat2;
    #[inline]
    fn mul(self, rhs: Mat2) -> Mat2 {
        Mat2::new(self * rhs.a11, self * rhs.a12, self * rhs.a21, self * rhs.a22)
    }
}

impl std::ops::Mul<Mat2> for f64 {
    type Output = Mat2;
    #[inline]
    fn mul(self, rhs: Mat2) -> Mat2 {
        Mat2::new(self * rhs.a11, self * rhs.a12, self * rhs.a21, self * rhs.a22)
    }
}

/// A Hermitian 2×2 form: real diagonal, conjugate off-diagonal.
///
/// The representation stores the upper triangle (`d1`, `d2` real, `off`
/// complex), so Hermitian symmetry is exact by construction rather than up to
/// rounding. Covariances, charge forms, and smeared pairings all live here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HermForm2 {
    d1: f64,
    off_re: f64,
    off_im: f64,
    d2: f64,
}

impl HermForm2 {
    /// Builds a Hermitian form from diagonal entries and the (1,2) entry.
    pub fn new(d1: f64, off: Complex64, d2: f64) -> Self {
        HermForm2 {
            d1,
            off_re: off.re,
            off_im: off.im,
            d2,
        }
    }

    /// Diagonal Hermitian form diag(d1, d2).
    #[inline]
    pub fn diag(d1: f64, d2: f64) -> Self {
        HermForm2::new(d1, Complex64::ZERO, d2)
    }

    /// The Hermitian part (M + M†)/2 of an arbitrary matrix.
    ///
    /// Used to re-symmetrize products that are Hermitian in exact arithmetic.
    pub fn symmetrize(m: &Mat2) -> Self {
        let off = 0.5 * (m.a12 + m.a21.conj());
        HermForm2::new(0.5 * (m.a11 + m.a11.conj()).re, off, 0.5 * (m.a22 + m.a22.conj()).re)
    }

    /// (1,1) entry (real).
    #[inline]
    pub fn d1(&self) -> f64 {
        self.d1
    }

    /// (2,2) entry (real).
    #[inline]
    pub fn d2(&self) -> f64 {
        self.d2
    }

    /// (1,2) entry; the (2,1) entry is its conjugate.
    #[inline]
    pub fn off(&self) -> Complex64 {
        c64(self.off_re, self.off_im)
    }

    /// The form as a full matrix.
    pub fn to_mat(&self) -> Mat2 {
        Mat2::new(
            c64(self.d1, 0.0),
            self.off(),
            self.off().conj(),
            c64(self.d2, 0.0),
        )
    }

    /// Congruence transform V† · M · V (a Hermitian form again).
    pub fn congruence(&self, v: &Mat2) -> HermForm2 {
        HermForm2::symmetrize(&(v.adjoint() * self.to_mat() * *v))
    }

    /// Real eigenvalues (min, max) in closed form.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.d1 + self.d2);
        let half_gap = 0.5 * (self.d1 - self.d2);
        let r = (half_gap * half_gap + self.off_re * self.off_re + self.off_im * self.off_im)
            .sqrt();
        (mean - r, mean + r)
    }

    /// Operator norm (largest eigenvalue modulus).
    pub fn op_norm(&self) -> f64 {
        let (lo, hi) = self.eigenvalues();
        lo.abs().max(hi.abs())
    }

    /// Determinant (real for Hermitian forms).
    #[inline]
    pub fn det(&self) -> f64 {
        self.d1 * self.d2 - (self.off_re * self.off_re + self.off_im * self.off_im)
    }

    /// True when all entries are finite.
    #[inline]
    pub fn is_finite(&self) -> bool {
        self.d1.is_finite() && self.d2.is_finite() && self.off_re.is_finite() && self.off_im.is_finite()
    }

    /// True when the smallest eigenvalue is ≥ −tol.
    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        self.eigenvalues().0 >= -tol
    }
}

impl std::ops::Add for HermForm2 {
    type Output = HermForm2;
    #[inline]
    fn add(self, rhs: HermForm2) -> HermForm2 {
        HermForm2 {
            d1: self.d1 + rhs.d1,
            off_re: self.off_re + rhs.off_re,
            off_im: self.off_im + rhs.off_im,
            d2: self.d2 + rhs.d2,
        }
    }
}

impl std::ops::Sub for HermForm2 {
    type Output = HermForm2;
    #[inline]
    fn sub(self, rhs: HermForm2) -> HermForm2 {
        HermForm2 {
            d1: self.d1 - rhs.d1,
            off_re: self.off_re - rhs.off_re,
            off_im: self.off_im - rhs.off_im,
            d2: self.d2 - rhs.d2,
        }
    }
}

impl std::ops::Mul<HermForm2> for f64 {
    type Output = HermForm2;
    #[inline]
    fn mul(self, rhs: HermForm2) -> HermForm2 {
        HermForm2 {
            d1: self * rhs.d1,
            off_re: self * rhs.off_re,
            off_im: self * rhs.off_im,
            d2: self * rhs.d2,
        }
    }
}
