//! Quasi-free reference states and their adiabatic limits.
//!
//! A quasi-free state of a mode is described by a Hermitian 2×2 covariance
//! form λ(ε) at a reference time t ∈ {−1, +1}, subject to the positivity
//! conditions λ ⪰ 0 and λ − q ⪰ 0 (q the charge form). In the diagonal frame
//! λ̂ = 𝒯†λ𝒯 the built-in families read
//!
//! ```text
//!     vacuum:   λ̂ = diag(1, 0)                     λ = ½ [[ε_t, 1], [1, ε_t⁻¹]]
//!     KMS(β):   λ̂ = diag(1 + n, n)                 λ = ½ [[ε_t coth(βε_t/2), 1], [1, ε_t⁻¹ coth(βε_t/2)]]
//!     Hadamard: λ̂ = [[1 + b², bdc], [bdc, c²]]     (b, c, d real functions of ε, |d| ≤ 1)
//! ```
//!
//! with n = 1/(e^{βε_t} − 1). The central operation is the closed form of the
//! slow-drive limit: as T → ∞ the covariance pulled back from t = −1 to
//! t = +1 converges weakly to
//!
//! ```text
//!     λ₁^ad = (𝒯₁⁻¹)† · diag(𝒯₋₁† λ₋₁ 𝒯₋₁) · 𝒯₁⁻¹,
//! ```
//!
//! i.e. the diagonal part of the incoming covariance in the initial frame,
//! transported by the final frame. Two diagnostics quantify how the limit
//! remembers its past:
//!
//! * [`kms_defect`] — a KMS(β) input comes out thermal with an ε-dependent
//!   effective inverse temperature β_eff(ε) = β ε₋₁/ε₁; the defect is the
//!   spread of β_eff over a spectral grid, zero exactly when the mass profile
//!   is constant;
//! * [`hadamard_remainder`] — a Hadamard-class input converges to vacuum plus
//!   the Schwartz-class remainder
//!   r(ε) = ½ [[ε₁(b²+c²), b²−c²], [b²−c², ε₁⁻¹(b²+c²)]],
//!   whose weighted suprema [`smoothing_report`] traces.

use std::fmt;
use std::sync::Arc;

use crate::error::Error;
use crate::mat2::{c64, HermForm2};
use crate::mode::{charge_form, dispersion, frame, Mode};
use crate::profile::MassProfile;
use crate::Result;

/// Reference time of a covariance family: an end of the driving window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceTime {
    /// t = −1 (incoming).
    MinusOne,
    /// t = +1 (outgoing).
    PlusOne,
}

impl ReferenceTime {
    /// The time value.
    #[inline]
    pub fn value(&self) -> f64 {
        match self {
            ReferenceTime::MinusOne => -1.0,
            ReferenceTime::PlusOne => 1.0,
        }
    }
}

impl serde::Serialize for ReferenceTime {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

/// ε-dependent data (b, c, d) of a Hadamard-class covariance, |d| ≤ 1.
#[derive(Clone)]
pub struct HadamardData {
    label: String,
    b: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    c: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    d: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for HadamardData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HadamardData").field("label", &self.label).finish()
    }
}

impl HadamardData {
    /// Wraps user-supplied amplitude functions b, c and correlation d.
    pub fn new(
        label: impl Into<String>,
        b: impl Fn(f64) -> f64 + Send + Sync + 'static,
        c: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        HadamardData {
            label: label.into(),
            b: Arc::new(b),
            c: Arc::new(c),
            d: Arc::new(d),
        }
    }

    /// The built-in Gaussian preset b(ε) = c(ε) = e^{−ε²}, d ≡ 1.
    pub fn gaussian() -> Self {
        HadamardData::new(
            "gaussian",
            |eps: f64| (-eps * eps).exp(),
            |eps: f64| (-eps * eps).exp(),
            |_| 1.0,
        )
    }

    /// The preset label.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Evaluates (b, c, d) with domain checks.
    pub fn eval(&self, eps: f64) -> Result<(f64, f64, f64)> {
        let (b, c, d) = ((self.b)(eps), (self.c)(eps), (self.d)(eps));
        if !b.is_finite() || !c.is_finite() || !d.is_finite() {
            return Err(Error::NonFinite {
                context: format!("Hadamard data `{}` at ε = {eps}", self.label),
            });
        }
        if d.abs() > 1.0 {
            return Err(Error::invalid(
                "d",
                format!("Hadamard correlation must satisfy |d| ≤ 1, got {d} at ε = {eps}"),
            ));
        }
        Ok((b, c, d))
    }
}

/// What kind of state a covariance family describes.
#[derive(Debug, Clone)]
pub enum StateKind {
    /// The frozen-time ground state.
    Vacuum,
    /// The thermal equilibrium state at inverse temperature β > 0.
    Kms {
        /// Inverse temperature.
        beta: f64,
    },
    /// A Hadamard-class excitation of the vacuum.
    Hadamard(HadamardData),
    /// Anything else; carries a label for reports.
    Custom {
        /// Display label.
        label: String,
    },
}

impl StateKind {
    /// Short lowercase name for errors and serialization.
    pub fn name(&self) -> &'static str {
        match self {
            StateKind::Vacuum => "vacuum",
            StateKind::Kms { .. } => "kms",
            StateKind::Hadamard(_) => "hadamard",
            StateKind::Custom { .. } => "custom",
        }
    }
}

type FormFn = Arc<dyn Fn(f64) -> Result<HermForm2> + Send + Sync>;

/// A family of Hermitian 2×2 forms over the spectral parameter ε.
///
/// The plain carrier without state semantics: remainders and other
/// differences of covariances live here (they need not be positive).
#[derive(Clone)]
pub struct FormFamily {
    reference_time: ReferenceTime,
    eval: FormFn,
}

impl fmt::Debug for FormFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FormFamily")
            .field("reference_time", &self.reference_time)
            .finish()
    }
}

impl FormFamily {
    /// Wraps an evaluation closure.
    pub fn new(
        reference_time: ReferenceTime,
        eval: impl Fn(f64) -> Result<HermForm2> + Send + Sync + 'static,
    ) -> Self {
        FormFamily {
            reference_time,
            eval: Arc::new(eval),
        }
    }

    /// Reference time of the family.
    #[inline]
    pub fn reference_time(&self) -> ReferenceTime {
        self.reference_time
    }

    /// Evaluates the form at ε.
    pub fn eval(&self, eps: f64) -> Result<HermForm2> {
        check_eps(eps)?;
        (self.eval)(eps)
    }
}

/// A covariance family in the diagonal (hat) frame.
#[derive(Clone, Debug)]
pub struct HatForm {
    family: FormFamily,
}

impl HatForm {
    /// Reference time of the underlying covariance.
    #[inline]
    pub fn reference_time(&self) -> ReferenceTime {
        self.family.reference_time()
    }

    /// Evaluates λ̂(ε).
    pub fn eval(&self, eps: f64) -> Result<HermForm2> {
        self.family.eval(eps)
    }

    /// The diagonal part diag(λ̂₁₁, λ̂₂₂) as a new hat-frame family.
    pub fn diag_part(&self) -> HatForm {
        let inner = self.family.clone();
        HatForm {
            family: FormFamily::new(inner.reference_time, move |eps| {
                let full = inner.eval(eps)?;
                Ok(HermForm2::diag(full.d1(), full.d2()))
            }),
        }
    }
}

/// A quasi-free state: a positive covariance family tagged with its kind and
/// reference time.
#[derive(Clone)]
pub struct CovarianceFamily {
    kind: StateKind,
    reference_time: ReferenceTime,
    eval: FormFn,
}

impl fmt::Debug for CovarianceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CovarianceFamily")
            .field("kind", &self.kind.name())
            .field("reference_time", &self.reference_time)
            .finish()
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::invalid(
            "eps",
            format!("spectral parameter must be finite and positive, got {eps}"),
        ));
    }
    Ok(())
}

/// Wraps a raw evaluation closure with the quasi-free positivity checks
/// λ ⪰ 0 and λ − q ⪰ 0 (up to a rounding-scale tolerance).
fn positivity_checked(raw: impl Fn(f64) -> Result<HermForm2> + Send + Sync + 'static) -> FormFn {
    Arc::new(move |eps: f64| {
        let lambda = raw(eps)?;
        if !lambda.is_finite() {
            return Err(Error::NonFinite {
                context: format!("covariance at ε = {eps}"),
            });
        }
        let scale = 1.0 + lambda.op_norm();
        let tol = 1e-12 * scale;
        let min_eig = lambda.eigenvalues().0;
        if min_eig < -tol {
            return Err(Error::PositivityViolation {
                eps,
                min_eigenvalue: min_eig,
            });
        }
        let min_eig_q = (lambda - charge_form()).eigenvalues().0;
        if min_eig_q < -tol {
            return Err(Error::PositivityViolation {
                eps,
                min_eigenvalue: min_eig_q,
            });
        }
        Ok(lambda)
    })
}

impl CovarianceFamily {
    /// Builds a family with positivity checks applied at every evaluation.
    pub fn new(
        kind: StateKind,
        reference_time: ReferenceTime,
        eval: impl Fn(f64) -> Result<HermForm2> + Send + Sync + 'static,
    ) -> Self {
        CovarianceFamily {
            kind,
            reference_time,
            eval: positivity_checked(eval),
        }
    }

    /// Builds a family without per-evaluation positivity enforcement.
    ///
    /// For covariances produced by numerical propagation, where positivity
    /// holds up to integration error rather than rounding; tests assert it at
    /// the appropriate looser tolerance.
    pub(crate) fn new_unchecked(
        kind: StateKind,
        reference_time: ReferenceTime,
        eval: impl Fn(f64) -> Result<HermForm2> + Send + Sync + 'static,
    ) -> Self {
        CovarianceFamily {
            kind,
            reference_time,
            eval: Arc::new(eval),
        }
    }

    /// A custom family from a raw closure (positivity-checked on evaluation).
    pub fn custom(
        label: impl Into<String>,
        reference_time: ReferenceTime,
        eval: impl Fn(f64) -> Result<HermForm2> + Send + Sync + 'static,
    ) -> Self {
        CovarianceFamily::new(StateKind::Custom { label: label.into() }, reference_time, eval)
    }

    /// The state kind.
    #[inline]
    pub fn kind(&self) -> &StateKind {
        &self.kind
    }

    /// The reference time.
    #[inline]
    pub fn reference_time(&self) -> ReferenceTime {
        self.reference_time
    }

    /// Evaluates λ(ε).
    pub fn eval(&self, eps: f64) -> Result<HermForm2> {
        check_eps(eps)?;
        (self.eval)(eps)
    }

    /// Serializes kind, parameters, and sampled values on the given ε nodes
    /// to a JSON document.
    pub fn to_json(&self, eps_nodes: &[f64]) -> Result<String> {
        let kind = match &self.kind {
            StateKind::Vacuum => serde_json::json!({ "name": "vacuum" }),
            StateKind::Kms { beta } => serde_json::json!({ "name": "kms", "beta": beta }),
            StateKind::Hadamard(data) => {
                serde_json::json!({ "name": "hadamard", "preset": data.label() })
            }
            StateKind::Custom { label } => serde_json::json!({ "name": "custom", "label": label }),
        };
        let mut samples = Vec::with_capacity(eps_nodes.len());
        for &eps in eps_nodes {
            let lambda = self.eval(eps)?;
            samples.push(serde_json::json!({
                "eps": eps,
                "d1": lambda.d1(),
                "off": [lambda.off().re, lambda.off().im],
                "d2": lambda.d2(),
            }));
        }
        let doc = serde_json::json!({
            "kind": kind,
            "reference_time": self.reference_time.value(),
            "samples": samples,
        });
        serde_json::to_string_pretty(&doc).map_err(|e| Error::ReportSerialization {
            reason: e.to_string(),
        })
    }
}

/// coth(x) for x > 0, stable for both tiny and huge arguments.
fn coth(x: f64) -> f64 {
    // 2/expm1(2x) underflows to 0 gracefully for large x, giving coth → 1.
    1.0 + 2.0 / (2.0 * x).exp_m1()
}

/// arcoth(x) = atanh(1/x); defined for |x| > 1.
pub fn arcoth(x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() <= 1.0 {
        return Err(Error::ArcothDomain { value: x });
    }
    Ok(x.recip().atanh())
}

/// Dispersion at the reference time for a given spectral parameter.
fn dispersion_at(eps: f64, t: f64, p: &MassProfile) -> Result<f64> {
    let mode = Mode::new(eps)?;
    dispersion(&mode, t, p)
}

/// The vacuum covariance family λ(ε) = ½[[ε_t, 1], [1, ε_t⁻¹]] at the
/// reference time.
pub fn vacuum_covariance(p: &MassProfile, reference_time: ReferenceTime) -> CovarianceFamily {
    let p = p.clone();
    let t = reference_time.value();
    CovarianceFamily::new(StateKind::Vacuum, reference_time, move |eps| {
        let eps_t = dispersion_at(eps, t, &p)?;
        Ok(HermForm2::new(0.5 * eps_t, c64(0.5, 0.0), 0.5 / eps_t))
    })
}

/// The KMS covariance family at inverse temperature β > 0:
/// λ(ε) = ½[[ε_t coth(βε_t/2), 1], [1, ε_t⁻¹ coth(βε_t/2)]].
pub fn kms_covariance(
    p: &MassProfile,
    beta: f64,
    reference_time: ReferenceTime,
) -> Result<CovarianceFamily> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::invalid(
            "beta",
            format!("inverse temperature must be finite and positive, got {beta}"),
        ));
    }
    let p = p.clone();
    let t = reference_time.value();
    Ok(CovarianceFamily::new(
        StateKind::Kms { beta },
        reference_time,
        move |eps| {
            let eps_t = dispersion_at(eps, t, &p)?;
            let occupancy = coth(0.5 * beta * eps_t);
            Ok(HermForm2::new(
                0.5 * eps_t * occupancy,
                c64(0.5, 0.0),
                0.5 * occupancy / eps_t,
            ))
        },
    ))
}

/// A Hadamard-class covariance family: λ̂ = [[1 + b², bdc], [bdc, c²]] in the
/// diagonal frame at the reference time, transported to the physical frame.
pub fn hadamard_covariance(
    p: &MassProfile,
    data: HadamardData,
    reference_time: ReferenceTime,
) -> CovarianceFamily {
    let p = p.clone();
    let t = reference_time.value();
    let eval_data = data.clone();
    CovarianceFamily::new(StateKind::Hadamard(data), reference_time, move |eps| {
        let (b, c, d) = eval_data.eval(eps)?;
        let hat = HermForm2::new(1.0 + b * b, c64(b * d * c, 0.0), c * c);
        let mode = Mode::new(eps)?;
        let (_, frame_inv) = frame(&mode, t, &p)?;
        Ok(hat.congruence(&frame_inv))
    })
}

/// The hat transform λ̂ = 𝒯†λ𝒯 of a covariance family, taken in the frame of
/// the family's own reference time.
pub fn hat_transform(family: &CovarianceFamily, p: &MassProfile) -> HatForm {
    let p = p.clone();
    let t = family.reference_time().value();
    let inner = family.clone();
    HatForm {
        family: FormFamily::new(family.reference_time(), move |eps| {
            let lambda = inner.eval(eps)?;
            let mode = Mode::new(eps)?;
            let (fr, _) = frame(&mode, t, &p)?;
            Ok(lambda.congruence(&fr))
        }),
    }
}

/// The closed-form adiabatic limit of a covariance family given at t = −1:
/// the weak limit as T → ∞ of the pull-back to t = +1,
///
/// ```text
///     λ₁^ad(ε) = (𝒯₁⁻¹)† · diag(𝒯₋₁† λ₋₁ 𝒯₋₁) · 𝒯₁⁻¹.
/// ```
///
/// The result keeps the input's kind as lineage and lives at t = +1.
pub fn adiabatic_limit_closed_form(
    family: &CovarianceFamily,
    p: &MassProfile,
) -> Result<CovarianceFamily> {
    if family.reference_time() != ReferenceTime::MinusOne {
        return Err(Error::StateKindMismatch {
            expected: "reference-time −1",
            got: format!("reference-time {}", family.reference_time().value()),
        });
    }
    let p_out = p.clone();
    let hat = hat_transform(family, p).diag_part();
    Ok(CovarianceFamily::new(
        family.kind().clone(),
        ReferenceTime::PlusOne,
        move |eps| {
            let diag = hat.eval(eps)?;
            let mode = Mode::new(eps)?;
            let (_, frame_inv) = frame(&mode, 1.0, &p_out)?;
            Ok(diag.congruence(&frame_inv))
        },
    ))
}

/// The spread of the effective inverse temperature over a spectral grid.
///
/// For a KMS(β) input the adiabatic limit is thermal mode by mode with
/// β_eff(ε) = (2/ε₁)·arcoth(2 ε₁ λ(ε)₂₂) = β ε₋₁/ε₁; the defect
/// max − min of β_eff over `eps_nodes` measures how far the limit is from a
/// single-temperature state. It vanishes exactly for constant mass.
///
/// `beta` must match the β recorded in the family's kind.
pub fn kms_defect(
    limit: &CovarianceFamily,
    p: &MassProfile,
    beta: f64,
    eps_nodes: &[f64],
) -> Result<f64> {
    let StateKind::Kms { beta: recorded } = limit.kind() else {
        return Err(Error::StateKindMismatch {
            expected: "kms",
            got: limit.kind().name().to_string(),
        });
    };
    if (recorded - beta).abs() > 1e-12 * beta.abs().max(1.0) {
        return Err(Error::invalid(
            "beta",
            format!("family was built at β = {recorded}, queried at β = {beta}"),
        ));
    }
    if eps_nodes.is_empty() {
        return Err(Error::invalid("eps_nodes", "need at least one grid node"));
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &eps in eps_nodes {
        let lambda = limit.eval(eps)?;
        let eps_plus = dispersion_at(eps, 1.0, p)?;
        let beta_eff = 2.0 / eps_plus * arcoth(2.0 * eps_plus * lambda.d2())?;
        min = min.min(beta_eff);
        max = max.max(beta_eff);
    }
    Ok(max - min)
}

/// The remainder r(ε) = λ₁^ad(ε) − λ₁^vac(ε) of a Hadamard-class limit.
///
/// In closed form r = ½[[ε₁(b²+c²), b²−c²], [b²−c², ε₁⁻¹(b²+c²)]]; it decays
/// rapidly in ε whenever b and c do.
pub fn hadamard_remainder(limit: &CovarianceFamily, p: &MassProfile) -> Result<FormFamily> {
    if !matches!(limit.kind(), StateKind::Hadamard(_)) {
        return Err(Error::StateKindMismatch {
            expected: "hadamard",
            got: limit.kind().name().to_string(),
        });
    }
    if limit.reference_time() != ReferenceTime::PlusOne {
        return Err(Error::StateKindMismatch {
            expected: "reference-time +1",
            got: format!("reference-time {}", limit.reference_time().value()),
        });
    }
    let vacuum = vacuum_covariance(p, ReferenceTime::PlusOne);
    let inner = limit.clone();
    Ok(FormFamily::new(ReferenceTime::PlusOne, move |eps| {
        Ok(inner.eval(eps)? - vacuum.eval(eps)?)
    }))
}

/// Weighted suprema of a remainder over a spectral grid:
/// entry N of the result is sup over the nodes of ⟨ε⟩^N ‖r(ε)‖ with
/// ⟨ε⟩ = √(1 + ε²), for N = 0, …, n_max.
pub fn smoothing_report(remainder: &FormFamily, n_max: usize, eps_nodes: &[f64]) -> Result<Vec<f64>> {
    if eps_nodes.is_empty() {
        return Err(Error::invalid("eps_nodes", "need at least one grid node"));
    }
    let mut sups = vec![0.0f64; n_max + 1];
    for &eps in eps_nodes {
        let norm = remainder.eval(eps)?.op_norm();
        let bracket = (1.0 + eps * eps).sqrt();
        let mut weight = 1.0;
        for sup in sups.iter_mut() {
            *sup = sup.max(weight * norm);
            weight *= bracket;
        }
    }
    Ok(sups)
}
