//! Spectral discretization and weak-limit measurements.
//!
//! Pointwise in ε the pulled-back covariance U_T(−1,1)†·λ₋₁·U_T(−1,1) does
//! not converge as T → ∞: its off-diagonal entries oscillate with unit
//! amplitude. Convergence holds only weakly, against smooth compactly
//! supported functions of the spectral parameter, and this module supplies
//! the three ingredients of that measurement:
//!
//! * [`ModeGrid`] — composite Gauss–Legendre nodes on [δ, R] with the
//!   spectral density ε^p folded into the weights (p = 2 models a flat
//!   three-dimensional spatial slice, p = 0 a single mode continuum);
//! * [`TestFunction`] — a two-component smearing vector f = (f₀, f₁) acting
//!   on Cauchy data, by default a C² bump supported in [0.5, 4];
//! * [`smear`] — the discretized pairing ⟨f, A f⟩ = Σ_k w_k f(ε_k)†A(ε_k)f(ε_k).
//!
//! [`weak_limit_error`] then reports |⟨f, (pull-back − closed-form limit) f⟩|.
//! Because the integrand oscillates with phase ≈ 2Tε, the quadrature must
//! resolve it: the sampling rule n ≥ 4TR/π is enforced and undersampled
//! requests are refused rather than silently aliased.
//!
//! Per-mode evaluations are embarrassingly parallel; the reduction over
//! nodes uses a fixed pairwise summation tree, so every reported number is
//! reproducible bit for bit regardless of thread count.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Error;
use crate::mat2::{c64, Mat2};
use crate::mode::Mode;
use crate::profile::MassProfile;
use crate::propagators::{evolve_exact, IntegratorConfig};
use crate::quad::{composite_panel_degrees, gauss_legendre_on, pairwise_sum};
use crate::states::{adiabatic_limit_closed_form, CovarianceFamily, ReferenceTime};
use crate::Result;

/// Largest admissible spectral-density exponent.
///
/// Keeps ε^p inside the polynomial-exactness range of the smallest composite
/// panel, so grid weights always reproduce ∫ε^p dε to rounding.
pub const MAX_MEASURE_POWER: u32 = 16;

/// A quadrature discretization of the spectral interval [δ, R] with density
/// ε^{measure_power}.
#[derive(Debug, Clone)]
pub struct ModeGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    delta: f64,
    r: f64,
    measure_power: u32,
}

impl ModeGrid {
    /// Quadrature nodes, strictly increasing inside (δ, R).
    #[inline]
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights including the density factor ε^p; all positive.
    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Infrared cutoff δ.
    #[inline]
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Ultraviolet cutoff R.
    #[inline]
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Density exponent p.
    #[inline]
    pub fn measure_power(&self) -> u32 {
        self.measure_power
    }

    /// Number of nodes.
    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }
}

/// Builds a composite Gauss–Legendre grid on [δ, R] with exactly `n_nodes`
/// nodes and weights w_k = (GL weight)·ε_k^{measure_power}.
pub fn build_grid(delta: f64, r: f64, n_nodes: usize, measure_power: u32) -> Result<ModeGrid> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::invalid(
            "delta",
            format!("infrared cutoff must be finite and positive, got {delta}"),
        ));
    }
    if !r.is_finite() || r <= delta {
        return Err(Error::invalid(
            "R",
            format!("ultraviolet cutoff must be finite and exceed δ = {delta}, got {r}"),
        ));
    }
    if n_nodes < 16 {
        return Err(Error::invalid(
            "n_nodes",
            format!("need at least 16 nodes, got {n_nodes}"),
        ));
    }
    if measure_power > MAX_MEASURE_POWER {
        return Err(Error::invalid(
            "measure_power",
            format!("density exponent must be ≤ {MAX_MEASURE_POWER}, got {measure_power}"),
        ));
    }
    let degrees = composite_panel_degrees(n_nodes);
    let n_panels = degrees.len();
    let width = (r - delta) / n_panels as f64;
    let mut nodes = Vec::with_capacity(n_nodes);
    let mut weights = Vec::with_capacity(n_nodes);
    for (k, &deg) in degrees.iter().enumerate() {
        let a = delta + k as f64 * width;
        let b = if k + 1 == n_panels { r } else { a + width };
        let (xs, ws) = gauss_legendre_on(deg, a, b)?;
        for (x, w) in xs.into_iter().zip(ws) {
            nodes.push(x);
            weights.push(w * x.powi(measure_power as i32));
        }
    }
    Ok(ModeGrid {
        nodes,
        weights,
        delta,
        r,
        measure_power,
    })
}

type ComponentFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// A two-component smearing vector f = (f₀, f₁) over the spectral parameter,
/// supported in [δ′, R′].
#[derive(Clone)]
pub struct TestFunction {
    f0: ComponentFn,
    f1: ComponentFn,
    support: (f64, f64),
    smoothness_class: u32,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("support", &self.support)
            .field("smoothness_class", &self.smoothness_class)
            .finish()
    }
}

impl TestFunction {
    /// Wraps component closures; evaluation clamps both components to zero
    /// outside the declared support.
    pub fn new(
        f0: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        f1: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        support: (f64, f64),
        smoothness_class: u32,
    ) -> Result<Self> {
        let (lo, hi) = support;
        if !lo.is_finite() || !hi.is_finite() || lo <= 0.0 || hi <= lo {
            return Err(Error::invalid(
                "support",
                format!("need 0 < δ′ < R′ finite, got [{lo}, {hi}]"),
            ));
        }
        Ok(TestFunction {
            f0: Arc::new(f0),
            f1: Arc::new(f1),
            support,
            smoothness_class,
        })
    }

    /// The C² bump f₀(ε) = ((ε − δ′)(R′ − ε))²/((R′ − δ′)/2)⁴, f₁ = 0,
    /// normalized to peak value 1 at the midpoint.
    pub fn c2_bump(lo: f64, hi: f64) -> Result<Self> {
        let norm = ((hi - lo) / 2.0).powi(4);
        TestFunction::new(
            move |eps: f64| {
                let v = (eps - lo) * (hi - eps);
                c64(v * v / norm, 0.0)
            },
            |_| Complex64::ZERO,
            (lo, hi),
            2,
        )
    }

    /// The default bump on [0.5, 4].
    pub fn default_bump() -> Self {
        TestFunction::c2_bump(0.5, 4.0).expect("static bounds are valid")
    }

    /// Support interval [δ′, R′].
    #[inline]
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Smoothness class (number of continuous derivatives).
    #[inline]
    pub fn smoothness_class(&self) -> u32 {
        self.smoothness_class
    }

    /// Evaluates (f₀(ε), f₁(ε)), zero outside the support.
    pub fn eval(&self, eps: f64) -> (Complex64, Complex64) {
        if eps < self.support.0 || eps > self.support.1 {
            (Complex64::ZERO, Complex64::ZERO)
        } else {
            ((self.f0)(eps), (self.f1)(eps))
        }
    }
}

/// The discretized pairing ⟨f, A f⟩ = Σ_k w_k · f(ε_k)† A(ε_k) f(ε_k).
///
/// Sesquilinear in f, linear in A, and conjugate-symmetric: pointwise
/// Hermitian A gives a real value up to rounding. Requires the support of f
/// to lie inside the grid range. Node terms are evaluated in parallel and
/// reduced by a fixed pairwise tree, so the value is thread-count
/// independent.
pub fn smear<A>(a: A, f: &TestFunction, g: &ModeGrid) -> Result<Complex64>
where
    A: Fn(f64) -> Result<Mat2> + Sync,
{
    let (lo, hi) = f.support();
    if lo < g.delta() || hi > g.r() {
        return Err(Error::invalid(
            "support",
            format!(
                "test-function support [{lo}, {hi}] must lie inside the grid range [{}, {}]",
                g.delta(),
                g.r()
            ),
        ));
    }
    let terms: Vec<Complex64> = g
        .nodes
        .par_iter()
        .zip(g.weights.par_iter())
        .map(|(&eps, &w)| -> Result<Complex64> {
            let m = a(eps)?;
            let v = f.eval(eps);
            let mv = m.apply(v);
            Ok(w * (v.0.conj() * mv.0 + v.1.conj() * mv.1))
        })
        .collect::<Result<Vec<_>>>()?;
    let re: Vec<f64> = terms.iter().map(|z| z.re).collect();
    let im: Vec<f64> = terms.iter().map(|z| z.im).collect();
    Ok(c64(pairwise_sum(&re), pairwise_sum(&im)))
}

/// The covariance at t = +1 obtained by propagating an incoming covariance
/// through the finite-T dynamics: λ₁(ε) = U_T(−1,1)†·λ₋₁(ε)·U_T(−1,1).
///
/// Every evaluation integrates the mode equation across the window, so the
/// result is exact up to integrator residual; the state kind is kept as
/// lineage and the reference time moves to +1.
pub fn pull_back_covariance(
    lambda_minus: &CovarianceFamily,
    p: &MassProfile,
    t_scale: f64,
    cfg: &IntegratorConfig,
) -> Result<CovarianceFamily> {
    if lambda_minus.reference_time() != ReferenceTime::MinusOne {
        return Err(Error::StateKindMismatch {
            expected: "reference-time −1",
            got: format!("reference-time {}", lambda_minus.reference_time().value()),
        });
    }
    cfg.validate()?;
    let family = lambda_minus.clone();
    let p = p.clone();
    let cfg = cfg.clone();
    Ok(CovarianceFamily::new_unchecked(
        lambda_minus.kind().clone(),
        ReferenceTime::PlusOne,
        move |eps| {
            let mode = Mode::new(eps)?;
            let run = evolve_exact(&mode, &p, t_scale, -1.0, 1.0, &cfg)?;
            Ok(family.eval(eps)?.congruence(&run.u))
        },
    ))
}

/// Minimum node count resolving the oscillation at slow-time scale T on a
/// grid reaching up to R: n ≥ 4TR/π.
pub fn required_nodes(t_scale: f64, r: f64) -> usize {
    (4.0 * t_scale * r / PI).ceil() as usize
}

/// The smeared distance |⟨f, (λ₁^T − λ₁^ad) f⟩| between the finite-T
/// pull-back and the closed-form adiabatic limit of an incoming covariance.
///
/// Refuses grids that undersample the phase (the rule n ≥ 4TR/π), since an
/// aliased quadrature can fake convergence.
pub fn weak_limit_error(
    lambda_minus: &CovarianceFamily,
    p: &MassProfile,
    t_scale: f64,
    f: &TestFunction,
    g: &ModeGrid,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let required = required_nodes(t_scale, g.r());
    if g.n_nodes() < required {
        return Err(Error::GridTooCoarse {
            n_nodes: g.n_nodes(),
            required,
            t_scale,
        });
    }
    let pullback = pull_back_covariance(lambda_minus, p, t_scale, cfg)?;
    let limit = adiabatic_limit_closed_form(lambda_minus, p)?;
    let gap = smear(
        |eps| Ok((pullback.eval(eps)? - limit.eval(eps)?).to_mat()),
        f,
        g,
    )?;
    Ok(gap.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat2::HermForm2;
    use crate::mode::charge_form;
    use crate::profile::MonotonicityCase;
    use crate::quad::MAX_PANEL_DEGREE;
    use crate::states::{kms_covariance, vacuum_covariance, StateKind};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn indicator(support: (f64, f64)) -> TestFunction {
        TestFunction::new(|_| c64(1.0, 0.0), |_| Complex64::ZERO, support, 0).unwrap()
    }

    #[test]
    fn grid_weights_integrate_unity() {
        let g = build_grid(1.0, 2.0, 32, 0).unwrap();
        assert_eq!(g.n_nodes(), 32);
        assert_relative_eq!(pairwise_sum(g.weights()), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn grid_weights_integrate_the_density() {
        let g = build_grid(1.0, 2.0, 32, 2).unwrap();
        assert_relative_eq!(pairwise_sum(g.weights()), 7.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn grid_resolves_an_oscillatory_integral() {
        // ∫_1^4 sin(10ε)·ε² dε against the antiderivative
        // F(x) = −x²cos(10x)/10 + x·sin(10x)/50 + cos(10x)/500.
        let g = build_grid(1.0, 4.0, 128, 2).unwrap();
        let quad: f64 = pairwise_sum(
            &g.nodes()
                .iter()
                .zip(g.weights())
                .map(|(&x, &w)| w * (10.0 * x).sin())
                .collect::<Vec<_>>(),
        );
        let anti = |x: f64| {
            -x * x * (10.0 * x).cos() / 10.0 + x * (10.0 * x).sin() / 50.0 + (10.0 * x).cos() / 500.0
        };
        assert_relative_eq!(quad, anti(4.0) - anti(1.0), epsilon = 1e-10);
    }

    #[test]
    fn grid_nodes_are_interior_sorted_and_weighted_positively() {
        let g = build_grid(0.5, 4.0, 100, 2).unwrap();
        assert_eq!(g.n_nodes(), 100);
        for pair in g.nodes().windows(2) {
            assert!(pair[0] < pair[1]);
        }
        assert!(g.nodes().iter().all(|&x| x > 0.5 && x < 4.0));
        assert!(g.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn grid_validates_its_parameters() {
        assert!(build_grid(2.0, 1.0, 32, 0).is_err());
        assert!(build_grid(0.0, 1.0, 32, 0).is_err());
        assert!(build_grid(-0.5, 1.0, 32, 0).is_err());
        assert!(build_grid(1.0, 2.0, 15, 0).is_err());
        assert!(build_grid(1.0, 2.0, 32, MAX_MEASURE_POWER + 1).is_err());
        assert!(build_grid(1.0, f64::INFINITY, 32, 0).is_err());
    }

    #[test]
    fn grid_spans_many_panels_when_large() {
        let g = build_grid(0.5, 4.0, 1304, 2).unwrap();
        assert_eq!(g.n_nodes(), 1304);
        assert!(composite_panel_degrees(1304).iter().all(|&d| d <= MAX_PANEL_DEGREE));
        // Still a valid discretization of ∫ε²dε.
        let exact = (4.0f64.powi(3) - 0.5f64.powi(3)) / 3.0;
        assert_relative_eq!(pairwise_sum(g.weights()), exact, max_relative = 1e-13);
    }

    #[test]
    fn smear_of_identity_is_the_measure_mass() {
        let g = build_grid(1.0, 2.0, 32, 0).unwrap();
        let f = indicator((1.0, 2.0));
        let value = smear(|_| Ok(Mat2::identity()), &f, &g).unwrap();
        assert_relative_eq!(value.re, 1.0, epsilon = 1e-14);
        assert!(value.im.abs() < 1e-15);
    }

    #[test]
    fn smear_against_the_charge_form() {
        let g = build_grid(1.0, 2.0, 32, 0).unwrap();
        let f = TestFunction::new(
            |_| c64(1.0, 0.0),
            |_| c64(1.0, 0.0),
            (1.0, 2.0),
            0,
        )
        .unwrap();
        let q = charge_form().to_mat();
        let value = smear(|_| Ok(q), &f, &g).unwrap();
        assert_relative_eq!(value.re, 2.0, epsilon = 1e-13);
        assert!(value.im.abs() < 1e-14);
    }

    #[test]
    fn smear_of_the_massless_vacuum_row() {
        // λ(ε) = ½[[ε, 1], [1, 1/ε]] with f = (1, 0): ⟨f, λf⟩ = ½∫_1^2 ε dε.
        let g = build_grid(1.0, 2.0, 32, 0).unwrap();
        let f = indicator((1.0, 2.0));
        let value = smear(
            |eps| Ok(HermForm2::new(0.5 * eps, c64(0.5, 0.0), 0.5 / eps).to_mat()),
            &f,
            &g,
        )
        .unwrap();
        assert_relative_eq!(value.re, 0.75, epsilon = 1e-13);
    }

    #[test]
    fn smear_requires_support_inside_the_grid() {
        let g = build_grid(1.0, 2.0, 32, 0).unwrap();
        let f = TestFunction::default_bump(); // support [0.5, 4]
        assert!(smear(|_| Ok(Mat2::identity()), &f, &g).is_err());
    }

    #[test]
    fn test_function_vanishes_outside_its_support() {
        let f = TestFunction::default_bump();
        assert_eq!(f.eval(0.4).0, Complex64::ZERO);
        assert_eq!(f.eval(4.1).0, Complex64::ZERO);
        assert_relative_eq!(f.eval(2.25).0.re, 1.0, epsilon = 1e-14);
        assert!(f.eval(1.0).0.re > 0.0);
        assert_eq!(f.eval(1.0).1, Complex64::ZERO);
    }

    #[test]
    fn test_function_validates_support() {
        assert!(TestFunction::c2_bump(2.0, 1.0).is_err());
        assert!(TestFunction::c2_bump(0.0, 1.0).is_err());
        assert!(TestFunction::c2_bump(-1.0, 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        /// smear is linear in A and picks up |z|² under f ↦ z·f; Hermitian
        /// integrands pair to conjugate-symmetric values.
        #[test]
        fn smear_is_sesquilinear(
            entries in proptest::array::uniform8(-2.0f64..2.0),
            z_re in -2.0f64..2.0,
            z_im in -2.0f64..2.0,
        ) {
            let g = build_grid(1.0, 2.0, 16, 1).unwrap();
            let m1 = Mat2::new(
                c64(entries[0], entries[1]),
                c64(entries[2], entries[3]),
                c64(entries[4], entries[5]),
                c64(entries[6], entries[7]),
            );
            let m2 = Mat2::new(
                c64(entries[3], -entries[6]),
                c64(entries[1], entries[0]),
                c64(entries[7], entries[4]),
                c64(entries[5], -entries[2]),
            );
            let f = TestFunction::new(
                |e| c64(e, 0.5),
                |e| c64(0.3, -e),
                (1.0, 2.0),
                0,
            ).unwrap();
            let z = c64(z_re, z_im);

            let s1 = smear(|_| Ok(m1), &f, &g).unwrap();
            let s2 = smear(|_| Ok(m2), &f, &g).unwrap();
            let lin = smear(|_| Ok(z * m1 + m2), &f, &g).unwrap();
            prop_assert!((lin - (z * s1 + s2)).norm() < 1e-12);

            let zf = TestFunction::new(
                move |e| z * c64(e, 0.5),
                move |e| z * c64(0.3, -e),
                (1.0, 2.0),
                0,
            ).unwrap();
            let scaled = smear(|_| Ok(m1), &zf, &g).unwrap();
            prop_assert!((scaled - z.norm_sqr() * s1).norm() < 1e-12);

            let adj = smear(|_| Ok(m1.adjoint()), &f, &g).unwrap();
            prop_assert!((adj - s1.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_mass_pull_back_fixes_the_vacuum() {
        let p = MassProfile::constant(1.0).unwrap();
        let vac = vacuum_covariance(&p, ReferenceTime::MinusOne);
        let cfg = IntegratorConfig::default();
        let pulled = pull_back_covariance(&vac, &p, 8.0, &cfg).unwrap();
        assert_eq!(pulled.reference_time(), ReferenceTime::PlusOne);
        assert!(matches!(pulled.kind(), StateKind::Vacuum));
        let vac_out = vacuum_covariance(&p, ReferenceTime::PlusOne);
        for eps in [0.5, 1.3, 4.0] {
            let gap = (pulled.eval(eps).unwrap() - vac_out.eval(eps).unwrap()).op_norm();
            assert!(gap < 1e-9, "vacuum moved by {gap:e} at ε = {eps}");
        }
    }

    #[test]
    fn pull_back_preserves_positivity() {
        let p = MassProfile::smoothstep(MonotonicityCase::A, 1.0, 2.0).unwrap();
        let kms = kms_covariance(&p, 1.0, ReferenceTime::MinusOne).unwrap();
        let cfg = IntegratorConfig::default().with_rel_tol(1e-9);
        let pulled = pull_back_covariance(&kms, &p, 4.0, &cfg).unwrap();
        for eps in [0.5, 1.0, 2.5, 4.0] {
            let lambda = pulled.eval(eps).unwrap();
            let tol = 1e-7 * (1.0 + lambda.op_norm());
            assert!(lambda.is_positive_semidefinite(tol));
            assert!((lambda - charge_form()).is_positive_semidefinite(tol));
        }
    }

    #[test]
    fn pull_back_requires_an_incoming_family() {
        let p = MassProfile::constant(1.0).unwrap();
        let vac_out = vacuum_covariance(&p, ReferenceTime::PlusOne);
        assert!(matches!(
            pull_back_covariance(&vac_out, &p, 8.0, &IntegratorConfig::default()),
            Err(Error::StateKindMismatch { .. })
        ));
    }

    #[test]
    fn weak_limit_error_vanishes_for_constant_mass() {
        let p = MassProfile::constant(1.0).unwrap();
        let vac = vacuum_covariance(&p, ReferenceTime::MinusOne);
        let t_scale = 8.0;
        let g = build_grid(0.5, 4.0, required_nodes(t_scale, 4.0).max(16), 2).unwrap();
        let f = TestFunction::default_bump();
        let err = weak_limit_error(&vac, &p, t_scale, &f, &g, &IntegratorConfig::default()).unwrap();
        assert!(err < 1e-7, "constant-mass error {err:e} should be pure residual");
    }

    #[test]
    fn weak_limit_error_enforces_the_sampling_rule() {
        let p = MassProfile::constant(1.0).unwrap();
        let vac = vacuum_covariance(&p, ReferenceTime::MinusOne);
        let g = build_grid(0.5, 4.0, 48, 2).unwrap();
        let f = TestFunction::default_bump();
        let out = weak_limit_error(&vac, &p, 64.0, &f, &g, &IntegratorConfig::default());
        assert!(matches!(out, Err(Error::GridTooCoarse { required, .. }) if required > 48));
    }

    #[test]
    fn weak_limit_error_decreases_with_the_drive_time() {
        let p = MassProfile::smoothstep(MonotonicityCase::A, 1.0, 2.0).unwrap();
        let cfg = IntegratorConfig::default().with_rel_tol(1e-9);
        let f = TestFunction::default_bump();
        let g = build_grid(0.5, 4.0, required_nodes(16.0, 4.0), 2).unwrap();

        let vac = vacuum_covariance(&p, ReferenceTime::MinusOne);
        let slow = weak_limit_error(&vac, &p, 16.0, &f, &g, &cfg).unwrap();
        let fast = weak_limit_error(&vac, &p, 4.0, &f, &g, &cfg).unwrap();
        assert!(
            slow < fast,
            "vacuum weak-limit error should shrink: {fast:e} at T = 4 vs {slow:e} at T = 16"
        );

        let kms = kms_covariance(&p, 1.0, ReferenceTime::MinusOne).unwrap();
        let slow = weak_limit_error(&kms, &p, 16.0, &f, &g, &cfg).unwrap();
        let fast = weak_limit_error(&kms, &p, 4.0, &f, &g, &cfg).unwrap();
        assert!(
            slow < fast,
            "KMS weak-limit error should shrink: {fast:e} at T = 4 vs {slow:e} at T = 16"
        );
    }
}
