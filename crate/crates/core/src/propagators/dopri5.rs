//! Embedded Dormand–Prince RK5(4) for matrix linear ODEs ∂_τ U = A(τ)·U.
//!
//! The right-hand side is linear in the state and the state is a complex 2×2
//! matrix (8 real components), so the integrator below is a lean
//! specialization of the classic DOPRI5 scheme: seven stages, first-same-as-
//! last, fifth-order propagation with an embedded fourth-order error
//! estimate, and the standard PI step-size controller (error exponent
//! 1/5 − 0.75β with β = 0.04, safety 0.9, growth clamped to [0.2, 10]).
//!
//! One deliberate deviation from textbook usage: the controller targets an
//! internal tolerance [`SAFETY_SCALE`] × (requested tolerance). Per-step error
//! control lets local errors accumulate coherently over long oscillatory
//! integrations — for phase Φ = T·∫ε_τ dτ the accumulated drift is of order
//! Φ × local tolerance — and the propagator runs reach Φ ≈ 2·10³ rad. The
//! fixed two-decades margin keeps the delivered global accuracy at the
//! requested tolerance across the whole supported range T ≤ ~10³ at a cost of
//! ≈ 2.5× in steps, and keeps reported tolerances honest: callers reason in
//! terms of the tolerance they asked for.

use crate::error::Error;
use crate::mat2::Mat2;
use crate::Result;

/// Internal tolerance head-room factor (see module docs).
pub(crate) const SAFETY_SCALE: f64 = 1e-2;

/// Dormand–Prince stage nodes c₂…c₇.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

/// Dormand–Prince coupling coefficients aᵢⱼ (strictly lower triangular part).
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Fifth-order propagation weights b₁…b₇ (b₇ = 0; row 7 of A equals b, FSAL).
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

/// Error-estimate weights e = b⁽⁵⁾ − b⁽⁴⁾, including the FSAL stage.
const E: [f64; 7] = [
    71.0 / 57_600.0,
    0.0,
    -71.0 / 16_695.0,
    71.0 / 1_920.0,
    -17_253.0 / 339_200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// PI controller constants (Hairer–Nørsett–Wanner defaults for DOPRI5).
const SAFE: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FACC1: f64 = 5.0; // reciprocal of the max shrink factor 0.2
const FACC2: f64 = 0.1; // reciprocal of the max growth factor 10

/// Integration report: final state plus step statistics.
pub(crate) struct OdeRun {
    pub state: Mat2,
    pub accepted: usize,
    pub rejected: usize,
}

/// Views a complex 2×2 matrix as its 8 real components (for error norms).
#[inline]
fn components(m: &Mat2) -> [f64; 8] {
    [
        m.a11.re, m.a11.im, m.a12.re, m.a12.im, m.a21.re, m.a21.im, m.a22.re, m.a22.im,
    ]
}

/// Integrates ∂_τ U = A(τ)·U from `t0` to `t1` starting at `y0`.
///
/// `rel_tol`/`abs_tol` are the caller-facing tolerances (scaled internally by
/// [`SAFETY_SCALE`]); `max_steps` bounds accepted + rejected steps;
/// `initial_step` of 0 requests an automatic choice.
pub(crate) fn integrate<F>(
    rhs: F,
    y0: Mat2,
    t0: f64,
    t1: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_steps: usize,
    initial_step: f64,
) -> Result<OdeRun>
where
    F: Fn(f64) -> Result<Mat2>,
{
    debug_assert!(t0 != t1);
    let posneg = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let rtol = rel_tol * SAFETY_SCALE;
    let atol = abs_tol * SAFETY_SCALE;

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t)? * y;

    // Initial step: an explicit request wins; otherwise aim for a phase step
    // of 10⁻² radians as measured by the local generator norm.
    let mut h = if initial_step > 0.0 {
        posneg * initial_step.min(span)
    } else {
        let gen_norm = rhs(t)?.op_norm().max(1e-8);
        posneg * (1e-2 / gen_norm).min(span)
    };

    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut facold: f64 = 1e-4;
    let mut last_was_rejected = false;

    loop {
        if accepted + rejected >= max_steps {
            return Err(Error::StepLimitExceeded {
                max_steps,
                reached: t,
                target: t1,
                accepted,
                rejected,
            });
        }
        if h.abs() < 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::ToleranceNotAchievable { t, h });
        }
        // Trim the final step to land exactly on t1.
        let mut last = false;
        if (t + 1.01 * h - t1) * posneg > 0.0 {
            h = t1 - t;
            last = true;
        }

        // Stages 2…6.
        let mut k = [Mat2::zero(); 7];
        k[0] = k1;
        for i in 1..6 {
            let mut yi = y;
            for (j, &aij) in A[i - 1].iter().enumerate().take(i) {
                if aij != 0.0 {
                    yi = yi + (h * aij) * k[j];
                }
            }
            k[i] = rhs(t + C[i] * h)? * yi;
        }
        // Fifth-order solution (stage 7 input).
        let mut y5 = y;
        for (j, &bj) in B.iter().enumerate().take(6) {
            if bj != 0.0 {
                y5 = y5 + (h * bj) * k[j];
            }
        }
        // FSAL stage.
        k[6] = rhs(t + h)? * y5;

        // Embedded error estimate.
        let mut err_mat = Mat2::zero();
        for (j, &ej) in E.iter().enumerate() {
            if ej != 0.0 {
                err_mat = err_mat + (h * ej) * k[j];
            }
        }
        let yc = components(&y);
        let y5c = components(&y5);
        let ec = components(&err_mat);
        let mut err_sq = 0.0;
        for i in 0..8 {
            let sk = atol + rtol * yc[i].abs().max(y5c[i].abs());
            let r = ec[i] / sk;
            err_sq += r * r;
        }
        let err = (err_sq / 8.0).sqrt();
        if !err.is_finite() || !y5.is_finite() {
            return Err(Error::NonFinite {
                context: format!("RK5(4) step at t = {t}, h = {h}"),
            });
        }

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            // Accepted. The PI factor mixes this step's error with the
            // previous accepted one (facold) before facold is updated.
            let fac = (fac11 / facold.powf(BETA) / SAFE).clamp(FACC2, FACC1);
            accepted += 1;
            facold = err.max(1e-4);
            t += h;
            y = y5;
            k1 = k[6];
            if last {
                return Ok(OdeRun {
                    state: y,
                    accepted,
                    rejected,
                });
            }
            let mut h_new = h / fac;
            if last_was_rejected {
                // Avoid growth immediately after a rejection.
                h_new = posneg * h_new.abs().min(h.abs());
            }
            h = h_new;
            last_was_rejected = false;
        } else {
            // Rejected: shrink and retry.
            rejected += 1;
            h /= (fac11 / SAFE).min(FACC1);
            last_was_rejected = true;
        }
    }
}
