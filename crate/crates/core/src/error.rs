//! Crate-wide error type.
//!
//! Every fallible operation in this crate returns [`crate::Result`], and all
//! failure modes funnel into the single [`enum@Error`] below so that callers
//! (most prominently the CLI) can match on structured variants instead of
//! scraping messages. Variants carry the offending values; messages render
//! them with enough context to be actionable from a terminal.

use thiserror::Error;

/// Errors produced by mode construction, integration, state evaluation,
/// smearing, and the experiment harness.
#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    /// A plain argument failed validation (wrong sign, wrong range, NaN, …).
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        /// Name of the offending argument or config key.
        name: &'static str,
        /// Human-readable constraint that was violated.
        reason: String,
    },

    /// A time argument left the driving window.
    #[error("time {t} lies outside the driving window [{min}, {max}]")]
    TimeOutOfRange {
        /// Offending time.
        t: f64,
        /// Lower end of the admissible window.
        min: f64,
        /// Upper end of the admissible window.
        max: f64,
    },

    /// The squared dispersion ε² + m²(t) lost strict positivity (or finiteness).
    #[error("degenerate dispersion at t = {t}: ε² + m²(t) = {value:e} must be positive and finite")]
    DegenerateDispersion {
        /// Time at which the dispersion degenerated.
        t: f64,
        /// The offending value of ε² + m²(t).
        value: f64,
    },

    /// A mass profile violated the invariant of its declared monotonicity class.
    #[error("mass profile violates its class invariant: {reason}")]
    ProfileInvariant {
        /// Description of the violated invariant, with sample values.
        reason: String,
    },

    /// The adaptive integrator ran out of its step budget.
    #[error(
        "step limit exceeded: {max_steps} steps spent at t = {reached} while integrating to {target} \
         ({accepted} accepted, {rejected} rejected)"
    )]
    StepLimitExceeded {
        /// Effective step budget for this call.
        max_steps: usize,
        /// Time reached when the budget ran out.
        reached: f64,
        /// Requested end time.
        target: f64,
        /// Accepted steps so far.
        accepted: usize,
        /// Rejected trial steps so far.
        rejected: usize,
    },

    /// Error control drove the step size below the resolvable scale.
    #[error("tolerance not achievable: step size {h:e} underflowed at t = {t}")]
    ToleranceNotAchievable {
        /// Time at which the controller stalled.
        t: f64,
        /// The underflowed step size.
        h: f64,
    },

    /// A 2×2 matrix inversion hit a (numerically) vanishing determinant.
    #[error("singular 2x2 matrix: |det| = {det_abs:e}")]
    SingularMatrix {
        /// Modulus of the determinant.
        det_abs: f64,
    },

    /// A computation produced NaN or infinity.
    #[error("non-finite value produced in {context}")]
    NonFinite {
        /// Where the non-finite value first appeared.
        context: String,
    },

    /// A covariance form lost positive semi-definiteness.
    #[error("covariance positivity violated at ε = {eps}: min eigenvalue {min_eigenvalue:e}")]
    PositivityViolation {
        /// Spectral parameter at which the form was evaluated.
        eps: f64,
        /// The offending smallest eigenvalue.
        min_eigenvalue: f64,
    },

    /// An operation required a covariance family of a different kind.
    #[error("state kind mismatch: expected a {expected} family, got {got}")]
    StateKindMismatch {
        /// Kind the operation requires.
        expected: &'static str,
        /// Kind that was supplied.
        got: String,
    },

    /// arcoth(x) evaluated outside its domain |x| > 1.
    #[error("arcoth argument {value} outside its domain (1, ∞)")]
    ArcothDomain {
        /// The offending argument.
        value: f64,
    },

    /// A spectral grid undersamples the oscillation at the requested slow-time scale.
    #[error(
        "spectral grid too coarse for T = {t_scale}: {n_nodes} nodes < {required} required by the \
         sampling rule n ≥ 4TR/π"
    )]
    GridTooCoarse {
        /// Nodes in the offending grid.
        n_nodes: usize,
        /// Minimum admissible node count at this T.
        required: usize,
        /// Slow-time scale for which the grid was to be used.
        t_scale: f64,
    },

    /// Writing a report artifact (JSON/CSV) failed.
    #[error("report serialization failed: {reason}")]
    ReportSerialization {
        /// Underlying serializer/formatter message.
        reason: String,
    },
}

impl Error {
    /// Shorthand used throughout the crate for argument validation.
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
