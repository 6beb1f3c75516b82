//! Gauss–Legendre quadrature and deterministic summation.
//!
//! The smeared pairings in this crate integrate smooth but highly oscillatory
//! integrands over spectral intervals, so the quadrature backbone is
//! Gauss–Legendre: nodes are roots of the Legendre polynomial Pₙ, computed by
//! Newton iteration from the Chebyshev-based initial guess
//! x⁰ⱼ = cos(π(j − ¼)/(n + ½)), with weights wⱼ = 2/((1 − xⱼ²) Pₙ′(xⱼ)²).
//! A rule of degree n integrates polynomials up to degree 2n − 1 exactly and
//! resolves e^{ikx} on [−1, 1] once n exceeds k/2 + O(k^{1/3}), which is what
//! the grid-size rule in [`crate::smearing`] is calibrated against.
//!
//! Composite rules split an interval into equal-width panels with at most
//! [`MAX_PANEL_DEGREE`] nodes each; [`composite_panel_degrees`] distributes a
//! requested total node count exactly.
//!
//! Sums of quadrature contributions use [`pairwise_sum`], a fixed-shape
//! pairwise tree: error O(log n)·ulp instead of O(n)·ulp for naive
//! accumulation, and — because the reduction order is a pure function of the
//! slice length — bit-identical results regardless of thread count upstream.

use crate::error::Error;
use crate::Result;

/// Largest Gauss–Legendre degree used for a single panel of a composite rule.
///
/// Newton-based node generation is accurate and fast far beyond this size;
/// the cap simply keeps panel-local polynomial degrees moderate so that
/// composite grids gain the usual h-refinement robustness for integrands with
/// localized features.
pub const MAX_PANEL_DEGREE: usize = 64;

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
///
/// Nodes are returned in increasing order; weights are positive and sum to 2.
/// Fails for n = 0.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::invalid("n", "Gauss-Legendre degree must be at least 1"));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Roots come in ± pairs; compute the positive half and mirror so the rule
    // is symmetric to the last bit.
    for j in 0..(n + 1) / 2 {
        // j-th root counted from the right (largest x first).
        let mut x = (std::f64::consts::PI * (j as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                // One polishing step after convergence.
                let (p2, d2) = legendre_with_derivative(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - j] = x;
        weights[n - 1 - j] = w;
        nodes[j] = -x;
        weights[j] = w;
    }
    if n % 2 == 1 {
        // The middle root of an odd-degree rule is exactly 0.
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}

/// Pₙ(x) and Pₙ′(x) by the Bonnet three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0; // P₀
    let mut p = x; // P₁
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    if n == 1 {
        return (x, 1.0);
    }
    // Pₙ′(x) = n (x Pₙ − Pₙ₋₁) / (x² − 1); nodes never reach ±1.
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Nodes and weights of the n-point rule mapped affinely to [a, b], a < b.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::invalid(
            "interval",
            format!("quadrature interval [{a}, {b}] must be finite with a < b"),
        ));
    }
    let (xs, ws) = gauss_legendre(n)?;
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let nodes = xs.iter().map(|x| mid + half * x).collect();
    let weights = ws.iter().map(|w| half * w).collect();
    Ok((nodes, weights))
}

/// ∫ₐᵗ f, evaluated with a single n-point rule; the orientation sign is
/// handled, so a > t is allowed.
pub fn integrate<F: Fn(f64) -> f64>(n: usize, a: f64, t: f64, f: F) -> Result<f64> {
    if a == t {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < t { (a, t, 1.0) } else { (t, a, -1.0) };
    let (nodes, weights) = gauss_legendre_on(n, lo, hi)?;
    let terms: Vec<f64> = nodes
        .iter()
        .zip(weights.iter())
        .map(|(&x, &w)| w * f(x))
        .collect();
    Ok(sign * pairwise_sum(&terms))
}

/// Distributes `n_nodes` over ⌈n_nodes / MAX_PANEL_DEGREE⌉ panels as evenly as
/// possible; the returned degrees sum to exactly `n_nodes`.
pub fn composite_panel_degrees(n_nodes: usize) -> Vec<usize> {
    debug_assert!(n_nodes > 0);
    let n_panels = n_nodes.div_ceil(MAX_PANEL_DEGREE);
    let base = n_nodes / n_panels;
    let rem = n_nodes % n_panels;
    (0..n_panels)
        .map(|i| if i < rem { base + 1 } else { base })
        .collect()
}

/// Pairwise (cascade) summation with a fixed reduction tree.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Reference nodes/weights for the 5-point rule (tabulated to 15 digits).
    const GL5_NODES: [f64; 5] = [
        -0.906179845938664,
        -0.538469310105683,
        0.0,
        0.538469310105683,
        0.906179845938664,
    ];
    const GL5_WEIGHTS: [f64; 5] = [
        0.236926885056189,
        0.478628670499366,
        0.568888888888889,
        0.478628670499366,
        0.236926885056189,
    ];

    #[test]
    fn five_point_rule_matches_tabulated_values() {
        let (nodes, weights) = gauss_legendre(5).unwrap();
        for i in 0..5 {
            assert_relative_eq!(nodes[i], GL5_NODES[i], epsilon = 1e-14);
            assert_relative_eq!(weights[i], GL5_WEIGHTS[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_degree_is_rejected() {
        assert!(gauss_legendre(0).is_err());
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1, 2, 3, 7, 16, 33, 64, 129] {
            let (_, weights) = gauss_legendre(n).unwrap();
            let total: f64 = pairwise_sum(&weights);
            assert_relative_eq!(total, 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn rule_is_exact_on_polynomials_up_to_degree_2n_minus_1() {
        for n in [2usize, 3, 5, 8, 13, 33] {
            let (nodes, weights) = gauss_legendre(n).unwrap();
            for k in 0..2 * n {
                let approx_val: f64 = pairwise_sum(
                    &nodes
                        .iter()
                        .zip(weights.iter())
                        .map(|(&x, &w)| w * x.powi(k as i32))
                        .collect::<Vec<_>>(),
                );
                let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
                assert!(
                    (approx_val - exact).abs() <= 1e-12,
                    "degree-{n} rule fails on x^{k}: {approx_val} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn symmetry_is_exact() {
        for n in [4usize, 9, 32, 65] {
            let (nodes, weights) = gauss_legendre(n).unwrap();
            for i in 0..n {
                assert_eq!(nodes[i], -nodes[n - 1 - i], "node symmetry broken at n={n}");
                assert_eq!(weights[i], weights[n - 1 - i], "weight symmetry broken at n={n}");
            }
        }
    }

    #[test]
    fn mapped_rule_integrates_reciprocal() {
        let (nodes, weights) = gauss_legendre_on(32, 1.0, 3.0).unwrap();
        let val = pairwise_sum(
            &nodes
                .iter()
                .zip(weights.iter())
                .map(|(&x, &w)| w / x)
                .collect::<Vec<_>>(),
        );
        assert_relative_eq!(val, 3.0f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn oscillatory_integrand_is_resolved_once_nodes_cover_the_phase() {
        // ∫₀¹ sin(40x) dx = (1 − cos 40)/40; phase 40 rad needs ≳ 25 nodes.
        let exact = (1.0 - 40.0f64.cos()) / 40.0;
        let got = integrate(64, 0.0, 1.0, |x| (40.0 * x).sin()).unwrap();
        assert_relative_eq!(got, exact, epsilon = 1e-13);
    }

    #[test]
    fn integrate_handles_orientation_and_empty_interval() {
        let forward = integrate(16, 1.0, 3.0, |x| x * x).unwrap();
        let backward = integrate(16, 3.0, 1.0, |x| x * x).unwrap();
        assert_relative_eq!(forward, 26.0 / 3.0, epsilon = 1e-13);
        assert_relative_eq!(backward, -forward, epsilon = 0.0);
        assert_eq!(integrate(16, 2.0, 2.0, |x| x).unwrap(), 0.0);
    }

    #[test]
    fn panel_degrees_sum_exactly_and_respect_the_cap() {
        for n in (16..=200).chain([333, 1000, 1304, 4096]) {
            let degrees = composite_panel_degrees(n);
            assert_eq!(degrees.iter().sum::<usize>(), n, "node count drifted at n={n}");
            assert!(degrees.iter().all(|&d| d >= 1 && d <= MAX_PANEL_DEGREE));
            assert_eq!(degrees.len(), n.div_ceil(MAX_PANEL_DEGREE));
            // Panel sizes differ by at most one node.
            let min = degrees.iter().min().unwrap();
            let max = degrees.iter().max().unwrap();
            assert!(max - min <= 1);
        }
    }

    #[test]
    fn pairwise_sum_matches_compensated_summation() {
        // Kahan summation as the independent accumulation oracle.
        fn kahan(values: &[f64]) -> f64 {
            let mut sum = 0.0;
            let mut c = 0.0;
            for &v in values {
                let y = v - c;
                let t = sum + y;
                c = (t - sum) - y;
                sum = t;
            }
            sum
        }
        // A deterministic pseudo-random sequence with wide dynamic range.
        let mut x = 0.5f64;
        let values: Vec<f64> = (0..10_000)
            .map(|i| {
                x = (4.0 * x * (1.0 - x)).abs();
                (x - 0.5) * 10.0f64.powi((i % 7) as i32 - 3)
            })
            .collect();
        let got = pairwise_sum(&values);
        let want = kahan(&values);
        assert_relative_eq!(got, want, max_relative = 1e-12, epsilon = 1e-12);
    }
}
