//! Numerical quadrature building blocks.
//!
//! The engine needs three flavors of one-dimensional integration:
//! Gauss–Legendre panels for smooth integrands, equispaced trapezoid sums for
//! periodic circle integrals (spectrally accurate there), and an adaptive
//! driver for integrands whose scale is not known in advance (Lévy-measure
//! integrals).  All rules are deterministic and allocation-light.

use crate::{AmbitError, Result};

/// Gauss–Legendre rule on the reference interval [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Build the n-point rule by Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // Chebyshev-based initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        // Newton's starting guesses enumerate roots in decreasing order.
        nodes.reverse();
        weights.reverse();
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn nodes_on<'a>(&'a self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + 'a {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    /// Integrate `f` over [a, b] with this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.nodes_on(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Integrate over consecutive panels delimited by `breaks`.
    pub fn integrate_panels<F: FnMut(f64) -> f64>(&self, breaks: &[f64], mut f: F) -> f64 {
        breaks
            .windows(2)
            .map(|ab| self.integrate(ab[0], ab[1], &mut f))
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Equispaced trapezoid (= midpoint) sum of a 2π-periodic function:
/// `(2π/n) Σ f(2πk/n)`.  Spectrally accurate for smooth periodic integrands.
pub fn trapezoid_periodic<F: FnMut(f64) -> f64>(n: usize, mut f: F) -> f64 {
    assert!(n >= 1);
    let h = std::f64::consts::TAU / n as f64;
    (0..n).map(|k| f(h * k as f64)).sum::<f64>() * h
}

/// Geometric panel breakpoints from `a` to `b` (both positive), at most
/// doubling per panel.  Used to resolve power-law integrands near zero.
pub fn geometric_breaks(a: f64, b: f64) -> Vec<f64> {
    assert!(a > 0.0 && b > a, "geometric panels need 0 < a < b");
    let mut breaks = vec![a];
    let mut x = a;
    while x < b {
        x = (x * 2.0).min(b);
        breaks.push(x);
    }
    breaks
}

/// Uniform panel breakpoints with panel length at most `max_len`.
pub fn uniform_breaks(a: f64, b: f64, max_len: f64) -> Vec<f64> {
    assert!(b >= a && max_len > 0.0);
    let n = ((b - a) / max_len).ceil().max(1.0) as usize;
    (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
}

/// Adaptive Gauss–Legendre integration by panel bisection.
///
/// Splits [a, b] until the 16-point estimate of each panel agrees with the
/// sum of its two halves within the panel's share of the tolerance.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let rule = GaussLegendre::new(16);
    fn recurse<F: Fn(f64) -> f64>(
        rule: &GaussLegendre,
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let left = rule.integrate(a, m, f);
        let right = rule.integrate(m, b, f);
        let err = (left + right - whole).abs();
        if err <= tol || (b - a) < 1e-14 * (b.abs() + a.abs() + 1.0) {
            return Ok(left + right);
        }
        if depth == 0 {
            return Err(AmbitError::Numerical(format!(
                "adaptive quadrature failed to converge on [{a}, {b}] (residual {err:.3e})"
            )));
        }
        Ok(recurse(rule, f, a, m, left, 0.5 * tol, depth - 1)?
            + recurse(rule, f, m, b, right, 0.5 * tol, depth - 1)?)
    }
    let whole = rule.integrate(a, b, f);
    recurse(&rule, f, a, b, whole, tol, 48)
}

/// One Richardson extrapolation step for a quantity with an O(h) error term:
/// given g(h) and g(h/2), returns the h → 0 limit estimate 2·g(h/2) − g(h).
pub fn richardson_linear(g_h: f64, g_half: f64) -> f64 {
    2.0 * g_half - g_h
}
