//! Fixed-order composite Gauss–Legendre quadrature.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math::cos;

/// Nodes and weights of an `order`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on `P_order` from Chebyshev-like
    /// initial guesses. All nodes lie strictly inside `(-1, 1)`.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Single-panel rule on `[a, b]`.
    pub fn integrate<E>(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> Result<f64, E>) -> Result<f64, E> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x)?;
        }
        Ok(acc * half)
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule: `panels` equal sub-intervals, each integrated with the
/// same Gauss–Legendre rule. Defaults to 64 nodes and 4 panels.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature {
    rule: GaussLegendre,
    panels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature::new(64, 4)
    }
}

impl Quadrature {
    pub fn new(order: usize, panels: usize) -> Self {
        assert!(panels >= 1, "at least one panel is required");
        Quadrature {
            rule: GaussLegendre::new(order),
            panels,
        }
    }

    pub fn rule(&self) -> &GaussLegendre {
        &self.rule
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    /// Number of integrand evaluations per interval.
    pub fn evaluations(&self) -> usize {
        self.rule.order() * self.panels
    }

    pub fn integrate<E>(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> Result<f64, E>) -> Result<f64, E> {
        let h = (b - a) / self.panels as f64;
        let mut acc = 0.0;
        for p in 0..self.panels {
            let lo = a + h * p as f64;
            let hi = if p + 1 == self.panels { b } else { lo + h };
            acc += self.rule.integrate(lo, hi, &mut f)?;
        }
        Ok(acc)
    }
}
