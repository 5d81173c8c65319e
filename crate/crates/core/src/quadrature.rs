//! Gauss rules: symmetric Gauss-Jacobi on [−1, 1] and the polar-angle rule for
//! the sin^{n−2}θ measure of axisymmetric integrals on S^{n−1}.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Result};
use crate::hyperbolic::sphere_volume_constant;

/// Nodes and weights on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Gauss rule for the weight (1 − x²)^λ on [−1, 1], λ > −1, exact through degree 2N−1.
    /// `mass` must equal ∫(1 − x²)^λ dx.
    pub fn symmetric_jacobi(count: usize, lambda: f64, mass: f64) -> Result<Self> {
        if count == 0 {
            return invalid("quadrature needs at least one node");
        }
        if !(lambda > -1.0) {
            return invalid("Jacobi exponent must exceed −1");
        }
        let off = |j: usize| {
            let j = j as f64;
            (j * (j + 2.0 * lambda) / ((2.0 * j + 2.0 * lambda + 1.0) * (2.0 * j + 2.0 * lambda - 1.0))).sqrt()
        };
        let jac = DMatrix::from_fn(count, count, |i, j| if i + 1 == j { off(j) } else if j + 1 == i { off(i) } else { 0.0 });
        let mut nodes: Vec<f64> = SymmetricEigen::new(jac).eigenvalues.iter().copied().collect();
        nodes.sort_by(f64::total_cmp);
        let p0 = 1.0 / mass.sqrt();
        // orthonormal p̂_0..p̂_N and derivative of p̂_N at x
        let eval = |x: f64| {
            let (mut pm, mut p) = (0.0, p0);
            let (mut dm, mut d) = (0.0, 0.0);
            let mut sum_sq = p * p;
            for j in 0..count {
                let b_next = off(j + 1);
                let b_cur = if j == 0 { 0.0 } else { off(j) };
                let pn = (x * p - b_cur * pm) / b_next;
                let dn = (p + x * d - b_cur * dm) / b_next;
                pm = p;
                p = pn;
                dm = d;
                d = dn;
                if j + 1 < count {
                    sum_sq += p * p;
                }
            }
            (p, d, sum_sq)
        };
        for x in nodes.iter_mut() {
            for _ in 0..3 {
                let (p, d, _) = eval(*x);
                if d != 0.0 {
                    *x -= p / d;
                }
            }
        }
        let weights = nodes.iter().map(|&x| 1.0 / eval(x).2).collect();
        Ok(Self { nodes, weights })
    }

    /// Gauss-Legendre rule on [a, b].
    pub fn legendre(count: usize, a: f64, b: f64) -> Result<Self> {
        let base = Self::symmetric_jacobi(count, 0.0, 2.0)?;
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Ok(Self {
            nodes: base.nodes.iter().map(|x| mid + half * x).collect(),
            weights: base.weights.iter().map(|w| w * half).collect(),
        })
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, w)| w * f(x)).sum()
    }
}

/// Polar-angle rule: Σ w_i f(θ_i) ≈ ∫_0^π f(θ) sin^{n−2}θ dθ.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    n: usize,
    theta: Vec<f64>,
    weights: Vec<f64>,
}

pub const DEFAULT_NODES: usize = 128;

impl QuadratureRule {
    /// Gauss-Jacobi in x = cos θ with exponent (n − 3)/2, for ambient dimension `n ≥ 3`.
    pub fn new(n: usize, count: usize) -> Result<Self> {
        if n < 3 {
            return invalid("ambient dimension must be at least 3");
        }
        let lambda = (n as f64 - 3.0) / 2.0;
        let mass = sphere_volume_constant(n) / sphere_volume_constant(n - 1);
        let rule = GaussRule::symmetric_jacobi(count, lambda, mass)?;
        // descending x gives ascending θ
        let theta = rule.nodes.iter().rev().map(|x| x.clamp(-1.0, 1.0).acos()).collect();
        let weights = rule.weights.iter().rev().copied().collect();
        Ok(Self { n, theta, weights })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.theta
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Σ w_i f(θ_i).
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.theta.iter().zip(&self.weights).map(|(&t, w)| w * f(t)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn legendre_exactness() {
        let r = GaussRule::legendre(6, -1.0, 1.0).unwrap();
        for p in 0..12 {
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((r.integrate(|x| x.powi(p)) - exact).abs() < 1e-14, "degree {p}");
        }
        let r = GaussRule::legendre(20, 0.0, 2.0).unwrap();
        assert!((r.integrate(|x| x.exp()) - (2f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn polar_rule_moments() {
        // ∫_0^π cos^{2p}θ sin^{n−2}θ dθ by the Wallis-type recursion
        for n in 3..9 {
            let rule = QuadratureRule::new(n, 10).unwrap();
            let mass = sphere_volume_constant(n) / sphere_volume_constant(n - 1);
            let mut expect = mass;
            for p in 0..10 {
                let got = rule.integrate(|t| t.cos().powi(2 * p as i32));
                assert!((got - expect).abs() < 1e-13 * expect, "n={n} p={p}");
                assert!(rule.integrate(|t| t.cos().powi(2 * p as i32 + 1)).abs() < 1e-14);
                // I_{p+1} = I_p (2p+1)/(2p+n)
                expect *= (2 * p + 1) as f64 / (2 * p + n) as f64;
            }
        }
    }

    #[test]
    fn sphere_area_by_quadrature() {
        for n in 3..9 {
            let rule = QuadratureRule::new(n, 16).unwrap();
            let area = sphere_volume_constant(n - 1) * rule.integrate(|_| 1.0);
            assert!((area - sphere_volume_constant(n)).abs() < 1e-10);
        }
        assert!((sphere_volume_constant(3) - 4.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn large_rule_is_accurate() {
        let rule = QuadratureRule::new(5, DEFAULT_NODES).unwrap();
        assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(rule.weights().iter().all(|&w| w > 0.0));
        let exact = 4.0 / 3.0;
        assert!((rule.integrate(|_| 1.0) - exact).abs() < 1e-13);
        assert!(QuadratureRule::new(2, 8).is_err());
        assert!(QuadratureRule::new(4, 0).is_err());
    }
}
