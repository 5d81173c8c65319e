//! Rotationally symmetric metrics dρ²/ψ(ρ) + ρ² dΘ² in the Cartesian chart
//! x = ρ·Θ, where g_ij = δ_ij + (1/ψ − 1) x_i x_j / ρ².

use nalgebra::DMatrix;

use crate::error::{domain, Result};
use crate::tensor_kernel::{MetricTensor, RiemannTensor};

/// Radial coefficient of a rotationally symmetric metric.
pub trait WarpedProfile: Sync {
    /// Manifold dimension n.
    fn dim(&self) -> usize;
    fn psi(&self, rho: f64) -> f64;
    fn dpsi(&self, rho: f64) -> f64;
    /// Lower end of the radial domain.
    fn rho_min(&self) -> f64;
    /// Sectional curvatures plus one (radial planes, tangential planes). Override when
    /// the values can be formed without cancelling against 1.
    fn modified_sectional(&self, rho: f64) -> (f64, f64) {
        (1.0 - self.dpsi(rho) / (2.0 * rho), 1.0 + (1.0 - self.psi(rho)) / (rho * rho))
    }
}

/// Hyperbolic space, ψ = 1 + ρ².
#[derive(Debug, Clone, Copy)]
pub struct Hyperbolic(pub usize);

impl WarpedProfile for Hyperbolic {
    fn dim(&self) -> usize {
        self.0
    }
    fn psi(&self, rho: f64) -> f64 {
        1.0 + rho * rho
    }
    fn dpsi(&self, rho: f64) -> f64 {
        2.0 * rho
    }
    fn rho_min(&self) -> f64 {
        0.0
    }
}

pub(crate) fn check_radius<W: WarpedProfile + ?Sized>(w: &W, rho: f64) -> Result<()> {
    if !(rho > 0.0) || !(rho > w.rho_min()) || !rho.is_finite() {
        return domain(format!("radius {rho} outside ({}, inf)", w.rho_min()));
    }
    if !(w.psi(rho) > 0.0) {
        return domain(format!("psi({rho}) is not positive"));
    }
    Ok(())
}

fn radius(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Metric components at a chart point.
pub fn chart_metric<W: WarpedProfile + ?Sized>(w: &W, x: &[f64]) -> Result<DMatrix<f64>> {
    let rho = radius(x);
    check_radius(w, rho)?;
    let c = 1.0 / w.psi(rho) - 1.0;
    let n = x.len();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { 1.0 } else { 0.0 };
        d + c * x[i] * x[j] / (rho * rho)
    }))
}

/// Sectional curvatures (radial planes, tangential planes) of the unmodified metric.
pub fn sectional_curvatures<W: WarpedProfile + ?Sized>(w: &W, rho: f64) -> (f64, f64) {
    (-w.dpsi(rho) / (2.0 * rho), (1.0 - w.psi(rho)) / (rho * rho))
}

/// Dense curvature tensor at a chart point, assembled from the two sectional values.
pub fn chart_riemann<W: WarpedProfile + ?Sized>(w: &W, x: &[f64]) -> Result<RiemannTensor> {
    let (radial, tangential) = sectional_curvatures(w, radius(x));
    two_value_tensor(w, x, radial, tangential)
}

/// Dense modified tensor R̃ at a chart point, built directly from the modified
/// sectional values.
pub fn chart_modified_riemann<W: WarpedProfile + ?Sized>(w: &W, x: &[f64]) -> Result<RiemannTensor> {
    let (radial, tangential) = w.modified_sectional(radius(x));
    two_value_tensor(w, x, radial, tangential)
}

fn two_value_tensor<W: WarpedProfile + ?Sized>(w: &W, x: &[f64], radial: f64, tangential: f64) -> Result<RiemannTensor> {
    let rho = radius(x);
    let g = MetricTensor::new(chart_metric(w, x)?)?;
    let s = 1.0 / w.psi(rho).sqrt();
    let normal: Vec<f64> = x.iter().map(|v| v / rho * s).collect();
    RiemannTensor::two_eigenvalue(g, &normal, radial, tangential)
}

const C8: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];

/// Eighth-order central first derivatives of a vector-valued map:
/// `out[d][c]` = ∂_d f_c.
pub fn fd_gradient<F>(f: F, x: &[f64], h: f64) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut out = Vec::with_capacity(x.len());
    for d in 0..x.len() {
        let mut acc: Option<Vec<f64>> = None;
        for (j, c) in C8.iter().enumerate() {
            let step = (j + 1) as f64 * h;
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[d] += step;
            xm[d] -= step;
            let fp = f(&xp)?;
            let fm = f(&xm)?;
            let a = acc.get_or_insert_with(|| vec![0.0; fp.len()]);
            for (slot, (p, m)) in a.iter_mut().zip(fp.iter().zip(&fm)) {
                *slot += c * (p - m) / h;
            }
        }
        out.push(acc.unwrap_or_default());
    }
    Ok(out)
}

/// Stencil step for chart differentiation at radius ρ.
pub fn chart_step<W: WarpedProfile + ?Sized>(w: &W, rho: f64) -> f64 {
    (0.02 * rho).min((rho - w.rho_min()) / 8.0)
}

/// Christoffel symbols `gamma[a][b][c]` = Γ^a_{bc} of a symmetric-matrix field.
pub fn christoffel_of<F>(metric: F, x: &[f64], h: f64) -> Result<Vec<Vec<Vec<f64>>>>
where
    F: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    let n = x.len();
    let g = metric(x)?;
    let Some(gi) = g.clone().try_inverse() else {
        return domain("degenerate metric");
    };
    let dg = fd_gradient(|y| metric(y).map(|m| m.as_slice().to_vec()), x, h)?;
    // column-major storage: entry (i, j) sits at i + n j
    let d = |c: usize, i: usize, j: usize| dg[c][i + n * j];
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut acc = 0.0;
                for e in 0..n {
                    acc += gi[(a, e)] * (d(b, e, c) + d(c, e, b) - d(e, b, c));
                }
                gamma[a][b][c] = 0.5 * acc;
            }
        }
    }
    Ok(gamma)
}

/// Christoffel symbols of the warped metric at a chart point.
pub fn christoffel<W: WarpedProfile + ?Sized>(w: &W, x: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
    let h = chart_step(w, radius(x));
    christoffel_of(|y| chart_metric(w, y), x, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperbolic_chart_is_constant_curvature() {
        let w = Hyperbolic(4);
        let x = [0.7, -0.3, 0.2, 0.5];
        let r = chart_riemann(&w, &x).unwrap();
        let expect = RiemannTensor::constant_curvature(r.metric().clone(), -1.0);
        let diff = r.values().iter().zip(expect.values()).fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
        assert!(diff < 1e-13);
    }

    #[test]
    fn gradient_of_polynomial() {
        let g = fd_gradient(|y| Ok(vec![y[0].powi(3) * y[1], y[1].sin()]), &[1.5, 0.4], 0.05).unwrap();
        assert!((g[0][0] - 3.0 * 2.25 * 0.4).abs() < 1e-12);
        assert!((g[1][0] - 1.5f64.powi(3)).abs() < 1e-12);
        assert!((g[1][1] - 0.4f64.cos()).abs() < 1e-12);
    }

    #[test]
    fn domain_checks() {
        let w = Hyperbolic(3);
        assert!(chart_metric(&w, &[0.0, 0.0, 0.0]).is_err());
        assert!(chart_metric(&w, &[1.0, 0.0, 0.0]).is_ok());
    }
}
