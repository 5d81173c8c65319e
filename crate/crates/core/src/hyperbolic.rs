//! Polar and hyperboloid models of H^n, the static potential V = cosh r, and a
//! finite-difference embedding oracle for hypersurface geometry.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{domain, invalid, Result};

/// Point of H^n in geodesic polar coordinates about the base point.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarPoint {
    s: f64,
    direction: Vec<f64>,
}

impl PolarPoint {
    pub fn new(s: f64, direction: Vec<f64>) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return invalid(format!("geodesic distance must be finite and nonnegative, got {s}"));
        }
        if direction.len() < 2 {
            return invalid("direction needs at least two components");
        }
        let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return invalid("direction must be a unit vector");
        }
        Ok(Self { s, direction })
    }

    /// Point at distance `s` along the direction with polar angle `theta` in the
    /// (e_1, e_2) plane.
    pub fn axisymmetric(n: usize, s: f64, theta: f64) -> Result<Self> {
        if n < 2 {
            return invalid("dimension must be at least 2");
        }
        let mut d = vec![0.0; n];
        d[0] = theta.cos();
        d[1] = theta.sin();
        Self::new(s, d)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn dim(&self) -> usize {
        self.direction.len()
    }

    /// Polar angle from the first axis.
    pub fn theta(&self) -> f64 {
        self.direction[0].clamp(-1.0, 1.0).acos()
    }
}

/// Point on the upper sheet ⟨x,x⟩ = −1 of Minkowski space R^{n,1}.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperboloidPoint {
    x: Vec<f64>,
}

impl HyperboloidPoint {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.len() < 3 {
            return invalid("hyperboloid points need at least three coordinates");
        }
        let q = minkowski_dot(&x, &x);
        if (q + 1.0).abs() > 1e-10 * x[0].abs().max(1.0).powi(2) || !(x[0] > 0.0) {
            return invalid("point is not on the upper hyperboloid sheet");
        }
        Ok(Self { x })
    }

    pub fn coords(&self) -> &[f64] {
        &self.x
    }
}

/// ⟨a,b⟩ = −a⁰b⁰ + Σ aⁱbⁱ.
pub fn minkowski_dot(a: &[f64], b: &[f64]) -> f64 {
    -a[0] * b[0] + a[1..].iter().zip(&b[1..]).map(|(p, q)| p * q).sum::<f64>()
}

pub fn to_hyperboloid(p: &PolarPoint) -> HyperboloidPoint {
    let mut x = Vec::with_capacity(p.dim() + 1);
    x.push(p.s.cosh());
    x.extend(p.direction.iter().map(|d| p.s.sinh() * d));
    HyperboloidPoint { x }
}

/// Inverse of [`to_hyperboloid`]; the base point gets direction e_1.
pub fn from_hyperboloid(q: &HyperboloidPoint) -> PolarPoint {
    let spatial = &q.x[1..];
    let norm = spatial.iter().map(|v| v * v).sum::<f64>().sqrt();
    let s = norm.asinh();
    let direction = if norm > 0.0 {
        spatial.iter().map(|v| v / norm).collect()
    } else {
        let mut d = vec![0.0; spatial.len()];
        d[0] = 1.0;
        d
    };
    PolarPoint { s, direction }
}

/// Geodesic distance arccosh(−⟨a,b⟩).
pub fn distance(a: &HyperboloidPoint, b: &HyperboloidPoint) -> f64 {
    (-minkowski_dot(&a.x, &b.x)).max(1.0).acosh()
}

/// V = cosh s.
pub fn potential_v(s: f64) -> f64 {
    s.cosh()
}

pub fn rho_of_r(r: f64) -> f64 {
    r.sinh()
}

pub fn r_of_rho(rho: f64) -> f64 {
    rho.asinh()
}

/// ω_{n−1}, the volume of the unit (n−1)-sphere.
pub fn sphere_volume_constant(n: usize) -> f64 {
    // ω_0 = 2, ω_1 = 2π, ω_d = 2π ω_{d−2} / (d − 1)
    let d = n.saturating_sub(1);
    let mut w = if d % 2 == 0 { 2.0 } else { 2.0 * std::f64::consts::PI };
    let mut j = if d % 2 == 0 { 0 } else { 1 };
    while j < d {
        j += 2;
        w *= 2.0 * std::f64::consts::PI / (j as f64 - 1.0);
    }
    w
}

/// Point at arclength `s` along the geodesic through `x` with unit tangent `v`.
pub fn geodesic(x: &[f64], v: &[f64], s: f64) -> Vec<f64> {
    x.iter().zip(v).map(|(a, b)| a * s.cosh() + b * s.sinh()).collect()
}

/// Second-difference estimate of Hess V(u, w) at `x` along geodesics, by polarization.
/// `u` and `w` are orthonormal tangent vectors at `x`.
pub fn hessian_v_fd(x: &HyperboloidPoint, u: &[f64], w: &[f64], h: f64) -> f64 {
    let second = |dir: &[f64]| {
        let norm = minkowski_dot(dir, dir).max(0.0).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let unit: Vec<f64> = dir.iter().map(|d| d / norm).collect();
        let f = |t: f64| geodesic(&x.x, &unit, t)[0];
        norm * norm * (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h)
    };
    let plus: Vec<f64> = u.iter().zip(w).map(|(a, b)| a + b).collect();
    let minus: Vec<f64> = u.iter().zip(w).map(|(a, b)| a - b).collect();
    0.25 * (second(&plus) - second(&minus))
}

/// Extrinsic geometry of a hypersurface measured by finite differences of an
/// embedding into the hyperboloid.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleGeometry {
    /// Principal curvatures (outward normal), ascending.
    pub principal: Vec<f64>,
    /// Unit outward normal in Minkowski coordinates.
    pub normal: Vec<f64>,
    /// Support function ⟨∇̄V, ν⟩.
    pub support: f64,
    /// √det of the induced metric in the chart parameters.
    pub area_density: f64,
}

const D1: [(f64, f64); 4] = [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];
const D2: [(f64, f64); 5] = [(-2.0, -1.0 / 12.0), (-1.0, 16.0 / 12.0), (0.0, -30.0 / 12.0), (1.0, 16.0 / 12.0), (2.0, -1.0 / 12.0)];

/// Fourth-order finite-difference geometry of a chart `p ↦ X(p)` of a hypersurface in
/// H^n ⊂ R^{n,1}, at parameters `p` with step `h`. The normal is oriented so that the
/// support function is positive (outward for star-shaped surfaces).
pub fn embedding_oracle<F>(chart: F, p: &[f64], h: f64) -> Result<OracleGeometry>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let d = p.len();
    let x0 = chart(p);
    if x0.len() != d + 2 {
        return invalid("chart must map n−1 parameters into R^{n,1}");
    }
    let shifted = |steps: &[(usize, f64)]| {
        let mut q = p.to_vec();
        for &(i, s) in steps {
            q[i] += s * h;
        }
        chart(&q)
    };
    let dim = d + 2;
    let mut first = vec![vec![0.0; dim]; d];
    for (i, row) in first.iter_mut().enumerate() {
        for &(s, c) in &D1 {
            let y = shifted(&[(i, s)]);
            row.iter_mut().zip(&y).for_each(|(a, b)| *a += c * b / h);
        }
    }
    let mut second = vec![vec![vec![0.0; dim]; d]; d];
    for i in 0..d {
        for j in 0..d {
            let mut acc = vec![0.0; dim];
            if i == j {
                for &(s, c) in &D2 {
                    let y = shifted(&[(i, s)]);
                    acc.iter_mut().zip(&y).for_each(|(a, b)| *a += c * b / (h * h));
                }
            } else {
                for &(s, c) in &D1 {
                    for &(t, e) in &D1 {
                        let y = shifted(&[(i, s), (j, t)]);
                        acc.iter_mut().zip(&y).for_each(|(a, b)| *a += c * e * b / (h * h));
                    }
                }
            }
            second[i][j] = acc;
        }
    }
    // normal: generalized cross product of ηX, ηX_1, …, ηX_d
    let eta = |v: &[f64]| {
        let mut w = v.to_vec();
        w[0] = -w[0];
        w
    };
    let mut rows = vec![eta(&x0)];
    rows.extend(first.iter().map(|v| eta(v)));
    let mat = DMatrix::from_fn(dim - 1, dim, |r, c| rows[r][c]);
    let mut normal = vec![0.0; dim];
    for (a, slot) in normal.iter_mut().enumerate() {
        let minor = mat.clone().remove_column(a);
        let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
        *slot = sign * minor.determinant();
    }
    let q = minkowski_dot(&normal, &normal);
    if !(q > 0.0) {
        return domain("degenerate chart: no spacelike normal");
    }
    let scale = q.sqrt();
    normal.iter_mut().for_each(|v| *v /= scale);
    if normal[0] < 0.0 {
        normal.iter_mut().for_each(|v| *v = -*v);
    }
    let g = DMatrix::from_fn(d, d, |i, j| minkowski_dot(&first[i], &first[j]));
    let hmat = DMatrix::from_fn(d, d, |i, j| -0.5 * (minkowski_dot(&second[i][j], &normal) + minkowski_dot(&second[j][i], &normal)));
    let Some(chol) = g.clone().cholesky() else {
        return domain("degenerate chart: induced metric not positive");
    };
    let l = chol.l();
    let Some(l_inv) = l.clone().try_inverse() else {
        return domain("degenerate chart");
    };
    let sym = &l_inv * hmat * l_inv.transpose();
    let sym = (&sym + sym.transpose()) * 0.5;
    let mut principal: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    principal.sort_by(f64::total_cmp);
    Ok(OracleGeometry {
        principal,
        support: normal[0],
        normal,
        area_density: g.determinant().sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_values() {
        assert_eq!(potential_v(0.0), 1.0);
        assert!((potential_v(1.0) - 1.5430806348152437).abs() < 1e-15);
        for s in [0.1, 0.7, 2.3] {
            let v = potential_v(s);
            assert!((v * v - 1.0 - s.sinh().powi(2)).abs() < 1e-12 * v * v);
        }
    }

    #[test]
    fn rho_r_conversion() {
        assert_eq!(rho_of_r(0.0), 0.0);
        assert_eq!(r_of_rho(0.0), 0.0);
        assert!((rho_of_r(1.0) - 1.1752011936438014).abs() < 1e-15);
        for r in [0.2, 1.0, 3.5] {
            assert!((r_of_rho(rho_of_r(r)) - r).abs() < 1e-14);
            // dρ²/(1+ρ²) pulled back along r: (cosh r)² / (1 + sinh² r) = 1
            let rho = rho_of_r(r);
            let drho_dr = r.cosh();
            assert!((drho_dr * drho_dr / (1.0 + rho * rho) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sphere_constants() {
        use std::f64::consts::PI;
        assert!((sphere_volume_constant(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_volume_constant(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_volume_constant(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_volume_constant(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn polar_round_trip() {
        let p = PolarPoint::new(1.3, vec![0.6, 0.0, 0.8]).unwrap();
        let q = to_hyperboloid(&p);
        assert!((minkowski_dot(q.coords(), q.coords()) + 1.0).abs() < 1e-12);
        let back = from_hyperboloid(&q);
        assert!((back.s() - 1.3).abs() < 1e-12);
        assert!(back.direction().iter().zip(p.direction()).all(|(a, b)| (a - b).abs() < 1e-12));
        let origin = to_hyperboloid(&PolarPoint::axisymmetric(3, 0.0, 0.4).unwrap());
        assert_eq!(origin.coords(), &[1.0, 0.0, 0.0, 0.0]);
        assert!((distance(&origin, &q) - 1.3).abs() < 1e-12);
        assert!(PolarPoint::new(-1.0, vec![1.0, 0.0]).is_err());
        assert!(PolarPoint::new(1.0, vec![1.0, 1.0]).is_err());
        assert!(HyperboloidPoint::new(vec![1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn hessian_of_v_is_conformal() {
        let p = to_hyperboloid(&PolarPoint::new(0.9, vec![0.0, 0.6, 0.8]).unwrap());
        let x = p.coords();
        // orthonormal tangent frame at x by Gram-Schmidt against x
        let mut frame: Vec<Vec<f64>> = Vec::new();
        for e in 1..4 {
            let mut v = vec![0.0; 4];
            v[e] = 1.0;
            let c = minkowski_dot(&v, x);
            v.iter_mut().zip(x).for_each(|(a, b)| *a += c * b);
            for f in &frame {
                let c = minkowski_dot(&v, f);
                v.iter_mut().zip(f).for_each(|(a, b)| *a -= c * b);
            }
            let nrm = minkowski_dot(&v, &v).sqrt();
            v.iter_mut().for_each(|a| *a /= nrm);
            frame.push(v);
        }
        let v0 = x[0];
        for (i, u) in frame.iter().enumerate() {
            for (j, w) in frame.iter().enumerate() {
                let hv = hessian_v_fd(&p, u, w, 1e-3);
                let expect = if i == j { v0 } else { 0.0 };
                assert!((hv - expect).abs() < 1e-5, "{i}{j}: {hv}");
            }
        }
    }

    #[test]
    fn oracle_on_geodesic_sphere() {
        let r0: f64 = 0.8;
        let chart = |p: &[f64]| {
            let (t, f) = (p[0], p[1]);
            vec![r0.cosh(), r0.sinh() * t.cos(), r0.sinh() * t.sin() * f.cos(), r0.sinh() * t.sin() * f.sin()]
        };
        let geo = embedding_oracle(chart, &[1.1, 0.4], 1e-3).unwrap();
        for k in &geo.principal {
            assert!((k - 1.0 / r0.tanh()).abs() < 1e-8);
        }
        assert!((geo.support - r0.sinh()).abs() < 1e-10);
        assert!((geo.area_density - r0.sinh().powi(2) * 1.1f64.sin()).abs() < 1e-9);
    }
}
