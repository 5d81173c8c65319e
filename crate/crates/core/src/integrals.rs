//! Weighted curvature integrals over axisymmetric surfaces, the Minkowski
//! identity, the inequalities between neighbouring mean curvatures, the
//! functional E and quermassintegrals.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hyperbolic::sphere_volume_constant;
use crate::hypersurface::{AxisymSurface, SurfaceSample};
use crate::quadrature::{GaussRule, QuadratureRule};
use crate::symfunc::binomial;

/// Relative tolerance below which a defect is reported as an equality case.
pub const EQUALITY_TOL: f64 = 1e-7;

/// One comparison lhs ≥ rhs (or lhs = rhs for identities).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Defect {
    pub lhs: f64,
    pub rhs: f64,
    pub defect: f64,
    pub relative: f64,
    pub equality_case: bool,
}

impl Defect {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Self::with_tolerance(lhs, rhs, EQUALITY_TOL)
    }

    pub fn with_tolerance(lhs: f64, rhs: f64, tol: f64) -> Self {
        let defect = lhs - rhs;
        let relative = defect / lhs.abs().max(rhs.abs()).max(1.0);
        Self { lhs, rhs, defect, relative, equality_case: relative.abs() < tol }
    }

    /// max(|lhs|, |rhs|, 1).
    pub fn scale(&self) -> f64 {
        self.lhs.abs().max(self.rhs.abs()).max(1.0)
    }
}

/// Weight multiplying p_k in [`weighted_integral`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    One,
    V,
    U,
    V2,
    UV,
    U2,
    InvV,
    UOverV,
}

impl Weight {
    pub fn eval(self, s: &SurfaceSample) -> f64 {
        match self {
            Weight::One => 1.0,
            Weight::V => s.v,
            Weight::U => s.u,
            Weight::V2 => s.v * s.v,
            Weight::UV => s.u * s.v,
            Weight::U2 => s.u * s.u,
            Weight::InvV => 1.0 / s.v,
            Weight::UOverV => s.u / s.v,
        }
    }
}

/// Samples of a surface at the nodes of a rule, with their measure dμ.
#[derive(Debug, Clone)]
pub struct SurfaceMeasure {
    n: usize,
    samples: Vec<SurfaceSample>,
    dmu: Vec<f64>,
}

impl SurfaceMeasure {
    pub fn new(surface: &AxisymSurface, rule: &QuadratureRule) -> Result<Self> {
        if rule.dim() != surface.dim() {
            return invalid(format!("rule built for n = {}, surface has n = {}", rule.dim(), surface.dim()));
        }
        let samples: Vec<SurfaceSample> = rule.nodes().iter().map(|&t| surface.sample(t)).collect();
        let dmu = samples.iter().zip(rule.weights()).map(|(s, w)| w * s.area_density).collect();
        Ok(Self { n: surface.dim(), samples, dmu })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn samples(&self) -> &[SurfaceSample] {
        &self.samples
    }

    /// ∫ f dμ, summed in node order.
    pub fn integrate(&self, f: impl Fn(&SurfaceSample) -> f64) -> f64 {
        self.samples.iter().zip(&self.dmu).map(|(s, w)| w * f(s)).sum()
    }

    pub fn area(&self) -> f64 {
        self.dmu.iter().sum()
    }

    /// ∫ weight · p_k dμ; zero for k ≥ n.
    pub fn weighted(&self, k: usize, weight: Weight) -> f64 {
        self.integrate(|s| weight.eval(s) * s.p_k(k))
    }

    /// ∫ σ_k dμ.
    pub fn sigma_integral(&self, k: usize) -> f64 {
        self.integrate(|s| s.sigma(k))
    }

    pub fn kappa_min(&self) -> f64 {
        self.samples.iter().map(SurfaceSample::kappa_min).fold(f64::INFINITY, f64::min)
    }

    /// E = ∫(V p_{k+1} − V p_{k−1} − p_{k+1}/V) dμ.
    pub fn e_functional(&self, k: usize) -> f64 {
        self.integrate(|s| s.v * s.p_k(k + 1) - s.v * s.p_k(k - 1) - s.p_k(k + 1) / s.v)
    }
}

pub fn surface_integral(surface: &AxisymSurface, f: impl Fn(&SurfaceSample) -> f64, rule: &QuadratureRule) -> Result<f64> {
    Ok(SurfaceMeasure::new(surface, rule)?.integrate(f))
}

/// ∫ σ_k dμ.
pub fn curvature_integral(surface: &AxisymSurface, k: usize, rule: &QuadratureRule) -> Result<f64> {
    check_k(surface, k, surface.dim() - 1)?;
    Ok(SurfaceMeasure::new(surface, rule)?.sigma_integral(k))
}

/// ∫ weight · p_k dμ.
pub fn weighted_integral(surface: &AxisymSurface, k: usize, weight: Weight, rule: &QuadratureRule) -> Result<f64> {
    check_k(surface, k, surface.dim() - 1)?;
    Ok(SurfaceMeasure::new(surface, rule)?.weighted(k, weight))
}

fn check_k(surface: &AxisymSurface, k: usize, max: usize) -> Result<()> {
    if k > max {
        return invalid(format!("order k = {k} exceeds {max} for n = {}", surface.dim()));
    }
    Ok(())
}

/// ∫u p_{k+1} against ∫V p_k.
pub fn minkowski_residual(surface: &AxisymSurface, k: usize, rule: &QuadratureRule) -> Result<Defect> {
    check_k(surface, k, surface.dim() - 2)?;
    let m = SurfaceMeasure::new(surface, rule)?;
    Ok(minkowski_from(&m, k))
}

pub fn minkowski_from(m: &SurfaceMeasure, k: usize) -> Defect {
    Defect::new(m.weighted(k + 1, Weight::U), m.weighted(k, Weight::V))
}

/// Inequalities between integrals of neighbouring normalized mean curvatures on
/// convex surfaces, each with equality exactly on centered spheres.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Proposition {
    /// ∫uV p_k ≥ ∫V² p_{k−1}, 1 ≤ k ≤ n−1.
    Eq2,
    /// ∫u² p_k ≥ ∫uV p_{k−1}, 1 ≤ k ≤ n−1.
    Eq4,
    /// ∫V² p_{k+1} ≥ ∫V² p_{k−1} + ∫p_{k+1}, 1 ≤ k ≤ n−2.
    Eq1Prop1k,
    /// ∫uV p_{k+1} ≥ ∫uV p_{k−1} + ∫(u/V) p_{k+1}, 1 ≤ k ≤ n−2.
    Eq2Prop1k,
    /// ∫p_k ≥ ∫(u/V) p_{k+1}, 0 ≤ k ≤ n−2.
    Eq2k,
    /// ∫σ_k > C(n−1,k)|Σ| for k > 1; reported, never asserted.
    GallegoSolanes,
}

impl Proposition {
    pub const ASSERTED: [Proposition; 5] = [Proposition::Eq2, Proposition::Eq4, Proposition::Eq1Prop1k, Proposition::Eq2Prop1k, Proposition::Eq2k];

    pub fn name(self) -> &'static str {
        match self {
            Proposition::Eq2 => "eq2",
            Proposition::Eq4 => "eq4",
            Proposition::Eq1Prop1k => "eq1_prop1k",
            Proposition::Eq2Prop1k => "eq2_prop1k",
            Proposition::Eq2k => "eq2k",
            Proposition::GallegoSolanes => "gallego_solanes",
        }
    }

    pub fn asserted(self) -> bool {
        self != Proposition::GallegoSolanes
    }

    /// Admissible k for ambient dimension n.
    pub fn k_range(self, n: usize) -> std::ops::RangeInclusive<usize> {
        match self {
            Proposition::Eq2 | Proposition::Eq4 => 1..=n - 1,
            Proposition::Eq1Prop1k | Proposition::Eq2Prop1k => 1..=n - 2,
            Proposition::Eq2k => 0..=n - 2,
            Proposition::GallegoSolanes => 2..=n - 1,
        }
    }
}

pub fn proposition_defect(surface: &AxisymSurface, k: usize, which: Proposition, rule: &QuadratureRule) -> Result<Defect> {
    let m = SurfaceMeasure::new(surface, rule)?;
    proposition_from(&m, k, which)
}

pub fn proposition_from(m: &SurfaceMeasure, k: usize, which: Proposition) -> Result<Defect> {
    let n = m.dim();
    if !which.k_range(n).contains(&k) {
        return invalid(format!("{} is stated for k in {:?}, got {k}", which.name(), which.k_range(n)));
    }
    if !(m.kappa_min() > 0.0) {
        return Err(Error::Hypothesis(format!("{} needs a convex surface", which.name())));
    }
    use Weight::*;
    let d = match which {
        Proposition::Eq2 => Defect::new(m.weighted(k, UV), m.weighted(k - 1, V2)),
        Proposition::Eq4 => Defect::new(m.weighted(k, U2), m.weighted(k - 1, UV)),
        Proposition::Eq1Prop1k => Defect::new(m.weighted(k + 1, V2), m.weighted(k - 1, V2) + m.weighted(k + 1, One)),
        Proposition::Eq2Prop1k => Defect::new(m.weighted(k + 1, UV), m.weighted(k - 1, UV) + m.weighted(k + 1, UOverV)),
        Proposition::Eq2k => Defect::new(m.weighted(k, One), m.weighted(k + 1, UOverV)),
        Proposition::GallegoSolanes => Defect::new(m.sigma_integral(k), binomial(n - 1, k) * m.area()),
    };
    Ok(d)
}

/// E = ∫(V p_{k+1} − V p_{k−1} − p_{k+1}/V) dμ for 1 ≤ k < n − 1.
pub fn e_functional(surface: &AxisymSurface, k: usize, rule: &QuadratureRule) -> Result<f64> {
    let n = surface.dim();
    if k == 0 || k + 1 >= n {
        return invalid(format!("E is defined for 1 <= k < n - 1, got k = {k}, n = {n}"));
    }
    Ok(SurfaceMeasure::new(surface, rule)?.e_functional(k))
}

const VOLUME_NODES: usize = 64;

/// Enclosed volume ω_{n−2} ∫∫ sinh^{n−1}s sin^{n−2}θ ds dθ.
pub fn enclosed_volume(surface: &AxisymSurface, rule: &QuadratureRule) -> Result<f64> {
    if rule.dim() != surface.dim() {
        return invalid("rule and surface dimensions differ");
    }
    let n = surface.dim();
    let inner = GaussRule::legendre(VOLUME_NODES, 0.0, 1.0)?;
    let omega = sphere_volume_constant(n - 1);
    Ok(omega
        * rule.integrate(|t| {
            let r = surface.profile().jet(t).0;
            r * inner.integrate(|x| (r * x).sinh().powi(n as i32 - 1))
        }))
}

/// W_0, …, W_n, built upward from the volume and area by the two-term recursion
/// ∫p_k = n(W_{k+1} + k W_{k−1}/(n−k+1)). The last entry is the value of W_n produced
/// by the recursion, which should reproduce the convention ω_{n−1}/n.
pub fn quermassintegrals(surface: &AxisymSurface, rule: &QuadratureRule) -> Result<Vec<f64>> {
    let n = surface.dim();
    let m = SurfaceMeasure::new(surface, rule)?;
    let nf = n as f64;
    let mut w = vec![0.0; n + 1];
    w[0] = enclosed_volume(surface, rule)?;
    w[1] = m.area() / nf;
    for k in 1..n {
        w[k + 1] = m.weighted(k, Weight::One) / nf - k as f64 / (nf - k as f64 + 1.0) * w[k - 1];
    }
    Ok(w)
}

/// W_k; W_n is returned as the convention constant ω_{n−1}/n.
pub fn quermassintegral(surface: &AxisymSurface, k: usize, rule: &QuadratureRule) -> Result<f64> {
    let n = surface.dim();
    if k > n {
        return invalid(format!("quermassintegral index {k} exceeds n = {n}"));
    }
    if k == n {
        return Ok(sphere_volume_constant(n) / n as f64);
    }
    Ok(quermassintegrals(surface, rule)?[k])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::DEFAULT_NODES;

    fn rule(n: usize) -> QuadratureRule {
        QuadratureRule::new(n, DEFAULT_NODES).unwrap()
    }

    #[test]
    fn defect_record() {
        let d = Defect::new(3.0, 1.0);
        assert_eq!(d.defect, 2.0);
        assert!((d.relative - 2.0 / 3.0).abs() < 1e-15);
        assert!(!d.equality_case);
        assert!(Defect::new(0.5, 0.5 + 1e-9).equality_case);
    }

    #[test]
    fn sphere_area_and_curvature() {
        let s = AxisymSurface::centered_sphere(3, 1.0).unwrap();
        let q = rule(3);
        let area = surface_integral(&s, |_| 1.0, &q).unwrap();
        let exact = 4.0 * std::f64::consts::PI * 1f64.sinh().powi(2);
        assert!((area - exact).abs() < 1e-12 * exact);
        assert!((area - 17.36).abs() < 0.01);
        let h = curvature_integral(&s, 1, &q).unwrap();
        assert!((h - 2.0 / 1f64.tanh() * exact).abs() < 1e-12 * h);
        assert!((h - 45.58).abs() < 0.01);
        assert!(surface_integral(&s, |x| x.theta.cos(), &q).unwrap().abs() < 1e-13);
        let big = AxisymSurface::centered_sphere(3, 1.5).unwrap();
        assert!(curvature_integral(&big, 1, &q).unwrap() > h);
    }

    #[test]
    fn weighted_sphere_closed_form() {
        let (n, r0) = (5usize, 0.8f64);
        let s = AxisymSurface::centered_sphere(n, r0).unwrap();
        let q = rule(n);
        let area = sphere_volume_constant(n) * r0.sinh().powi(n as i32 - 1);
        for k in 0..n {
            let got = weighted_integral(&s, k, Weight::V, &q).unwrap();
            let expect = r0.cosh() * (1.0 / r0.tanh()).powi(k as i32) * area;
            assert!((got - expect).abs() < 1e-12 * expect);
        }
        for k in 0..n - 1 {
            assert!(minkowski_residual(&s, k, &q).unwrap().relative.abs() < 1e-12);
        }
    }

    #[test]
    fn e_vanishes_on_spheres_and_is_positive_off_center() {
        for r0 in [0.4, 1.0, 2.0] {
            let s = AxisymSurface::centered_sphere(5, r0).unwrap();
            for k in 1..3 {
                assert!(e_functional(&s, k, &rule(5)).unwrap().abs() < 1e-10);
            }
        }
        let off = AxisymSurface::offset_sphere(5, 1.0, 0.3).unwrap();
        assert!(e_functional(&off, 1, &rule(5)).unwrap() > 0.0);
        assert!(e_functional(&off, 0, &rule(5)).is_err());
        assert!(e_functional(&off, 4, &rule(5)).is_err());
    }

    #[test]
    fn proposition_signs() {
        let q = rule(5);
        let c = AxisymSurface::centered_sphere(5, 1.0).unwrap();
        let o = AxisymSurface::offset_sphere(5, 1.0, 0.4).unwrap();
        for p in Proposition::ASSERTED {
            for k in p.k_range(5) {
                let dc = proposition_defect(&c, k, p, &q).unwrap();
                assert!(dc.defect.abs() < 1e-10 * dc.scale(), "{} {k}", p.name());
                let d = proposition_defect(&o, k, p, &q).unwrap();
                assert!(d.defect > 0.0, "{} {k}: {}", p.name(), d.defect);
            }
        }
        assert!(proposition_defect(&c, 0, Proposition::Eq2, &q).is_err());
    }

    #[test]
    fn ball_volume_and_quermassintegrals() {
        let (n, r0) = (4usize, 1.0f64);
        let s = AxisymSurface::centered_sphere(n, r0).unwrap();
        let q = rule(n);
        // vol of a geodesic ball in H^4: ω_3 ∫_0^r sinh^3 = ω_3 (cosh^3/3 − cosh + 2/3)
        let c = r0.cosh();
        let vol = sphere_volume_constant(n) * (c.powi(3) / 3.0 - c + 2.0 / 3.0);
        assert!((enclosed_volume(&s, &q).unwrap() - vol).abs() < 1e-12 * vol);
        let w = quermassintegrals(&s, &q).unwrap();
        assert!((w[1] - sphere_volume_constant(n) * r0.sinh().powi(3) / 4.0).abs() < 1e-12);
        assert!((w[n] - sphere_volume_constant(n) / n as f64).abs() < 1e-10);
        assert_eq!(quermassintegral(&s, n, &q).unwrap(), sphere_volume_constant(n) / n as f64);
        assert!(quermassintegral(&s, n + 1, &q).is_err());
    }
}
