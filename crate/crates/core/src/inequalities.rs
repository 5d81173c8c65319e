//! Defect checkers for the Alexandrov-Fenchel type inequalities in H^n, weighted
//! and unweighted, and for the Penrose inequality of a graph mass.
//!
//! Inequalities are checked, never enforced: each report records which hypotheses
//! the surface satisfies, and a negative defect only counts as a failure when the
//! inequality is asserted and its hypotheses hold.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::hyperbolic::sphere_volume_constant;
use crate::hypersurface::{AxisymSurface, SurfaceSample};
use crate::integrals::{Defect, SurfaceMeasure, Weight};
use crate::quadrature::QuadratureRule;
use crate::rotmass::penrose_rhs;
use crate::symfunc::binomial;

/// Slack on κ_min ≥ 1 for the horospherical convexity flag.
pub const HORO_TOL: f64 = 1e-9;

/// Hypotheses satisfied by the surface, measured at the quadrature nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisFlags {
    pub horospherical: bool,
    pub convex: bool,
    pub star_shaped: bool,
}

impl HypothesisFlags {
    pub fn of(m: &SurfaceMeasure) -> Self {
        let kmin = m.kappa_min();
        let umin = m.samples().iter().map(|s| s.u).fold(f64::INFINITY, f64::min);
        Self { horospherical: kmin >= 1.0 - HORO_TOL, convex: kmin > 0.0, star_shaped: umin > 0.0 }
    }

    /// Every flag set; used where the hypothesis is not a property of a surface.
    pub fn all() -> Self {
        Self { horospherical: true, convex: true, star_shaped: true }
    }

    /// `;`-separated names of the flags that are set, or `none`.
    pub fn label(&self) -> String {
        let names: Vec<&str> = [(self.horospherical, "horospherical"), (self.convex, "convex"), (self.star_shaped, "star_shaped")]
            .iter()
            .filter(|(on, _)| *on)
            .map(|(_, name)| *name)
            .collect();
        if names.is_empty() {
            "none".into()
        } else {
            names.join(";")
        }
    }
}

/// Outcome of one inequality on one surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub k: Option<usize>,
    pub defect: Defect,
    pub hypotheses: HypothesisFlags,
    /// Whether the hypotheses under which the inequality is known (or conjectured) hold.
    pub hypotheses_met: bool,
    pub asserted: bool,
}

/// Verdict of a report at a relative tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    HypothesisViolated,
    NotAsserted,
}

impl InequalityReport {
    pub fn status(&self, tol: f64) -> Status {
        if !self.asserted {
            Status::NotAsserted
        } else if !self.hypotheses_met {
            Status::HypothesisViolated
        } else if self.defect.defect < -tol * self.defect.scale() {
            Status::Fail
        } else {
            Status::Pass
        }
    }

    /// True only for an asserted inequality whose hypotheses hold and whose defect is
    /// below −tol·scale.
    pub fn fails(&self, tol: f64) -> bool {
        self.status(tol) == Status::Fail
    }
}

/// The surface inequalities in the battery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    /// ∫σ_k ≥ C(n−1,k)ω(s^{2/k} + s^{(2/k)(n−k−1)/(n−1)})^{k/2}, s = |Σ|/ω; equality on every geodesic sphere.
    AfUnweighted,
    /// ∫V p_{2k+1} ≥ ω(s^{n/((k+1)(n−1))} + s^{(n−2k−2)/((k+1)(n−1))})^{k+1}.
    AfWeightedOdd,
    /// ∫Vσ₁ ≥ (n−1)ω(s^{(n−2)/(n−1)} + s^{n/(n−1)}).
    WeightedDlg,
    /// ∫(Vσ₁ − (n−1)u) ≥ (n−1)ω^{1/(n−1)}|Σ|^{(n−2)/(n−1)}.
    MinkowskiBhw,
    /// ∫V p_{k+1} ≥ ∫(V p_{k−1} + p_{k+1}/V).
    CrucialE,
    /// ∫Vσ_{2k} ≥ C(n−1,2k)ω(t^{2/(2k+1)} + t^{2(n−2k−1)/((2k+1)n)})^{(2k+1)/2}, t = ∫u/ω.
    SupportWeighted,
    /// ∫Vσ_k ≥ C(n−1,k)ω(s^{2n/((k+1)(n−1))} + s^{2(n−k−1)/((k+1)(n−1))})^{(k+1)/2} for even k; open.
    EvenConjecture,
    /// ∫σ_k > C(n−1,k)|Σ| for k > 1; reported only.
    GallegoSolanes,
}

impl Inequality {
    pub const ALL: [Inequality; 8] = [
        Inequality::AfUnweighted,
        Inequality::AfWeightedOdd,
        Inequality::WeightedDlg,
        Inequality::MinkowskiBhw,
        Inequality::CrucialE,
        Inequality::SupportWeighted,
        Inequality::EvenConjecture,
        Inequality::GallegoSolanes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Inequality::AfUnweighted => "af_unweighted",
            Inequality::AfWeightedOdd => "af_weighted_odd",
            Inequality::WeightedDlg => "weighted_dlg",
            Inequality::MinkowskiBhw => "minkowski_bhw",
            Inequality::CrucialE => "crucial_e",
            Inequality::SupportWeighted => "support_weighted",
            Inequality::EvenConjecture => "even_conjecture",
            Inequality::GallegoSolanes => "gallego_solanes",
        }
    }

    pub fn asserted(self) -> bool {
        !matches!(self, Inequality::EvenConjecture | Inequality::GallegoSolanes)
    }

    /// Admissible orders in dimension n; `None` marks an inequality without an order.
    pub fn orders(self, n: usize) -> Vec<Option<usize>> {
        let some = |r: std::ops::RangeInclusive<usize>| r.map(Some).collect();
        match self {
            Inequality::AfUnweighted => some(1..=n - 1),
            Inequality::AfWeightedOdd => some(0..=(n - 2) / 2),
            Inequality::WeightedDlg | Inequality::MinkowskiBhw => vec![None],
            Inequality::CrucialE => some(1..=n - 2),
            Inequality::SupportWeighted => some(0..=(n - 1) / 2),
            Inequality::EvenConjecture => (0..n).step_by(2).map(Some).collect(),
            Inequality::GallegoSolanes => some(2..=n - 1),
        }
    }

    fn hypotheses_met(self, f: &HypothesisFlags, m: &SurfaceMeasure) -> bool {
        match self {
            Inequality::WeightedDlg | Inequality::MinkowskiBhw => f.star_shaped && m.samples().iter().all(|s| s.sigma(1) > 0.0),
            Inequality::GallegoSolanes => f.convex,
            _ => f.horospherical,
        }
    }

    /// Evaluate at order `k` (ignored by inequalities without an order).
    pub fn evaluate(self, m: &SurfaceMeasure, k: Option<usize>) -> Result<InequalityReport> {
        let n = m.dim();
        let orders = self.orders(n);
        let k = if orders == [None] { None } else { k };
        if !orders.contains(&k) {
            return invalid(format!("{} is not defined at k = {k:?} for n = {n}", self.name()));
        }
        let j = k.unwrap_or(0);
        let omega = sphere_volume_constant(n);
        let area = m.area();
        let s = area / omega;
        let nf = n as f64;
        let (lhs, rhs) = match self {
            Inequality::AfUnweighted => {
                let kf = j as f64;
                let rhs = binomial(n - 1, j) * omega * (s.powf(2.0 / kf) + s.powf(2.0 / kf * (nf - kf - 1.0) / (nf - 1.0))).powf(kf / 2.0);
                (m.sigma_integral(j), rhs)
            }
            Inequality::AfWeightedOdd => weighted_odd(m, j),
            Inequality::WeightedDlg => {
                // (n−1) times the order-0 weighted inequality, so the two agree exactly
                let (l, r) = weighted_odd(m, 0);
                ((nf - 1.0) * l, (nf - 1.0) * r)
            }
            Inequality::MinkowskiBhw => {
                let lhs = m.integrate(|p| p.v * p.sigma(1) - (nf - 1.0) * p.u);
                (lhs, (nf - 1.0) * omega.powf(1.0 / (nf - 1.0)) * area.powf((nf - 2.0) / (nf - 1.0)))
            }
            Inequality::CrucialE => (m.weighted(j + 1, Weight::V), m.weighted(j - 1, Weight::V) + m.weighted(j + 1, Weight::InvV)),
            Inequality::SupportWeighted => {
                let t = m.integrate(|p| p.u) / omega;
                let q = 2.0 * j as f64 + 1.0;
                let rhs = binomial(n - 1, 2 * j) * omega * (t.powf(2.0 / q) + t.powf(2.0 * (nf - q) / (q * nf))).powf(q / 2.0);
                (m.integrate(|p| p.v * p.sigma(2 * j)), rhs)
            }
            Inequality::EvenConjecture => {
                let q = j as f64 + 1.0;
                let rhs = binomial(n - 1, j) * omega * (s.powf(2.0 * nf / (q * (nf - 1.0))) + s.powf(2.0 * (nf - q) / (q * (nf - 1.0)))).powf(q / 2.0);
                (m.integrate(|p| p.v * p.sigma(j)), rhs)
            }
            Inequality::GallegoSolanes => (m.sigma_integral(j), binomial(n - 1, j) * area),
        };
        let hypotheses = HypothesisFlags::of(m);
        Ok(InequalityReport {
            name: self.name().into(),
            k,
            defect: Defect::new(lhs, rhs),
            hypotheses_met: self.hypotheses_met(&hypotheses, m),
            hypotheses,
            asserted: self.asserted(),
        })
    }
}

fn weighted_odd(m: &SurfaceMeasure, k: usize) -> (f64, f64) {
    let n = m.dim() as f64;
    let omega = sphere_volume_constant(m.dim());
    let s = m.area() / omega;
    let q = k as f64 + 1.0;
    let rhs = omega * (s.powf(n / (q * (n - 1.0))) + s.powf((n - 2.0 * q) / (q * (n - 1.0)))).powf(q);
    (m.weighted(2 * k + 1, Weight::V), rhs)
}

fn surface_report(surface: &AxisymSurface, which: Inequality, k: Option<usize>, rule: &QuadratureRule) -> Result<InequalityReport> {
    which.evaluate(&SurfaceMeasure::new(surface, rule)?, k)
}

pub fn af_unweighted(surface: &AxisymSurface, k: usize, rule: &QuadratureRule) -> Result<InequalityReport> {
    surface_report(surface, Inequality::AfUnweighted, Some(k), rule)
}

pub fn af_weighted_odd(surface: &AxisymSurface, k: usize, rule: &QuadratureRule) -> Result<InequalityReport> {
    surface_report(surface, Inequality::AfWeightedOdd, Some(k), rule)
}

pub fn weighted_dlg(surface: &AxisymSurface, rule: &QuadratureRule) -> Result<InequalityReport> {
    surface_report(surface, Inequality::WeightedDlg, None, rule)
}

pub fn minkowski_bhw(surface: &AxisymSurface, rule: &QuadratureRule) -> Result<InequalityReport> {
    surface_report(surface, Inequality::MinkowskiBhw, None, rule)
}

/// The defect is the functional E of the integrals module.
pub fn crucial_e(surface: &AxisymSurface, k: usize, rule: &QuadratureRule) -> Result<InequalityReport> {
    surface_report(surface, Inequality::CrucialE, Some(k), rule)
}

pub fn support_weighted(surface: &AxisymSurface, k: usize, rule: &QuadratureRule) -> Result<InequalityReport> {
    surface_report(surface, Inequality::SupportWeighted, Some(k), rule)
}

/// Never asserted. At k = 0 this is the missing base case ∫V ≥ ω(s^{2n/(n−1)} + s²)^{1/2}.
pub fn even_conjecture(surface: &AxisymSurface, k: usize, rule: &QuadratureRule) -> Result<InequalityReport> {
    surface_report(surface, Inequality::EvenConjecture, Some(k), rule)
}

pub fn gallego_solanes(surface: &AxisymSurface, k: usize, rule: &QuadratureRule) -> Result<InequalityReport> {
    surface_report(surface, Inequality::GallegoSolanes, Some(k), rule)
}

/// Every admissible (inequality, k) pair on one surface, in a fixed order.
pub fn battery(surface: &AxisymSurface, rule: &QuadratureRule) -> Result<Vec<InequalityReport>> {
    let m = SurfaceMeasure::new(surface, rule)?;
    let mut out = Vec::new();
    for which in Inequality::ALL {
        for k in which.orders(m.dim()) {
            out.push(which.evaluate(&m, k)?);
        }
    }
    Ok(out)
}

/// mass ≥ penrose_rhs(horizon area); the hypothesis is the sign condition L̃_k ≥ 0.
pub fn penrose_check(mass: f64, horizon_area: f64, n: usize, k: usize, energy_condition_ok: bool) -> Result<InequalityReport> {
    if !mass.is_finite() {
        return invalid("mass must be finite");
    }
    let rhs = penrose_rhs(horizon_area, n, k)?;
    Ok(InequalityReport {
        name: "penrose".into(),
        k: Some(k),
        defect: Defect::new(mass, rhs),
        hypotheses: HypothesisFlags::all(),
        hypotheses_met: energy_condition_ok,
        asserted: true,
    })
}

/// Smallest support function value at the nodes.
pub fn min_support(m: &SurfaceMeasure) -> f64 {
    m.samples().iter().map(|s: &SurfaceSample| s.u).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::DEFAULT_NODES;

    fn rule(n: usize) -> QuadratureRule {
        QuadratureRule::new(n, DEFAULT_NODES).unwrap()
    }

    fn sphere(n: usize, r0: f64) -> AxisymSurface {
        AxisymSurface::centered_sphere(n, r0).unwrap()
    }

    #[test]
    fn centered_spheres_are_equality_cases_with_closed_forms() {
        for n in 4..=7 {
            let q = rule(n);
            let omega = sphere_volume_constant(n);
            for r0 in [0.5, 1.0, 2.0] {
                let (sh, ch) = (f64::sinh(r0), f64::cosh(r0));
                let all = battery(&sphere(n, r0), &q).unwrap();
                for rep in &all {
                    assert!(rep.defect.equality_case || rep.name == "gallego_solanes", "{} {:?}", rep.name, rep.k);
                    assert!(rep.defect.relative.abs() < 1e-12 || rep.name == "gallego_solanes");
                }
                for k in 0..=(n - 2) / 2 {
                    let rep = af_weighted_odd(&sphere(n, r0), k, &q).unwrap();
                    let closed = omega * ch.powi(2 * k as i32 + 2) * sh.powi(n as i32 - 2 * k as i32 - 2);
                    assert!((rep.defect.rhs - closed).abs() < 1e-12 * closed);
                }
                let dlg = weighted_dlg(&sphere(n, r0), &q).unwrap();
                let closed = (n as f64 - 1.0) * omega * (sh.powi(n as i32 - 2) + sh.powi(n as i32));
                assert!((dlg.defect.rhs - closed).abs() < 1e-12 * closed);
                let bhw = minkowski_bhw(&sphere(n, r0), &q).unwrap();
                let closed = (n as f64 - 1.0) * omega * sh.powi(n as i32 - 2);
                assert!((bhw.defect.lhs - closed).abs() < 1e-11 * closed);
                let sup = support_weighted(&sphere(n, r0), 1, &q).unwrap();
                let closed = binomial(n - 1, 2) * omega * ch.powi(3) * sh.powi(n as i32 - 3);
                assert!((sup.defect.rhs - closed).abs() < 1e-12 * closed);
            }
        }
    }

    #[test]
    fn dlg_sanity_value_in_three_dimensions() {
        let rep = weighted_dlg(&sphere(3, 1.0), &rule(3)).unwrap();
        let expect = 2.0 * 4.0 * std::f64::consts::PI * (1f64.sinh() + 1f64.sinh().powi(3));
        assert!((rep.defect.rhs - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn dlg_is_weighted_odd_at_order_zero() {
        for n in 4..=7 {
            let s = AxisymSurface::offset_sphere(n, 1.0, 0.3).unwrap();
            let a = af_weighted_odd(&s, 0, &rule(n)).unwrap();
            let b = weighted_dlg(&s, &rule(n)).unwrap();
            assert!((b.defect.relative - a.defect.relative).abs() < 1e-14);
            assert_eq!(b.defect.defect, (n as f64 - 1.0) * a.defect.lhs - (n as f64 - 1.0) * a.defect.rhs);
        }
    }

    #[test]
    fn offset_spheres_are_strict_for_weighted_inequalities() {
        for n in 4..=7 {
            let q = rule(n);
            let s = AxisymSurface::offset_sphere(n, 1.0, 0.3).unwrap();
            for rep in battery(&s, &q).unwrap() {
                assert!(rep.hypotheses.horospherical && rep.hypotheses_met, "{}", rep.name);
                match rep.name.as_str() {
                    // invariant under isometries: every geodesic sphere is extremal
                    "af_unweighted" => assert!(rep.defect.equality_case),
                    "gallego_solanes" => assert!(rep.defect.defect > 0.0),
                    _ => assert!(rep.defect.relative > 1e-4, "{} {:?}: {}", rep.name, rep.k, rep.defect.relative),
                }
            }
        }
    }

    #[test]
    fn perturbed_spheres_satisfy_asserted_inequalities() {
        for n in 4..=7 {
            let q = rule(n);
            for (eps, mode) in [(0.05, 2), (0.03, 3), (0.02, 4)] {
                let s = AxisymSurface::perturbed_sphere(n, 1.0, eps, mode).unwrap();
                for rep in battery(&s, &q).unwrap() {
                    assert!(rep.hypotheses_met || rep.name == "gallego_solanes");
                    assert!(rep.status(1e-8) != Status::Fail, "{} {:?} on {}: {:?}", rep.name, rep.k, s.label(), rep.defect);
                    assert!(!rep.defect.equality_case, "{} {:?}", rep.name, rep.k);
                }
            }
        }
    }

    #[test]
    fn defects_shrink_as_offset_vanishes() {
        let n = 5;
        let q = rule(n);
        let run = |d: f64| battery(&AxisymSurface::offset_sphere(n, 1.0, d).unwrap(), &q).unwrap();
        let scans: Vec<Vec<InequalityReport>> = [0.4, 0.2, 0.1, 0.05].iter().map(|&d| run(d)).collect();
        for i in 0..scans[0].len() {
            // both unweighted comparisons are isometry invariant, hence constant in d
            if matches!(scans[0][i].name.as_str(), "af_unweighted" | "gallego_solanes") {
                let d: Vec<f64> = scans.iter().map(|s| s[i].defect.defect).collect();
                assert!(d.iter().all(|x| (x - d[0]).abs() < 1e-10 * scans[0][i].defect.scale()));
                continue;
            }
            let d: Vec<f64> = scans.iter().map(|s| s[i].defect.defect).collect();
            assert!(d.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0), "{} {:?}: {d:?}", scans[0][i].name, scans[0][i].k);
        }
    }

    #[test]
    fn crucial_e_matches_e_functional() {
        let s = AxisymSurface::offset_sphere(5, 1.0, 0.3).unwrap();
        let rep = crucial_e(&s, 1, &rule(5)).unwrap();
        let e = crate::integrals::e_functional(&s, 1, &rule(5)).unwrap();
        assert!((rep.defect.defect - e).abs() < 1e-12 * rep.defect.scale());
        assert!(e > 0.0);
    }

    #[test]
    fn status_semantics() {
        let s = AxisymSurface::offset_sphere(5, 1.0, 0.3).unwrap();
        let conj = even_conjecture(&s, 2, &rule(5)).unwrap();
        assert!(!conj.asserted);
        assert_eq!(conj.status(1e-8), Status::NotAsserted);
        assert!(even_conjecture(&s, 1, &rule(5)).is_err());
        assert!(af_weighted_odd(&s, 2, &rule(5)).is_err());

        let pen = penrose_check(1.0, 2.0 * std::f64::consts::PI.powi(2), 4, 1, true).unwrap();
        assert!(pen.asserted && pen.hypotheses_met);
        let gated = penrose_check(0.1, 50.0, 5, 2, false).unwrap();
        assert!(gated.defect.defect < 0.0);
        assert_eq!(gated.status(1e-8), Status::HypothesisViolated);
        assert!(!gated.fails(1e-8));
        let failing = penrose_check(0.1, 50.0, 5, 2, true).unwrap();
        assert!(failing.fails(1e-8));
        assert!(penrose_check(1.0, 0.0, 5, 2, true).is_err());
    }

    #[test]
    fn penrose_saturates_on_ads_horizons() {
        use crate::rotmass::{horizon_area, RotSymMetric};
        for &(n, k, m) in &[(5, 2, 1.0), (5, 2, 2.0)] {
            let g = RotSymMetric::ads_schwarzschild(n, k, m).unwrap();
            let rep = penrose_check(m.powi(k as i32), horizon_area(&g).unwrap(), n, k, true).unwrap();
            assert!(rep.defect.equality_case);
            assert!((rep.defect.rhs - m.powi(k as i32)).abs() < 1e-10 * rep.defect.scale());
        }
    }

    #[test]
    fn flags() {
        let m = SurfaceMeasure::new(&sphere(4, 1.0), &rule(4)).unwrap();
        let f = HypothesisFlags::of(&m);
        assert_eq!(f.label(), "horospherical;convex;star_shaped");
        assert!(min_support(&m) > 0.0);
        let bumpy = AxisymSurface::perturbed_sphere(4, 0.5, 0.2, 6).unwrap();
        let f = HypothesisFlags::of(&SurfaceMeasure::new(&bumpy, &rule(4)).unwrap());
        assert!(!f.horospherical);
        assert_eq!(HypothesisFlags { horospherical: false, convex: false, star_shaped: false }.label(), "none");
    }
}
