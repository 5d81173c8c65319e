//! Acceptance battery. Prints one PASS/FAIL line per criterion and exits nonzero if
//! any criterion fails.

use std::time::Instant;

use gbc_lab::flow::{self, FlowPolicy, FlowState, DEFAULT_MODES};
use gbc_lab::hypersurface::{unit_sphere_jacobian, AxisymSurface};
use gbc_lab::hyperbolic::sphere_volume_constant;
use gbc_lab::inequalities::{Inequality, InequalityReport};
use gbc_lab::integrals::{minkowski_from, proposition_from, Proposition, SurfaceMeasure, Weight};
use gbc_lab::quadrature::{QuadratureRule, DEFAULT_NODES};
use gbc_lab::rotmass::{self, RotSymMetric};
use gbc_lab::tensor_kernel::{
    divergence_residual, gauss_bonnet_lk, kulkarni_nomizu, modified_riemann, p_tensor, ricci_norm_squared, MetricTensor, RiemannTensor,
};
use gbc_lab::warped::{self, WarpedProfile};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ADS: [(usize, usize, f64); 3] = [(5, 2, 1.0), (7, 2, 1.5), (7, 3, 1.0)];
const RADII: [f64; 4] = [10.0, 20.0, 40.0, 80.0];
const ORACLE_STEP: f64 = 4e-3;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn rule(n: usize) -> QuadratureRule {
    QuadratureRule::new(n, DEFAULT_NODES).unwrap()
}

/// 3 centered, 3 offset and 3 perturbed spheres, all horospherically convex.
fn battery(n: usize) -> Vec<AxisymSurface> {
    let mut out: Vec<AxisymSurface> = [0.5, 1.0, 2.0].iter().map(|&r| AxisymSurface::centered_sphere(n, r).unwrap()).collect();
    out.extend([0.1, 0.3, 0.4].iter().map(|&d| AxisymSurface::offset_sphere(n, 1.0, d).unwrap()));
    out.extend([(0.05, 2), (0.03, 3), (0.02, 4)].iter().map(|&(e, m)| AxisymSurface::perturbed_sphere(n, 1.0, e, m).unwrap()));
    out
}

fn ads(n: usize, k: usize, m: f64) -> RotSymMetric {
    RotSymMetric::ads_schwarzschild(n, k, m).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for &(n, k, m) in &ADS {
        let est = rotmass::mass_limit(&ads(n, k, m), k, &RADII).unwrap();
        let target = m.powi(k as i32);
        worst = worst.max((est.limit - target).abs() / target);
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(worst < 1e-4 && secs < 60.0, format!("max relative error {worst:.2e}, {secs:.2} s"))
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_dense = 0.0f64;
    for &(n, k, m) in &ADS {
        let g = ads(n, k, m);
        let lo = g.rho_min();
        // 1.5ρ₀ to 100ρ₀; closer to the horizon the summands of L~k reach 1e4 and
        // their rounding alone exceeds 1e-12 (see the note printed below)
        for i in 0..50 {
            let rho = 1.5 * lo * (200.0f64 / 3.0).powf(i as f64 / 49.0);
            worst = worst.max(rotmass::tilde_lk_metric(&g, k, rho).unwrap().abs());
            let mut x = vec![0.0; n];
            x[0] = rho;
            let dense = gauss_bonnet_lk(&warped::chart_modified_riemann(&g, &x).unwrap(), k);
            worst_dense = worst_dense.max(dense.abs());
        }
    }
    Outcome::new(worst < 1e-12 && worst_dense < 1e-12, format!("max |L~k| closed form {worst:.2e}, dense contraction {worst_dense:.2e}"))
}

fn criterion_3() -> Outcome {
    let mut closed = 0.0f64;
    let mut vs_limit = 0.0f64;
    for &(n, k, m) in &ADS {
        let g = ads(n, k, m);
        let rhs = rotmass::penrose_rhs(rotmass::horizon_area(&g).unwrap(), n, k).unwrap();
        let target = m.powi(k as i32);
        closed = closed.max((rhs - target).abs() / target);
        let lim = rotmass::mass_limit(&g, k, &RADII).unwrap().limit;
        vs_limit = vs_limit.max((rhs - lim).abs() / target);
    }
    Outcome::new(closed < 1e-10 && vs_limit < 1e-4, format!("closed form {closed:.2e}, against mass limit {vs_limit:.2e}"))
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in 4..=7 {
        let q = rule(n);
        for s in battery(n) {
            let m = SurfaceMeasure::new(&s, &q).unwrap();
            for k in 0..=n - 2 {
                let d = minkowski_from(&m, k);
                worst = worst.max(d.defect.abs() / d.scale());
                count += 1;
            }
        }
    }
    Outcome::new(worst < 1e-8, format!("{count} checks, max relative residual {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let mut most_negative = 0.0f64;
    let mut centered = 0.0f64;
    let mut strict = f64::INFINITY;
    for n in 4..=7 {
        let q = rule(n);
        let mut surfaces = battery(n);
        surfaces.push(AxisymSurface::offset_sphere(n, 1.5, 0.4).unwrap());
        for s in &surfaces {
            let m = SurfaceMeasure::new(s, &q).unwrap();
            let far = s.label().contains("d=0.4");
            for which in Proposition::ASSERTED {
                for k in which.k_range(n) {
                    let d = proposition_from(&m, k, which).unwrap();
                    let rel = d.defect / d.scale();
                    most_negative = most_negative.min(rel);
                    if s.is_centered_sphere() {
                        centered = centered.max(rel.abs());
                    }
                    if far {
                        strict = strict.min(rel);
                    }
                }
            }
        }
    }
    Outcome::new(
        most_negative >= -1e-9 && centered < 1e-10 && strict > 1e-4,
        format!("min relative defect {most_negative:.2e}, centered max {centered:.2e}, offset d=0.4 min {strict:.2e}"),
    )
}

struct FlowCase {
    surface: AxisymSurface,
    k: usize,
}

struct FlowSummary {
    label: String,
    e_increase: f64,
    e_min: f64,
    kappa: f64,
    shrink: f64,
    extinction: Option<f64>,
}

fn flow_summary(case: &FlowCase) -> Result<FlowSummary, String> {
    let policy = FlowPolicy::default();
    let s = &case.surface;
    let label = format!("{} n={} k={}", s.label(), s.dim(), case.k);
    let q = rule(s.dim());
    let m0 = SurfaceMeasure::new(s, &q).unwrap();
    // E is a difference of integrals of this size
    let scale = m0.weighted(case.k + 1, Weight::V).abs().max(1.0);
    let trace = flow::run(s, case.k, 10.0, &policy).map_err(|e| format!("{label}: {e}"))?;
    let e0 = trace.rows[0].e;
    let e_end = trace.rows.last().unwrap().e;
    let e_min = trace.rows.iter().map(|r| r.e).fold(f64::INFINITY, f64::min);
    // for centered spheres E vanishes identically, so the shrink ratio is replaced by |E_end|/scale
    let shrink = if s.is_centered_sphere() { e_end.abs() / scale * 1e6 } else { e_end / e0 };
    let extinction = s.is_centered_sphere().then(|| {
        let r0 = s.profile().jet(0.0).0;
        (trace.extinction_estimate() - r0.sinh().atan()).abs()
    });
    Ok(FlowSummary { label, e_increase: trace.max_e_increase() / scale, e_min: e_min / scale, kappa: trace.min_kappa(), shrink, extinction })
}

fn run_parallel<T: Sync, R: Send>(items: Vec<T>, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    std::thread::scope(|scope| {
        let f = &f;
        let handles: Vec<_> = items.iter().map(|item| scope.spawn(move || f(item))).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    })
}

fn criterion_6() -> Outcome {
    let mut cases = Vec::new();
    for r0 in [0.5, 1.0, 1.5] {
        cases.push(FlowCase { surface: AxisymSurface::centered_sphere(4, r0).unwrap(), k: 1 });
    }
    cases.push(FlowCase { surface: AxisymSurface::centered_sphere(6, 1.0).unwrap(), k: 2 });
    for eps in [0.002, 0.005] {
        cases.push(FlowCase { surface: AxisymSurface::perturbed_sphere(4, 1.0, eps, 2).unwrap(), k: 1 });
    }
    cases.push(FlowCase { surface: AxisymSurface::perturbed_sphere(5, 1.0, 0.003, 2).unwrap(), k: 2 });
    for (n, k) in [(4, 1), (5, 2), (6, 3)] {
        cases.push(FlowCase { surface: AxisymSurface::offset_sphere(n, 1.0, 0.02).unwrap(), k });
    }
    let results = run_parallel(cases, flow_summary);
    let mut pass = true;
    let mut lines = Vec::new();
    let mut worst_ext = 0.0f64;
    for r in &results {
        match r {
            Ok(s) => {
                let ok = s.e_increase <= 1e-8 && s.e_min >= -1e-8 && s.kappa >= 1.0 - 1e-6 && s.shrink < 1e-2 && s.extinction.is_none_or(|e| e < 1e-6);
                if let Some(e) = s.extinction {
                    worst_ext = worst_ext.max(e);
                }
                if !ok {
                    pass = false;
                    lines.push(format!(
                        "{}: dE {:.1e}, min E {:.1e}, kappa {:.6}, shrink {:.1e}",
                        s.label, s.e_increase, s.e_min, s.kappa, s.shrink
                    ));
                }
            }
            Err(e) => {
                pass = false;
                lines.push(e.clone());
            }
        }
    }
    let detail = format!("{} runs, extinction error {worst_ext:.1e}{}", results.len(), if lines.is_empty() { String::new() } else { format!("; {}", lines.join("; ")) });
    Outcome::new(pass, detail)
}

/// Runs outside the asserted regime, printed for the record.
fn flow_observations() {
    let cases = vec![
        FlowCase { surface: AxisymSurface::offset_sphere(4, 1.0, 0.3).unwrap(), k: 1 },
        FlowCase { surface: AxisymSurface::perturbed_sphere(4, 1.0, 0.05, 2).unwrap(), k: 1 },
    ];
    for r in run_parallel(cases, flow_summary) {
        match r {
            Ok(s) => println!("  note  {}: E_end/E0 {:.3e}, max dE/scale {:.1e}", s.label, s.shrink, s.e_increase),
            Err(e) => println!("  note  {e}"),
        }
    }
}

fn af_reports(n: usize, s: &AxisymSurface) -> Vec<InequalityReport> {
    let m = SurfaceMeasure::new(s, &rule(n)).unwrap();
    let mut out = Vec::new();
    for which in [Inequality::AfUnweighted, Inequality::AfWeightedOdd, Inequality::MinkowskiBhw, Inequality::WeightedDlg, Inequality::SupportWeighted] {
        for k in which.orders(n) {
            out.push(which.evaluate(&m, k).unwrap());
        }
    }
    out
}

fn criterion_7() -> Outcome {
    let mut most_negative = 0.0f64;
    let mut flag_errors = Vec::new();
    let mut monotone_errors = Vec::new();
    for n in 4..=7 {
        for s in battery(n) {
            let geodesic = s.is_centered_sphere() || s.label().starts_with("offset_sphere");
            for rep in af_reports(n, &s) {
                most_negative = most_negative.min(rep.defect.defect / rep.defect.scale());
                // the unweighted inequality is isometry invariant: its extremals are all geodesic spheres
                let expect = if rep.name == "af_unweighted" { geodesic } else { s.is_centered_sphere() };
                if rep.defect.equality_case != expect {
                    flag_errors.push(format!("{} k={:?} on {}", rep.name, rep.k, s.label()));
                }
            }
        }
        let scans: Vec<Vec<InequalityReport>> =
            [0.4, 0.2, 0.1, 0.05].iter().map(|&d| af_reports(n, &AxisymSurface::offset_sphere(n, 1.0, d).unwrap())).collect();
        for i in 0..scans[0].len() {
            let d: Vec<f64> = scans.iter().map(|s| s[i].defect.defect).collect();
            let ok = if scans[0][i].name == "af_unweighted" {
                d.iter().all(|x| x.abs() < 1e-10 * scans[0][i].defect.scale())
            } else {
                d.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0)
            };
            if !ok {
                monotone_errors.push(format!("n={n} {} k={:?}", scans[0][i].name, scans[0][i].k));
            }
        }
    }
    let pass = most_negative >= -1e-8 && flag_errors.is_empty() && monotone_errors.is_empty();
    Outcome::new(
        pass,
        format!(
            "min relative defect {most_negative:.2e}, equality-flag mismatches {:?}, non-monotone scans {:?}",
            flag_errors, monotone_errors
        ),
    )
}

fn random_riemann(n: usize, rng: &mut ChaCha8Rng) -> RiemannTensor {
    let mut sym = |scale: f64| {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        (&a + a.transpose()) * (0.5 * scale)
    };
    let g = DMatrix::identity(n, n) + sym(0.2);
    let metric = MetricTensor::new(g).unwrap();
    let mut values = vec![0.0; n.pow(4)];
    for _ in 0..3 {
        let h = sym(1.0);
        let q = sym(1.0);
        for (v, (a, b)) in values.iter_mut().zip(kulkarni_nomizu(&h, &q).iter().zip(kulkarni_nomizu(&q, &h).iter())) {
            *v += 0.5 * (a + b);
        }
    }
    RiemannTensor::new(values, metric).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for n in 4..=7 {
        let nf = n as f64;
        for _ in 0..20 {
            let r = random_riemann(n, &mut rng);
            let rt = modified_riemann(&r);
            let scalar = r.scalar();
            let l2 = gauss_bonnet_lk(&r, 2);
            worst = worst.max(rel(gauss_bonnet_lk(&rt, 1), scalar + nf * (nf - 1.0)));
            worst = worst.max(rel(
                gauss_bonnet_lk(&rt, 2),
                l2 + 2.0 * (nf - 2.0) * (nf - 3.0) * scalar + nf * (nf - 1.0) * (nf - 2.0) * (nf - 3.0),
            ));
            worst = worst.max(rel(l2, r.norm_squared() - 4.0 * ricci_norm_squared(&r) + scalar * scalar));
            let pt = p_tensor(&r, 2, true).unwrap();
            let combo = p_tensor(&r, 2, false).unwrap().add_scaled((nf - 2.0) * (nf - 3.0), &p_tensor(&r, 1, false).unwrap());
            worst = worst.max(pt.add_scaled(-1.0, &combo).max_abs() / pt.max_abs().max(1.0));
        }
    }
    // far-field radius for every family, plus the near-horizon point ρ = 3 of the
    // n=5, k=2, m=1 family
    let custom = |n: usize, terms: Vec<(f64, f64)>| RotSymMetric::custom(n, terms).unwrap();
    let mut points: Vec<(RotSymMetric, usize, f64)> = ADS.iter().map(|&(n, k, m)| (ads(n, k, m), k, 5.0)).collect();
    points.push((custom(5, vec![(-1.0, -1.0), (-1.0, -2.0)]), 2, 5.0));
    points.push((custom(6, vec![(0.5, -1.0)]), 2, 5.0));
    points.push((RotSymMetric::hyperbolic(6).unwrap(), 3, 5.0));
    points.push((ads(5, 2, 1.0), 2, 3.0));
    let mut div_worst = 0.0f64;
    let mut orders = Vec::new();
    let mut order_ok = true;
    for (g, k, rho) in &points {
        let r1 = divergence_residual(g, *k, *rho, 2e-3).unwrap();
        let r2 = divergence_residual(g, *k, *rho, 1e-3).unwrap();
        div_worst = div_worst.max(r2);
        // residuals already at the roundoff floor carry no order information
        if r1 > 1e-9 {
            let p = (r1 / r2).log2();
            orders.push(p);
            order_ok &= p > 1.8;
        }
    }
    Outcome::new(
        worst < 1e-10 && div_worst < 1e-6 && order_ok,
        format!("max relative identity error {worst:.2e}, divergence residual at h=1e-3 {div_worst:.2e}, observed orders {orders:.2?}"),
    )
}

/// L~k next to the horizon, printed for the record.
fn horizon_observations() {
    for &(n, k, m) in &ADS {
        let g = ads(n, k, m);
        let rho = g.rho_min() * 1.001;
        let mut x = vec![0.0; n];
        x[0] = rho;
        let closed = rotmass::tilde_lk_metric(&g, k, rho).unwrap();
        let dense = gauss_bonnet_lk(&warped::chart_modified_riemann(&g, &x).unwrap(), k);
        println!("  note  adS n={n} k={k} m={m} at 1.001 rho0: L~k closed form {closed:.2e}, dense {dense:.2e}");
    }
}

/// Divergence residuals near the horizon, printed for the record.
fn divergence_observations() {
    for &(n, k, m) in &ADS {
        let g = ads(n, k, m);
        let r = divergence_residual(&g, k, 3.0, 1e-3).unwrap();
        let order = (divergence_residual(&g, k, 3.0, 2e-3).unwrap() / r).log2();
        println!("  note  adS n={n} k={k} m={m} at rho=3: residual {r:.2e} at h=1e-3, order {order:.2}");
    }
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let families = [
        AxisymSurface::centered_sphere(4, 1.0).unwrap(),
        AxisymSurface::offset_sphere(5, 1.1, 0.35).unwrap(),
        AxisymSurface::perturbed_sphere(5, 0.9, 0.08, 3).unwrap(),
        AxisymSurface::perturbed_sphere(6, 1.2, 0.05, 2).unwrap(),
    ];
    let mut worst = 0.0f64;
    for s in &families {
        let n = s.dim();
        for _ in 0..100 {
            let t = rng.random_range(0.05..std::f64::consts::PI - 0.05);
            let phi: Vec<f64> = (0..n - 2).map(|_| rng.random_range(0.2..2.9)).collect();
            let x = s.sample(t);
            // fourth-order stencils balance truncation and roundoff near h = eps^(1/6)
            let o = s.oracle(t, &phi, ORACLE_STEP).unwrap();
            let mut closed = vec![x.kappa_azimuthal; n - 1];
            closed[0] = x.kappa_polar;
            closed.sort_by(f64::total_cmp);
            for (a, b) in closed.iter().zip(&o.principal) {
                worst = worst.max((a - b).abs());
            }
            worst = worst.max((x.u - o.support).abs());
            let dens = x.area_weight / sphere_volume_constant(n - 1) * unit_sphere_jacobian(&phi);
            worst = worst.max((dens - o.area_density).abs() / dens.max(1.0));
        }
    }
    Outcome::new(worst < 1e-6, format!("400 samples over 4 families, max deviation {worst:.2e}"))
}

fn criterion_10() -> Outcome {
    let families = [AxisymSurface::offset_sphere(5, 1.0, 0.3).unwrap(), AxisymSurface::perturbed_sphere(4, 1.0, 0.05, 2).unwrap()];
    let mut min_order = f64::INFINITY;
    let mut checked = 0;
    let mut floor_only = 0;
    for s in &families {
        let state = FlowState::from_surface(s, DEFAULT_MODES).unwrap();
        let a = flow::evolution_identity_residuals(&state, 1e-2).unwrap();
        let b = flow::evolution_identity_residuals(&state, 5e-3).unwrap();
        for (key, r1) in &a {
            let r2 = b[key];
            if *r1 < 1e-10 {
                floor_only += 1;
                continue;
            }
            checked += 1;
            min_order = min_order.min((r1 / r2).log2());
        }
    }
    Outcome::new(
        checked > 0 && min_order >= 1.9,
        format!("{checked} residuals with min observed order {min_order:.3}, {floor_only} already at roundoff"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 adS-Schwarzschild mass limit", criterion_1),
        ("2 L~k vanishing on adS-Schwarzschild", criterion_2),
        ("3 Penrose saturation", criterion_3),
        ("4 Minkowski identity", criterion_4),
        ("5 neighbouring curvature inequalities", criterion_5),
        ("6 flow monotonicity suite", criterion_6),
        ("7 Alexandrov-Fenchel battery", criterion_7),
        ("8 tensor identities and divergence", criterion_8),
        ("9 oracle agreement", criterion_9),
        ("10 evolution identities", criterion_10),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let out = check();
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {name}: {} [{:.1} s]", out.detail, start.elapsed().as_secs_f64());
        if !out.pass {
            failed += 1;
        }
        if name.starts_with("2 ") {
            horizon_observations();
        }
        if name.starts_with("6 ") {
            flow_observations();
        }
        if name.starts_with("8 ") {
            divergence_observations();
        }
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
