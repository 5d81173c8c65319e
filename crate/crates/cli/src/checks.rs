//! Row builders for the identity and inequality batteries.

use gbc_lab::flow::{self, FlowState, DEFAULT_MODES};
use gbc_lab::hypersurface::SurfaceSpec;
use gbc_lab::inequalities;
use gbc_lab::integrals::{minkowski_from, proposition_from, Defect, Proposition, SurfaceMeasure};
use gbc_lab::quadrature::QuadratureRule;
use gbc_lab::rotmass::MetricSpec;
use gbc_lab::tensor_kernel::{
    divergence_residual, gauss_bonnet_lk, kulkarni_nomizu, modified_riemann, p_tensor, ricci_norm_squared, MetricTensor, RiemannTensor,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::CliError;

/// Defect CSV record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectRow {
    pub inequality: String,
    pub n: usize,
    pub k: Option<usize>,
    pub surface: String,
    pub lhs: f64,
    pub rhs: f64,
    pub defect: f64,
    pub relative: f64,
    pub equality_case: bool,
}

impl DefectRow {
    fn new(name: impl Into<String>, n: usize, k: Option<usize>, surface: impl Into<String>, d: &Defect) -> Self {
        Self {
            inequality: name.into(),
            n,
            k,
            surface: surface.into(),
            lhs: d.lhs,
            rhs: d.rhs,
            defect: d.defect,
            relative: d.relative,
            equality_case: d.equality_case,
        }
    }
}

/// Defect CSV record extended with the hypothesis columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityRow {
    pub inequality: String,
    pub n: usize,
    pub k: Option<usize>,
    pub surface: String,
    pub lhs: f64,
    pub rhs: f64,
    pub defect: f64,
    pub relative: f64,
    pub equality_case: bool,
    pub hypothesis_flags: String,
    pub asserted: bool,
}

/// A row together with its verdict.
#[derive(Debug, Clone)]
pub struct Checked<R> {
    pub row: R,
    pub failed: bool,
}

fn identity(row: DefectRow, tol: f64) -> Checked<DefectRow> {
    let scale = row.lhs.abs().max(row.rhs.abs()).max(1.0);
    let failed = !(row.defect.abs() <= tol * scale);
    Checked { row, failed }
}

fn inequality(row: DefectRow, tol: f64) -> Checked<DefectRow> {
    let scale = row.lhs.abs().max(row.rhs.abs()).max(1.0);
    let failed = !(row.defect >= -tol * scale);
    Checked { row, failed }
}

fn residual(name: impl Into<String>, n: usize, k: Option<usize>, label: impl Into<String>, value: f64, tol: f64) -> Checked<DefectRow> {
    identity(DefectRow::new(name, n, k, label, &Defect::new(value, 0.0)), tol)
}

pub fn metric_label(spec: &MetricSpec) -> String {
    match spec {
        MetricSpec::AdsSchwarzschild { n, k, m } => format!("ads_schwarzschild(n={n},k={k},m={m})"),
        MetricSpec::Hyperbolic { n } => format!("hyperbolic(n={n})"),
        MetricSpec::Custom { n, terms } => {
            let t: Vec<String> = terms.iter().map(|(c, p)| format!("{c}*rho^{p}")).collect();
            format!("custom(n={n},{})", t.join("+"))
        }
    }
}

enum Job<'a> {
    Surface(usize, &'a SurfaceSpec),
    Tensor(usize, usize),
    Divergence(&'a crate::config::DivergenceCheck),
    Evolution(usize, &'a SurfaceSpec),
}

pub fn identities(cfg: &RunConfig) -> Result<Vec<Checked<DefectRow>>, CliError> {
    let mut jobs = Vec::new();
    for &n in &cfg.dims {
        jobs.extend(cfg.surfaces.iter().map(|s| Job::Surface(n, s)));
    }
    for &n in &cfg.dims {
        jobs.extend((0..cfg.tensors.count).map(|i| Job::Tensor(n, i)));
    }
    jobs.extend(cfg.divergence.iter().filter(|d| cfg.slice_n.is_none_or(|n| n == d.metric.dim())).map(Job::Divergence));
    for &n in &cfg.dims {
        jobs.extend(cfg.evolution.surfaces.iter().map(|s| Job::Evolution(n, s)));
    }
    let blocks: Vec<Vec<Checked<DefectRow>>> = jobs.par_iter().map(|j| run_job(cfg, j)).collect::<Result<_, _>>()?;
    Ok(blocks.into_iter().flatten().filter(|c| cfg.order_selected(c.row.k)).collect())
}

fn run_job(cfg: &RunConfig, job: &Job) -> Result<Vec<Checked<DefectRow>>, CliError> {
    let tol = &cfg.tolerances;
    let mut rows = Vec::new();
    match *job {
        Job::Surface(n, spec) => {
            let s = spec.build(n)?;
            let rule = QuadratureRule::new(n, cfg.nodes)?;
            let m = SurfaceMeasure::new(&s, &rule)?;
            for k in 0..=n - 2 {
                rows.push(identity(DefectRow::new("minkowski", n, Some(k), s.label(), &minkowski_from(&m, k)), tol.minkowski));
            }
            if m.kappa_min() > 0.0 {
                for which in Proposition::ASSERTED {
                    for k in which.k_range(n) {
                        let d = proposition_from(&m, k, which)?;
                        rows.push(inequality(DefectRow::new(which.name(), n, Some(k), s.label(), &d), tol.proposition));
                    }
                }
            } else {
                eprintln!("note: {} (n = {n}) is not convex; proposition rows skipped", s.label());
            }
        }
        Job::Tensor(n, i) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((n as u64) << 32 | i as u64));
            let label = format!("random_kn(seed={},i={i})", cfg.seed);
            let r = random_riemann(n, &mut rng)?;
            let nf = n as f64;
            let rt = modified_riemann(&r);
            let scalar = r.scalar();
            let t = tol.tensor;
            rows.push(residual("riemann_symmetry", n, None, &label, r.symmetry_defect(), t));
            let l1 = Defect::new(gauss_bonnet_lk(&rt, 1), scalar + nf * (nf - 1.0));
            rows.push(identity(DefectRow::new("modified_l1", n, Some(1), &label, &l1), t));
            if n >= 4 {
                let l2 = gauss_bonnet_lk(&r, 2);
                let expand = Defect::new(l2, r.norm_squared() - 4.0 * ricci_norm_squared(&r) + scalar * scalar);
                rows.push(identity(DefectRow::new("l2_expansion", n, Some(2), &label, &expand), t));
                let shift = l2 + 2.0 * (nf - 2.0) * (nf - 3.0) * scalar + nf * (nf - 1.0) * (nf - 2.0) * (nf - 3.0);
                rows.push(identity(DefectRow::new("modified_l2", n, Some(2), &label, &Defect::new(gauss_bonnet_lk(&rt, 2), shift)), t));
                let pt = p_tensor(&r, 2, true)?;
                let combo = p_tensor(&r, 2, false)?.add_scaled((nf - 2.0) * (nf - 3.0), &p_tensor(&r, 1, false)?);
                let gap = pt.add_scaled(-1.0, &combo).max_abs() / pt.max_abs().max(1.0);
                rows.push(residual("modified_p2", n, Some(2), &label, gap, t));
            }
            for k in 1..=n / 2 {
                let p = p_tensor(&r, k, false)?;
                let size = p.max_abs().max(1.0);
                rows.push(residual("p_symmetry", n, Some(k), &label, p.symmetry_defect() / size, t));
                rows.push(residual("p_bianchi", n, Some(k), &label, p.bianchi_defect() / size, t));
            }
        }
        Job::Divergence(d) => {
            let g = d.metric.build()?;
            let value = divergence_residual(&g, d.k, d.rho, d.h)?;
            let label = format!("{}@rho={}", metric_label(&d.metric), d.rho);
            rows.push(residual("divergence", d.metric.dim(), Some(d.k), label, value, tol.divergence));
        }
        Job::Evolution(n, spec) => {
            let s = spec.build(n)?;
            let state = FlowState::from_surface(&s, DEFAULT_MODES)?;
            // the raw residuals are O(dt²) truncation with a large constant; the
            // Richardson combination of dt and dt/2 cancels the leading term
            let coarse = flow::evolution_identity_residuals(&state, cfg.evolution.dt)?;
            let fine = flow::evolution_identity_residuals(&state, 0.5 * cfg.evolution.dt)?;
            for (key, r1) in coarse {
                let value = (4.0 * fine[&key] - r1) / 3.0;
                rows.push(residual(format!("evolution_{key}"), n, None, s.label(), value.abs(), tol.evolution));
            }
        }
    }
    Ok(rows)
}

/// Symmetrized Kulkarni–Nomizu sums on a random positive definite metric.
fn random_riemann(n: usize, rng: &mut ChaCha8Rng) -> Result<RiemannTensor, CliError> {
    let mut sym = |scale: f64| {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        (&a + a.transpose()) * (0.5 * scale)
    };
    let metric = MetricTensor::new(DMatrix::identity(n, n) + sym(0.2))?;
    let mut values = vec![0.0; n.pow(4)];
    for _ in 0..3 {
        let (h, q) = (sym(1.0), sym(1.0));
        for (v, (a, b)) in values.iter_mut().zip(kulkarni_nomizu(&h, &q).iter().zip(kulkarni_nomizu(&q, &h).iter())) {
            *v += 0.5 * (a + b);
        }
    }
    Ok(RiemannTensor::new(values, metric)?)
}

pub fn inequality_rows(cfg: &RunConfig) -> Result<Vec<Checked<InequalityRow>>, CliError> {
    let jobs: Vec<(usize, &SurfaceSpec)> = cfg.dims.iter().flat_map(|&n| cfg.surfaces.iter().map(move |s| (n, s))).collect();
    let blocks: Vec<Vec<Checked<InequalityRow>>> = jobs
        .par_iter()
        .map(|&(n, spec)| -> Result<_, CliError> {
            let s = spec.build(n)?;
            let rule = QuadratureRule::new(n, cfg.nodes)?;
            let reports = inequalities::battery(&s, &rule)?;
            Ok(reports
                .into_iter()
                .filter(|r| cfg.order_selected(r.k))
                .map(|r| {
                    let failed = r.fails(cfg.tolerances.inequality);
                    let d = r.defect;
                    let row = InequalityRow {
                        inequality: r.name,
                        n,
                        k: r.k,
                        surface: s.label().to_string(),
                        lhs: d.lhs,
                        rhs: d.rhs,
                        defect: d.defect,
                        relative: d.relative,
                        equality_case: d.equality_case,
                        hypothesis_flags: r.hypotheses.label(),
                        asserted: r.asserted,
                    };
                    Checked { row, failed }
                })
                .collect())
        })
        .collect::<Result<_, _>>()?;
    Ok(blocks.into_iter().flatten().collect())
}
