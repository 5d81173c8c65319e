//! Python bindings: surfaces, curvature integrals, the inequality battery, mass of
//! rotationally symmetric metrics and the flow.

use std::collections::BTreeMap;

use gbc_lab::flow::{self, FlowPolicy};
use gbc_lab::hypersurface::AxisymSurface;
use gbc_lab::inequalities::{self, InequalityReport};
use gbc_lab::integrals::{self, Proposition};
use gbc_lab::quadrature::{QuadratureRule, DEFAULT_NODES};
use gbc_lab::rotmass::{self, RotSymMetric};
use gbc_lab::symfunc::{self, Spectrum};
use gbc_lab::tensor_kernel;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: gbc_lab::Error) -> PyErr {
    match e {
        gbc_lab::Error::InvalidInput(_) | gbc_lab::Error::Domain(_) | gbc_lab::Error::Hypothesis(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn rule(n: usize, nodes: usize) -> PyResult<QuadratureRule> {
    QuadratureRule::new(n, nodes).map_err(err)
}

/// lhs − rhs of one comparison.
#[pyclass(name = "Defect", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyDefect {
    lhs: f64,
    rhs: f64,
    defect: f64,
    relative: f64,
    equality_case: bool,
}

impl From<integrals::Defect> for PyDefect {
    fn from(d: integrals::Defect) -> Self {
        Self { lhs: d.lhs, rhs: d.rhs, defect: d.defect, relative: d.relative, equality_case: d.equality_case }
    }
}

#[pymethods]
impl PyDefect {
    fn __repr__(&self) -> String {
        format!("Defect(lhs={}, rhs={}, defect={:e}, equality_case={})", self.lhs, self.rhs, self.defect, self.equality_case)
    }
}

/// Axisymmetric star-shaped hypersurface of H^n.
#[pyclass(name = "Surface", frozen)]
struct PySurface(AxisymSurface);

#[pymethods]
impl PySurface {
    #[staticmethod]
    fn centered_sphere(n: usize, r0: f64) -> PyResult<Self> {
        AxisymSurface::centered_sphere(n, r0).map(Self).map_err(err)
    }

    #[staticmethod]
    fn offset_sphere(n: usize, radius: f64, offset: f64) -> PyResult<Self> {
        AxisymSurface::offset_sphere(n, radius, offset).map(Self).map_err(err)
    }

    #[staticmethod]
    fn perturbed_sphere(n: usize, r0: f64, eps: f64, mode: usize) -> PyResult<Self> {
        AxisymSurface::perturbed_sphere(n, r0, eps, mode).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn label(&self) -> String {
        self.0.label().to_string()
    }

    /// Profile r, support function u, potential V and principal curvatures at θ.
    fn sample(&self, theta: f64) -> BTreeMap<&'static str, f64> {
        let s = self.0.sample(theta);
        BTreeMap::from([
            ("r", s.r),
            ("u", s.u),
            ("v", s.v),
            ("kappa_polar", s.kappa_polar),
            ("kappa_azimuthal", s.kappa_azimuthal),
        ])
    }

    #[pyo3(signature = (nodes = DEFAULT_NODES))]
    fn area(&self, nodes: usize) -> PyResult<f64> {
        integrals::surface_integral(&self.0, |_| 1.0, &rule(self.0.dim(), nodes)?).map_err(err)
    }

    #[pyo3(signature = (nodes = DEFAULT_NODES))]
    fn volume(&self, nodes: usize) -> PyResult<f64> {
        integrals::enclosed_volume(&self.0, &rule(self.0.dim(), nodes)?).map_err(err)
    }

    /// ∫σ_k over the surface.
    #[pyo3(signature = (k, nodes = DEFAULT_NODES))]
    fn curvature_integral(&self, k: usize, nodes: usize) -> PyResult<f64> {
        integrals::curvature_integral(&self.0, k, &rule(self.0.dim(), nodes)?).map_err(err)
    }

    #[pyo3(signature = (k, nodes = DEFAULT_NODES))]
    fn e_functional(&self, k: usize, nodes: usize) -> PyResult<f64> {
        integrals::e_functional(&self.0, k, &rule(self.0.dim(), nodes)?).map_err(err)
    }

    #[pyo3(signature = (nodes = DEFAULT_NODES))]
    fn quermassintegrals(&self, nodes: usize) -> PyResult<Vec<f64>> {
        integrals::quermassintegrals(&self.0, &rule(self.0.dim(), nodes)?).map_err(err)
    }

    #[pyo3(signature = (tol = 1e-9, nodes = DEFAULT_NODES))]
    fn horospherical_convex(&self, tol: f64, nodes: usize) -> PyResult<bool> {
        Ok(self.0.horospherical_convex(tol, &rule(self.0.dim(), nodes)?))
    }

    fn __repr__(&self) -> String {
        format!("Surface(n={}, {})", self.0.dim(), self.0.label())
    }
}

/// One row of the inequality battery.
#[pyclass(name = "InequalityReport", frozen, get_all)]
struct PyInequalityReport {
    name: String,
    k: Option<usize>,
    defect: PyDefect,
    hypothesis_flags: String,
    hypotheses_met: bool,
    asserted: bool,
    status: String,
}

impl From<InequalityReport> for PyInequalityReport {
    fn from(r: InequalityReport) -> Self {
        let status = format!("{:?}", r.status(1e-9));
        Self {
            name: r.name,
            k: r.k,
            defect: r.defect.into(),
            hypothesis_flags: r.hypotheses.label(),
            hypotheses_met: r.hypotheses_met,
            asserted: r.asserted,
            status,
        }
    }
}

#[pymethods]
impl PyInequalityReport {
    fn __repr__(&self) -> String {
        format!("InequalityReport({} k={:?} defect={:e} status={})", self.name, self.k, self.defect.defect, self.status)
    }
}

#[pyfunction]
#[pyo3(signature = (surface, k, nodes = DEFAULT_NODES))]
fn minkowski_residual(surface: &PySurface, k: usize, nodes: usize) -> PyResult<PyDefect> {
    integrals::minkowski_residual(&surface.0, k, &rule(surface.0.dim(), nodes)?).map(Into::into).map_err(err)
}

/// `which` is one of eq2, eq4, eq1_prop1k, eq2_prop1k, eq2k, gallego_solanes.
#[pyfunction]
#[pyo3(signature = (surface, k, which, nodes = DEFAULT_NODES))]
fn proposition_defect(surface: &PySurface, k: usize, which: &str, nodes: usize) -> PyResult<PyDefect> {
    let all = [
        Proposition::Eq2,
        Proposition::Eq4,
        Proposition::Eq1Prop1k,
        Proposition::Eq2Prop1k,
        Proposition::Eq2k,
        Proposition::GallegoSolanes,
    ];
    let p = all.into_iter().find(|p| p.name() == which).ok_or_else(|| PyValueError::new_err(format!("unknown proposition {which}")))?;
    integrals::proposition_defect(&surface.0, k, p, &rule(surface.0.dim(), nodes)?).map(Into::into).map_err(err)
}

/// Every inequality of the battery at every admissible order.
#[pyfunction]
#[pyo3(signature = (surface, nodes = DEFAULT_NODES))]
fn inequality_battery(surface: &PySurface, nodes: usize) -> PyResult<Vec<PyInequalityReport>> {
    let reports = inequalities::battery(&surface.0, &rule(surface.0.dim(), nodes)?).map_err(err)?;
    Ok(reports.into_iter().map(Into::into).collect())
}

#[pyfunction]
fn elementary_symmetric(k: usize, values: Vec<f64>) -> PyResult<f64> {
    Ok(symfunc::elementary_symmetric(k, &Spectrum::new(values).map_err(err)?))
}

#[pyfunction]
fn normalized_p(k: usize, values: Vec<f64>) -> PyResult<f64> {
    Ok(symfunc::normalized_p(k, &Spectrum::new(values).map_err(err)?))
}

/// L_k of a curvature operator with sectional value `a` on the planes containing one
/// direction and `c` on the rest.
#[pyfunction]
fn two_eigenvalue_lk(a: f64, c: f64, n: usize, k: usize) -> f64 {
    tensor_kernel::two_eigenvalue_lk(a, c, n, k)
}

/// Rotationally symmetric metric dρ²/ψ + ρ²g_S on the exterior of its horizon.
#[pyclass(name = "Metric", frozen)]
struct PyMetric(RotSymMetric);

#[pymethods]
impl PyMetric {
    #[staticmethod]
    fn ads_schwarzschild(n: usize, k: usize, m: f64) -> PyResult<Self> {
        RotSymMetric::ads_schwarzschild(n, k, m).map(Self).map_err(err)
    }

    #[staticmethod]
    fn hyperbolic(n: usize) -> PyResult<Self> {
        RotSymMetric::hyperbolic(n).map(Self).map_err(err)
    }

    /// ψ = 1 + ρ² + Σ coefficient·ρ^power.
    #[staticmethod]
    fn custom(n: usize, terms: Vec<(f64, f64)>) -> PyResult<Self> {
        RotSymMetric::custom(n, terms).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.spec().dim()
    }

    #[getter]
    fn horizon(&self) -> Option<f64> {
        self.0.horizon()
    }

    fn horizon_area(&self) -> Option<f64> {
        rotmass::horizon_area(&self.0)
    }

    fn tilde_lk(&self, k: usize, rho: f64) -> PyResult<f64> {
        rotmass::tilde_lk_metric(&self.0, k, rho).map_err(err)
    }

    fn mass_flux(&self, k: usize, radius: f64) -> PyResult<f64> {
        rotmass::mass_flux(&self.0, k, radius).map_err(err)
    }

    /// Extrapolated limit of the flux over `radii`: dict with limit, error, order, flux.
    #[pyo3(signature = (k, radii = vec![10.0, 20.0, 40.0, 80.0]))]
    fn mass_limit<'py>(&self, py: Python<'py>, k: usize, radii: Vec<f64>) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        let est = rotmass::mass_limit(&self.0, k, &radii).map_err(err)?;
        let d = pyo3::types::PyDict::new(py);
        d.set_item("radii", est.radii)?;
        d.set_item("flux", est.flux)?;
        d.set_item("limit", est.limit)?;
        d.set_item("error", est.error)?;
        d.set_item("order", est.order)?;
        Ok(d)
    }

    /// Full report as a JSON string, the format written by `gbc-lab mass`.
    #[pyo3(signature = (k, radii = vec![10.0, 20.0, 40.0, 80.0]))]
    fn mass_report_json(&self, k: usize, radii: Vec<f64>) -> PyResult<String> {
        let rep = rotmass::mass_report(self.0.spec(), k, &radii).map_err(err)?;
        serde_json::to_string(&rep).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!("Metric({:?})", self.0.spec())
    }
}

#[pyfunction]
fn penrose_rhs(area: f64, n: usize, k: usize) -> PyResult<f64> {
    rotmass::penrose_rhs(area, n, k).map_err(err)
}

/// Runs the flow until the minimum radius reaches `stop_radius` or t reaches `t_max`.
/// Returns the trace as a dict of columns plus `stop` and `extinction_estimate`.
#[pyfunction]
#[pyo3(signature = (surface, k, t_max = 10.0, stop_radius = 0.02, dt_max = 1e-2))]
fn flow_run<'py>(
    py: Python<'py>,
    surface: &PySurface,
    k: usize,
    t_max: f64,
    stop_radius: f64,
    dt_max: f64,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let policy = FlowPolicy { stop_radius, dt_max, ..FlowPolicy::default() };
    let trace = py.detach(|| flow::run(&surface.0, k, t_max, &policy)).map_err(err)?;
    let d = pyo3::types::PyDict::new(py);
    let col = |f: fn(&flow::FlowRow) -> f64| trace.rows.iter().map(f).collect::<Vec<f64>>();
    d.set_item("t", col(|r| r.t))?;
    d.set_item("E", col(|r| r.e))?;
    d.set_item("area", col(|r| r.area))?;
    d.set_item("volume", col(|r| r.volume))?;
    d.set_item("r_min", col(|r| r.r_min))?;
    d.set_item("r_max", col(|r| r.r_max))?;
    d.set_item("kappa_min", col(|r| r.kappa_min))?;
    d.set_item("horo_flag", trace.rows.iter().map(|r| r.horo_flag).collect::<Vec<bool>>())?;
    d.set_item("dEdt_fd", col(|r| r.de_dt_fd))?;
    d.set_item("dEdt_analytic", col(|r| r.de_dt_analytic))?;
    d.set_item("stop", format!("{:?}", trace.stop))?;
    d.set_item("extinction_estimate", trace.extinction_estimate())?;
    Ok(d)
}

#[pymodule]
fn gbc_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDefect>()?;
    m.add_class::<PySurface>()?;
    m.add_class::<PyInequalityReport>()?;
    m.add_class::<PyMetric>()?;
    m.add_function(wrap_pyfunction!(minkowski_residual, m)?)?;
    m.add_function(wrap_pyfunction!(proposition_defect, m)?)?;
    m.add_function(wrap_pyfunction!(inequality_battery, m)?)?;
    m.add_function(wrap_pyfunction!(elementary_symmetric, m)?)?;
    m.add_function(wrap_pyfunction!(normalized_p, m)?)?;
    m.add_function(wrap_pyfunction!(two_eigenvalue_lk, m)?)?;
    m.add_function(wrap_pyfunction!(penrose_rhs, m)?)?;
    m.add_function(wrap_pyfunction!(flow_run, m)?)?;
    Ok(())
}
