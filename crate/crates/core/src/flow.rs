//! The normal-speed flow ∂X/∂t = −Vν on axisymmetric surfaces, written as a
//! transport equation for the radial profile and integrated spectrally.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hypersurface::AxisymSurface;
use crate::integrals::{Defect, SurfaceMeasure, Weight};
use crate::quadrature::{QuadratureRule, DEFAULT_NODES};

pub const DEFAULT_MODES: usize = 64;
/// Coefficients in the top quarter of the series must stay below this fraction of a_0.
pub const TAIL_GUARD: f64 = 1e-10;

/// Collocation grid and trig tables for a cosine series. The grid has 3/2 as many
/// points as modes so quadratic products are projected without aliasing.
#[derive(Debug, Clone)]
struct Spectral {
    modes: usize,
    grid: Vec<f64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Spectral {
    fn new(modes: usize) -> Self {
        Self::with_grid(modes, (3 * modes).div_ceil(2))
    }

    fn with_grid(modes: usize, points: usize) -> Self {
        let grid: Vec<f64> = (0..points).map(|j| std::f64::consts::PI * (j as f64 + 0.5) / points as f64).collect();
        let mut cos = Vec::with_capacity(points * modes);
        let mut sin = Vec::with_capacity(points * modes);
        for &t in &grid {
            for m in 0..modes {
                cos.push((m as f64 * t).cos());
                sin.push((m as f64 * t).sin());
            }
        }
        Self { modes, grid, cos, sin }
    }

    /// (r, r′) at the grid points.
    fn eval(&self, a: &[f64]) -> Vec<(f64, f64)> {
        (0..self.grid.len())
            .map(|j| {
                let c = &self.cos[j * self.modes..(j + 1) * self.modes];
                let s = &self.sin[j * self.modes..(j + 1) * self.modes];
                let mut r = 0.0;
                let mut d = 0.0;
                for m in 0..self.modes {
                    r += a[m] * c[m];
                    d -= m as f64 * a[m] * s[m];
                }
                (r, d)
            })
            .collect()
    }

    /// Discrete cosine projection of grid values onto the first `modes` coefficients.
    fn project(&self, f: &[f64]) -> Vec<f64> {
        let np = self.grid.len() as f64;
        (0..self.modes)
            .map(|m| {
                let s: f64 = f.iter().enumerate().map(|(j, v)| v * self.cos[j * self.modes + m]).sum();
                if m == 0 {
                    s / np
                } else {
                    2.0 * s / np
                }
            })
            .collect()
    }
}

/// ∂r/∂t = −cosh r · W / sinh r.
fn speed(r: f64, dr: f64) -> f64 {
    let (s, c) = (r.sinh(), r.cosh());
    -c * (s * s + dr * dr).sqrt() / s
}

fn pole_values(a: &[f64]) -> (f64, f64) {
    let north = a.iter().sum();
    let south = a.iter().enumerate().map(|(m, v)| if m % 2 == 0 { *v } else { -*v }).sum();
    (north, south)
}

fn tail(a: &[f64]) -> f64 {
    let start = a.len() - a.len() / 4;
    a[start..].iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Snapshot of the flow: time, cosine coefficients of r(θ, t), and the surface they define.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    t: f64,
    coeffs: Vec<f64>,
    surface: AxisymSurface,
}

impl FlowState {
    /// Projects the profile of `surface` onto `modes` cosine modes.
    pub fn from_surface(surface: &AxisymSurface, modes: usize) -> Result<Self> {
        if modes < 4 {
            return invalid("flow needs at least four modes");
        }
        let fine = Spectral::with_grid(modes, 4 * modes);
        let values: Vec<f64> = fine.grid.iter().map(|&t| surface.profile().jet(t).0).collect();
        let coeffs = fine.project(&values);
        if tail(&coeffs) > TAIL_GUARD * coeffs[0].abs() {
            return Err(Error::ResolutionExhausted { t: 0.0 });
        }
        Self::from_coeffs(surface.dim(), 0.0, coeffs)
    }

    pub fn from_coeffs(n: usize, t: f64, coeffs: Vec<f64>) -> Result<Self> {
        let surface = AxisymSurface::cosine_series(n, coeffs.clone())?;
        Ok(Self { t, coeffs, surface })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn surface(&self) -> &AxisymSurface {
        &self.surface
    }

    pub fn dim(&self) -> usize {
        self.surface.dim()
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len()
    }

    /// Largest dt for which classical RK4 stays inside its stability region, from the
    /// linearization of the transport speed in r and r′.
    pub fn stability_bound(&self) -> f64 {
        let sp = Spectral::new(self.modes());
        let mut rate = 0.0f64;
        for (r, dr) in sp.eval(&self.coeffs) {
            let (s, c) = (r.sinh(), r.cosh());
            let w = (s * s + dr * dr).sqrt();
            let d_dr = (c * dr / (s * w)).abs();
            let d_r = (c * c / w - w / (s * s)).abs();
            rate = rate.max(self.modes() as f64 * d_dr + d_r);
        }
        2.5 / rate.max(1e-300)
    }

    /// (min r, max r) over the collocation grid and both poles.
    pub fn radius_range(&self) -> (f64, f64) {
        let sp = Spectral::new(self.modes());
        let (a, b) = pole_values(&self.coeffs);
        sp.eval(&self.coeffs).iter().map(|p| p.0).chain([a, b]).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)))
    }

    fn rhs(&self, sp: &Spectral, a: &[f64]) -> Result<Vec<f64>> {
        let vals = sp.eval(a);
        if vals.iter().any(|&(r, _)| !(r > 0.0)) {
            return Err(Error::FlowExtinct { t: self.t });
        }
        let f: Vec<f64> = vals.iter().map(|&(r, d)| speed(r, d)).collect();
        Ok(sp.project(&f))
    }

    /// One RK4 step of signed size `dt`; negative steps run the flow backwards.
    pub(crate) fn advance(&self, dt: f64) -> Result<Self> {
        let sp = Spectral::new(self.modes());
        let a = &self.coeffs;
        let axpy = |c: f64, k: &[f64]| a.iter().zip(k).map(|(x, y)| x + c * y).collect::<Vec<f64>>();
        let k1 = self.rhs(&sp, a)?;
        let k2 = self.rhs(&sp, &axpy(0.5 * dt, &k1))?;
        let k3 = self.rhs(&sp, &axpy(0.5 * dt, &k2))?;
        let k4 = self.rhs(&sp, &axpy(dt, &k3))?;
        let next: Vec<f64> = (0..a.len()).map(|m| a[m] + dt / 6.0 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m])).collect();
        let (north, south) = pole_values(&next);
        if sp.eval(&next).iter().any(|&(r, _)| !(r > 0.0)) || !(north > 0.0) || !(south > 0.0) {
            return Err(Error::FlowExtinct { t: self.t });
        }
        if !(tail(&next) <= TAIL_GUARD * next[0].abs()) {
            return Err(Error::ResolutionExhausted { t: self.t });
        }
        Self::from_coeffs(self.dim(), self.t + dt, next)
    }

    /// One RK4 step with 0 < dt ≤ [`FlowState::stability_bound`].
    pub fn step(&self, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !(dt <= self.stability_bound()) {
            return invalid(format!("step {dt} outside (0, {}]", self.stability_bound()));
        }
        self.advance(dt)
    }
}

/// Step-size and stopping controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowPolicy {
    pub modes: usize,
    /// dt ≤ cfl · min sinh r / (max cosh r · modes).
    pub cfl: f64,
    pub dt_max: f64,
    pub stop_radius: f64,
    pub horo_tol: f64,
    pub nodes: usize,
    pub max_halvings: usize,
    pub max_steps: usize,
}

impl Default for FlowPolicy {
    fn default() -> Self {
        Self {
            modes: DEFAULT_MODES,
            cfl: 0.25,
            dt_max: 1e-2,
            stop_radius: 0.02,
            horo_tol: 1e-6,
            nodes: DEFAULT_NODES,
            max_halvings: 12,
            max_steps: 1_000_000,
        }
    }
}

impl FlowPolicy {
    pub fn dt(&self, state: &FlowState) -> f64 {
        let (lo, hi) = state.radius_range();
        let cap = self.cfl * lo.sinh() / (hi.cosh() * state.modes() as f64);
        cap.min(self.dt_max).min(0.5 * state.stability_bound())
    }
}

/// The three grouped integrals whose sum is dE/dt along the flow, each ≤ 0 on
/// horospherically convex surfaces.
pub fn de_dt_terms(m: &SurfaceMeasure, k: usize) -> [f64; 3] {
    use Weight::*;
    let n = m.dim();
    let kf = k as f64;
    let g1 = -((n - k) as f64 - 2.0) * (m.weighted(k + 2, V2) - m.weighted(k, V2) - m.weighted(k + 2, One));
    let g2 = -2.0 * (m.weighted(k + 1, UV) - m.weighted(k, V2));
    let g3 = -kf * (m.weighted(k + 1, UV) - m.weighted(k - 1, UV) - m.weighted(k + 1, UOverV));
    [g1, g2, g3]
}

fn check_e_order(n: usize, k: usize) -> Result<()> {
    if k == 0 || k + 1 >= n {
        return invalid(format!("E is defined for 1 <= k < n - 1, got k = {k}, n = {n}"));
    }
    Ok(())
}

/// Centered finite-difference dE/dt across ±dt against the analytic grouped sum.
pub fn de_dt_check(state: &FlowState, k: usize, dt: f64) -> Result<Defect> {
    let n = state.dim();
    check_e_order(n, k)?;
    let rule = QuadratureRule::new(n, DEFAULT_NODES)?;
    let m = SurfaceMeasure::new(state.surface(), &rule)?;
    if m.kappa_min() < 1.0 - 1e-6 {
        return Err(Error::Hypothesis("surface is not horospherically convex".into()));
    }
    let e = |s: &FlowState| SurfaceMeasure::new(s.surface(), &rule).map(|m| m.e_functional(k));
    let fd = (e(&state.advance(dt)?)? - e(&state.advance(-dt)?)?) / (2.0 * dt);
    Ok(Defect::new(fd, de_dt_terms(&m, k).iter().sum()))
}

/// Centered-difference residuals of the evolution formulas under F = −V:
/// `area` (d|Σ|/dt = −∫Vσ₁), `potential_north`/`potential_south` (∂V/∂t = −uV at the
/// poles, where the radial and normal trajectories agree), `weighted_p{k}`
/// (d/dt∫Vp_k) and `inverse_weighted_p{k}_l{l}` (d/dt∫p_k/V^l, l = 1, 2).
pub fn evolution_identity_residuals(state: &FlowState, dt: f64) -> Result<BTreeMap<String, f64>> {
    let n = state.dim();
    let nodes = DEFAULT_NODES;
    let rule = QuadratureRule::new(n, nodes)?;
    let plus = state.advance(dt)?;
    let minus = state.advance(-dt)?;
    let mp = SurfaceMeasure::new(plus.surface(), &rule)?;
    let mm = SurfaceMeasure::new(minus.surface(), &rule)?;
    let m0 = SurfaceMeasure::new(state.surface(), &rule)?;
    let d = |f: &dyn Fn(&SurfaceMeasure) -> f64| (f(&mp) - f(&mm)) / (2.0 * dt);
    let mut out = BTreeMap::new();

    out.insert("area".to_string(), (d(&|m| m.area()) + m0.integrate(|s| s.v * s.sigma(1))).abs());

    for (name, theta) in [("potential_north", 0.0), ("potential_south", std::f64::consts::PI)] {
        let v = |s: &FlowState| s.surface().profile().jet(theta).0.cosh();
        let fd = (v(&plus) - v(&minus)) / (2.0 * dt);
        let p = state.surface().sample(theta);
        out.insert(name.to_string(), (fd + p.u * p.v).abs());
    }

    for k in 0..n {
        let kf = k as f64;
        let rest = (n - k) as f64 - 1.0;
        let fd = d(&|m| m.weighted(k, Weight::V));
        let rhs = -m0.integrate(|s| (kf + 1.0) * s.u * s.v * s.p_k(k) + rest * s.v * s.v * s.p_k(k + 1));
        out.insert(format!("weighted_p{k}"), (fd - rhs).abs());
        for l in [1i32, 2] {
            let fd = d(&|m| m.integrate(|s| s.p_k(k) / s.v.powi(l)));
            let rhs = m0.integrate(|s| ((l as f64 - kf) * s.u * s.p_k(k) - rest * s.v * s.p_k(k + 1)) / s.v.powi(l));
            out.insert(format!("inverse_weighted_p{k}_l{l}"), (fd - rhs).abs());
        }
    }
    Ok(out)
}

/// One accepted step of a flow run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowRow {
    pub t: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub area: f64,
    pub volume: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub kappa_min: f64,
    pub horo_flag: bool,
    #[serde(rename = "dEdt_fd")]
    pub de_dt_fd: f64,
    #[serde(rename = "dEdt_analytic")]
    pub de_dt_analytic: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    TimeLimit,
    Shrunk,
    StepLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrace {
    pub n: usize,
    pub k: usize,
    pub rows: Vec<FlowRow>,
    pub stop: StopReason,
    pub last: FlowState,
}

impl FlowTrace {
    /// t_stop + arctan(sinh r_min): exact for centered spheres, whose radius obeys
    /// arctan(sinh r(t)) = arctan(sinh r0) − t.
    pub fn extinction_estimate(&self) -> f64 {
        let row = self.rows.last().expect("trace has at least one row");
        row.t + row.r_min.sinh().atan()
    }

    /// Largest increase of E between consecutive rows.
    pub fn max_e_increase(&self) -> f64 {
        self.rows.windows(2).map(|w| w[1].e - w[0].e).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_kappa(&self) -> f64 {
        self.rows.iter().map(|r| r.kappa_min).fold(f64::INFINITY, f64::min)
    }
}

fn row_of(state: &FlowState, k: usize, rule: &QuadratureRule, policy: &FlowPolicy) -> Result<FlowRow> {
    let surf = state.surface();
    let m = SurfaceMeasure::new(surf, rule)?;
    let (r_min, r_max) = state.radius_range();
    let kappa_min = [0.0, std::f64::consts::PI].iter().map(|&t| surf.sample(t).kappa_min()).fold(m.kappa_min(), f64::min);
    Ok(FlowRow {
        t: state.t(),
        e: m.e_functional(k),
        area: m.area(),
        volume: crate::integrals::enclosed_volume(surf, rule)?,
        r_min,
        r_max,
        kappa_min,
        horo_flag: kappa_min >= 1.0 - policy.horo_tol,
        de_dt_fd: f64::NAN,
        de_dt_analytic: de_dt_terms(&m, k).iter().sum(),
    })
}

/// Flows `initial` until t ≥ t_max or the minimum radius drops below the stop radius.
/// A step that trips the tail guard is retried with half the step.
pub fn run(initial: &AxisymSurface, k: usize, t_max: f64, policy: &FlowPolicy) -> Result<FlowTrace> {
    let n = initial.dim();
    check_e_order(n, k)?;
    if !(t_max > 0.0) {
        return invalid("t_max must be positive");
    }
    let rule = QuadratureRule::new(n, policy.nodes)?;
    let mut state = FlowState::from_surface(initial, policy.modes)?;
    let first = row_of(&state, k, &rule, policy)?;
    if !first.horo_flag {
        return Err(Error::Hypothesis(format!("initial surface is not horospherically convex (kappa_min = {})", first.kappa_min)));
    }
    let mut rows = vec![first];
    let stop = loop {
        let row = rows.last().expect("nonempty");
        if row.r_min < policy.stop_radius {
            break StopReason::Shrunk;
        }
        if state.t() >= t_max * (1.0 - 1e-15) {
            break StopReason::TimeLimit;
        }
        if rows.len() > policy.max_steps {
            break StopReason::StepLimit;
        }
        let mut dt = policy.dt(&state).min(t_max - state.t());
        let mut halvings = 0;
        let next = loop {
            match state.advance(dt) {
                Err(Error::ResolutionExhausted { .. }) if halvings < policy.max_halvings => {
                    dt *= 0.5;
                    halvings += 1;
                }
                other => break other?,
            }
        };
        state = next;
        rows.push(row_of(&state, k, &rule, policy)?);
    };
    fill_fd(&mut rows);
    Ok(FlowTrace { n, k, rows, stop, last: state })
}

/// Three-point derivative on the nonuniform time grid, one-sided at the ends.
fn fill_fd(rows: &mut [FlowRow]) {
    let len = rows.len();
    if len < 2 {
        return;
    }
    let (t, e): (Vec<f64>, Vec<f64>) = rows.iter().map(|r| (r.t, r.e)).unzip();
    for i in 0..len {
        rows[i].de_dt_fd = if i == 0 {
            (e[1] - e[0]) / (t[1] - t[0])
        } else if i == len - 1 {
            (e[i] - e[i - 1]) / (t[i] - t[i - 1])
        } else {
            let (h0, h1) = (t[i] - t[i - 1], t[i + 1] - t[i]);
            (-h1 / (h0 * (h0 + h1))) * e[i - 1] + ((h1 - h0) / (h0 * h1)) * e[i] + (h0 / (h1 * (h0 + h1))) * e[i + 1]
        };
    }
}
