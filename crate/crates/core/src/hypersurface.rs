//! Axisymmetric star-shaped closed hypersurfaces r = r(θ) in H^n.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::hyperbolic::{embedding_oracle, sphere_volume_constant, OracleGeometry};
use crate::quadrature::QuadratureRule;
use crate::symfunc::{binomial, Spectrum};

/// Radial profile with analytic derivatives in θ.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant { r0: f64 },
    /// Geodesic sphere of radius `radius` centered at distance `offset` on the axis θ = 0.
    Offset { radius: f64, offset: f64 },
    /// r0 + eps·P_mode(cos θ).
    Legendre { r0: f64, eps: f64, mode: usize },
    /// Σ a_j cos(jθ).
    Cosine { coeffs: Vec<f64> },
}

fn legendre_jet(mode: usize, x: f64) -> (f64, f64, f64) {
    // P, P', P'' in x
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    let (mut s0, mut s1) = (0.0, 0.0);
    if mode == 0 {
        return (1.0, 0.0, 0.0);
    }
    for k in 1..mode {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        let d2 = d0 + (2.0 * kf + 1.0) * p1;
        let s2 = s0 + (2.0 * kf + 1.0) * d1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
        s0 = s1;
        s1 = s2;
    }
    (p1, d1, s1)
}

impl Profile {
    /// (r, r′, r″) at θ.
    pub fn jet(&self, theta: f64) -> (f64, f64, f64) {
        match self {
            Profile::Constant { r0 } => (*r0, 0.0, 0.0),
            Profile::Offset { radius, offset } => {
                let (cd, sd) = (offset.cosh(), offset.sinh());
                let (ct, st) = (theta.cos(), theta.sin());
                let r = (sd * ct / cd).atanh() + (radius.cosh() / (cd * cd - sd * sd * ct * ct).sqrt()).acosh();
                let (cr, sr) = (r.cosh(), r.sinh());
                // implicit F(r, θ) = cosh d cosh r − sinh d sinh r cos θ − cosh R
                let f_r = cd * sr - sd * cr * ct;
                let f_t = sd * sr * st;
                let f_rr = cd * cr - sd * sr * ct;
                let f_rt = sd * cr * st;
                let f_tt = sd * sr * ct;
                let d1 = -f_t / f_r;
                let d2 = -(f_rr * d1 * d1 + 2.0 * f_rt * d1 + f_tt) / f_r;
                (r, d1, d2)
            }
            Profile::Legendre { r0, eps, mode } => {
                let (x, s) = (theta.cos(), theta.sin());
                let (p, dp, ddp) = legendre_jet(*mode, x);
                (r0 + eps * p, -eps * s * dp, eps * (s * s * ddp - x * dp))
            }
            Profile::Cosine { coeffs } => {
                let (c1, s1) = (theta.cos(), theta.sin());
                let (mut cm, mut c) = (c1, 1.0);
                let (mut sm, mut s) = (-s1, 0.0);
                let (mut r, mut d1, mut d2) = (0.0, 0.0, 0.0);
                for (j, a) in coeffs.iter().enumerate() {
                    let jf = j as f64;
                    r += a * c;
                    d1 -= jf * a * s;
                    d2 -= jf * jf * a * c;
                    let cn = 2.0 * c1 * c - cm;
                    let sn = 2.0 * c1 * s - sm;
                    cm = c;
                    c = cn;
                    sm = s;
                    s = sn;
                }
                (r, d1, d2)
            }
        }
    }
}

/// Geometry of the surface at one polar angle.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSample {
    pub theta: f64,
    pub r: f64,
    pub dr: f64,
    pub d2r: f64,
    pub kappa_polar: f64,
    /// Curvature along the orbit directions, multiplicity n − 2.
    pub kappa_azimuthal: f64,
    pub v: f64,
    pub u: f64,
    /// |∇V|² for the induced metric.
    pub grad_v_sq: f64,
    /// dμ density against dθ after integrating out S^{n−2}.
    pub area_weight: f64,
    /// `area_weight` without its sin^{n−2}θ factor.
    pub area_density: f64,
    /// Normalized mean curvatures p_0, …, p_{n−1}.
    pub p: Vec<f64>,
}

impl SurfaceSample {
    pub fn spectrum(&self) -> Spectrum {
        let m = self.p.len() - 1;
        let mut v = vec![self.kappa_azimuthal; m];
        v[0] = self.kappa_polar;
        Spectrum::new(v).expect("finite curvatures")
    }

    /// σ_k of the principal curvatures; zero outside 0 ≤ k ≤ n − 1.
    pub fn sigma(&self, k: usize) -> f64 {
        let m = self.p.len() - 1;
        if k > m {
            return 0.0;
        }
        binomial(m, k) * self.p[k]
    }

    pub fn p_k(&self, k: usize) -> f64 {
        self.p.get(k).copied().unwrap_or(0.0)
    }

    pub fn kappa_min(&self) -> f64 {
        self.kappa_polar.min(self.kappa_azimuthal)
    }
}

/// Star-shaped axisymmetric closed hypersurface of H^n.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisymSurface {
    n: usize,
    profile: Profile,
    label: String,
    construction_horo_convex: bool,
}

const SCAN: usize = 512;

impl AxisymSurface {
    /// Validates positivity and pole regularity of an arbitrary profile.
    pub fn from_profile(n: usize, profile: Profile, label: impl Into<String>) -> Result<Self> {
        if n < 3 {
            return invalid("ambient dimension must be at least 3");
        }
        for i in 0..=SCAN {
            let t = std::f64::consts::PI * i as f64 / SCAN as f64;
            let (r, d1, d2) = profile.jet(t);
            if !(r > 0.0) || !r.is_finite() || !d1.is_finite() || !d2.is_finite() {
                return invalid(format!("profile not positive and finite at theta = {t}"));
            }
        }
        for pole in [0.0, std::f64::consts::PI] {
            if profile.jet(pole).1.abs() > 1e-8 {
                return invalid("profile is not smooth at the poles");
            }
        }
        let mut s = Self { n, profile, label: label.into(), construction_horo_convex: true };
        s.construction_horo_convex = (0..=SCAN).all(|i| {
            let t = std::f64::consts::PI * (i as f64 + 0.5) / (SCAN as f64 + 1.0);
            s.sample(t).kappa_min() >= 1.0
        });
        Ok(s)
    }

    pub fn centered_sphere(n: usize, r0: f64) -> Result<Self> {
        if !(r0 > 0.0) || !r0.is_finite() {
            return invalid(format!("sphere radius must be positive, got {r0}"));
        }
        Self::from_profile(n, Profile::Constant { r0 }, format!("centered_sphere(r0={r0})"))
    }

    pub fn offset_sphere(n: usize, radius: f64, offset: f64) -> Result<Self> {
        if !(offset >= 0.0) || !(offset < radius) || !radius.is_finite() {
            return invalid(format!("offset sphere needs 0 <= d < R, got R = {radius}, d = {offset}"));
        }
        if offset == 0.0 {
            return Self::from_profile(n, Profile::Constant { r0: radius }, format!("offset_sphere(R={radius},d=0)"));
        }
        Self::from_profile(n, Profile::Offset { radius, offset }, format!("offset_sphere(R={radius},d={offset})"))
    }

    /// r0 + eps·P_mode(cos θ). The result may fail horospherical convexity; see
    /// [`AxisymSurface::construction_horo_convex`].
    pub fn perturbed_sphere(n: usize, r0: f64, eps: f64, mode: usize) -> Result<Self> {
        if !(r0 > 0.0) || !eps.is_finite() {
            return invalid("perturbed sphere needs r0 > 0 and finite eps");
        }
        Self::from_profile(n, Profile::Legendre { r0, eps, mode }, format!("perturbed_sphere(r0={r0},eps={eps},mode={mode})"))
    }

    pub fn cosine_series(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return invalid("cosine series needs at least one coefficient");
        }
        Self::from_profile(n, Profile::Cosine { coeffs }, "cosine_series")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Horospherical convexity measured on a fine scan at construction time.
    pub fn construction_horo_convex(&self) -> bool {
        self.construction_horo_convex
    }

    pub fn is_centered_sphere(&self) -> bool {
        matches!(self.profile, Profile::Constant { .. })
    }

    pub fn sample(&self, theta: f64) -> SurfaceSample {
        let n = self.n;
        let (r, dr, d2r) = self.profile.jet(theta);
        let (sr, cr) = (r.sinh(), r.cosh());
        let w = (sr * sr + dr * dr).sqrt();
        let kappa_polar = (sr * sr * cr + 2.0 * cr * dr * dr - sr * d2r) / w.powi(3);
        let st = theta.sin();
        let dr_cot = if st.abs() < 1e-9 { d2r } else { dr * theta.cos() / st };
        let kappa_azimuthal = (sr * cr - dr_cot) / (sr * w);
        let omega = sphere_volume_constant(n - 1);
        let area_density = omega * w * sr.powi(n as i32 - 2);
        let mut spec = vec![kappa_azimuthal; n - 1];
        spec[0] = kappa_polar;
        let sig = Spectrum::new(spec).map(|s| s.elementary_all()).unwrap_or_else(|_| vec![f64::NAN; n]);
        let p = sig.iter().enumerate().map(|(k, s)| s / binomial(n - 1, k)).collect();
        SurfaceSample {
            theta,
            r,
            dr,
            d2r,
            kappa_polar,
            kappa_azimuthal,
            v: cr,
            u: sr * sr / w,
            grad_v_sq: sr * sr * dr * dr / (w * w),
            area_weight: area_density * st.powi(n as i32 - 2),
            area_density,
            p,
        }
    }

    /// Smallest principal curvature over the rule's nodes.
    pub fn kappa_min(&self, rule: &QuadratureRule) -> f64 {
        rule.nodes().iter().map(|&t| self.sample(t).kappa_min()).fold(f64::INFINITY, f64::min)
    }

    pub fn horospherical_convex(&self, tol: f64, rule: &QuadratureRule) -> bool {
        self.kappa_min(rule) >= 1.0 - tol
    }

    pub fn convex(&self, rule: &QuadratureRule) -> bool {
        self.kappa_min(rule) > 0.0
    }

    pub fn r_range(&self, rule: &QuadratureRule) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for t in rule.nodes().iter().copied().chain([0.0, std::f64::consts::PI]) {
            let r = self.profile.jet(t).0;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        (lo, hi)
    }

    /// Embedding into the hyperboloid, parametrized by θ and hyperspherical
    /// angles φ_1, …, φ_{n−2} of the orbit S^{n−2}.
    pub fn embedding(&self, params: &[f64]) -> Vec<f64> {
        let theta = params[0];
        let r = self.profile.jet(theta).0;
        let omega = unit_sphere_point(&params[1..]);
        let mut x = Vec::with_capacity(self.n + 1);
        x.push(r.cosh());
        x.push(r.sinh() * theta.cos());
        x.extend(omega.iter().map(|w| r.sinh() * theta.sin() * w));
        x
    }

    /// Finite-difference geometry of the embedding at (θ, φ).
    pub fn oracle(&self, theta: f64, phi: &[f64], h: f64) -> Result<OracleGeometry> {
        if phi.len() != self.n - 2 {
            return invalid("need n − 2 orbit angles");
        }
        let mut p = vec![theta];
        p.extend_from_slice(phi);
        embedding_oracle(|q| self.embedding(q), &p, h)
    }
}

/// Point of S^{d} ⊂ R^{d+1} from hyperspherical angles φ_1, …, φ_d.
pub fn unit_sphere_point(phi: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phi.len() + 1);
    let mut prod = 1.0;
    for a in phi {
        out.push(prod * a.cos());
        prod *= a.sin();
    }
    out.push(prod);
    out
}

/// Volume density of the hyperspherical chart of [`unit_sphere_point`].
pub fn unit_sphere_jacobian(phi: &[f64]) -> f64 {
    let d = phi.len();
    phi.iter().enumerate().map(|(i, a)| a.sin().powi((d - 1 - i) as i32)).product()
}

/// Surface description used by configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSpec {
    CenteredSphere { r0: f64 },
    OffsetSphere { radius: f64, offset: f64 },
    PerturbedSphere { r0: f64, eps: f64, mode: usize },
}

impl SurfaceSpec {
    pub fn build(&self, n: usize) -> Result<AxisymSurface> {
        match *self {
            SurfaceSpec::CenteredSphere { r0 } => AxisymSurface::centered_sphere(n, r0),
            SurfaceSpec::OffsetSphere { radius, offset } => AxisymSurface::offset_sphere(n, radius, offset),
            SurfaceSpec::PerturbedSphere { r0, eps, mode } => AxisymSurface::perturbed_sphere(n, r0, eps, mode),
        }
    }
}
