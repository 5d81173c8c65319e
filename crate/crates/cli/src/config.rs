//! Run configuration. See `CONFIG.md` in this crate for the schema.

use std::path::{Path, PathBuf};

use gbc_lab::flow::FlowPolicy;
use gbc_lab::hypersurface::SurfaceSpec;
use gbc_lab::quadrature::DEFAULT_NODES;
use gbc_lab::rotmass::MetricSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Optional guard: when present it must name the subcommand being run.
    pub command: Option<String>,
    /// Ambient dimensions n for the surface batteries.
    pub dims: Vec<usize>,
    /// Restricts every battery to these orders k when present.
    pub orders: Option<Vec<usize>>,
    pub nodes: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub tolerances: Tolerances,
    pub surfaces: Vec<SurfaceSpec>,
    pub tensors: TensorBattery,
    pub divergence: Vec<DivergenceCheck>,
    pub evolution: EvolutionBattery,
    pub mass: Vec<MassRun>,
    pub flow: Vec<FlowRun>,
    pub flow_policy: FlowPolicy,
    /// Set by `--n`: metric-based runs (divergence, mass, flow) outside this n are dropped.
    #[serde(skip)]
    pub slice_n: Option<usize>,
}

/// Relative tolerances, each applied as |defect| ≤ tol·max(|lhs|, |rhs|, 1) for
/// identities and defect ≥ −tol·max(|lhs|, |rhs|, 1) for inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub minkowski: f64,
    pub proposition: f64,
    pub tensor: f64,
    pub divergence: f64,
    pub evolution: f64,
    pub inequality: f64,
    /// Allowed rise of E between consecutive flow rows.
    pub flow_monotone: f64,
    pub penrose: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            minkowski: 1e-9,
            proposition: 1e-9,
            tensor: 1e-10,
            divergence: 1e-6,
            evolution: 1e-6,
            inequality: 1e-9,
            flow_monotone: 1e-10,
            penrose: 1e-4,
        }
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Self {
            minkowski: tol,
            proposition: tol,
            tensor: tol,
            divergence: tol,
            evolution: tol,
            inequality: tol,
            flow_monotone: tol,
            penrose: tol,
        }
    }
}

/// Random algebraic curvature tensors drawn from `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TensorBattery {
    pub count: usize,
}

impl Default for TensorBattery {
    fn default() -> Self {
        Self { count: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceCheck {
    pub metric: MetricSpec,
    pub k: usize,
    pub rho: f64,
    #[serde(default = "default_fd_step")]
    pub h: f64,
}

fn default_fd_step() -> f64 {
    1e-3
}

/// Evolution identities at t = 0 of the flow from each surface, for every n in `dims`,
/// with centered differences of step `dt` and `dt`/2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionBattery {
    pub surfaces: Vec<SurfaceSpec>,
    pub dt: f64,
}

impl Default for EvolutionBattery {
    fn default() -> Self {
        Self { surfaces: vec![SurfaceSpec::OffsetSphere { radius: 1.0, offset: 0.3 }], dt: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassRun {
    pub metric: MetricSpec,
    /// Defaults to the metric's own k for adS-Schwarzschild.
    pub k: Option<usize>,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
}

fn default_radii() -> Vec<f64> {
    vec![10.0, 20.0, 40.0, 80.0]
}

impl MassRun {
    pub fn order(&self) -> Result<usize, CliError> {
        match (&self.metric, self.k) {
            (_, Some(k)) => Ok(k),
            (MetricSpec::AdsSchwarzschild { k, .. }, None) => Ok(*k),
            _ => Err(CliError::Config("mass runs on hyperbolic or custom metrics need k".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowRun {
    pub n: usize,
    pub k: usize,
    pub surface: SurfaceSpec,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
}

fn default_t_max() -> f64 {
    10.0
}

impl Default for RunConfig {
    fn default() -> Self {
        use SurfaceSpec::*;
        Self {
            command: None,
            dims: vec![4, 5, 6],
            orders: None,
            nodes: DEFAULT_NODES,
            seed: 7,
            out: None,
            tolerances: Tolerances::default(),
            surfaces: vec![
                CenteredSphere { r0: 1.0 },
                OffsetSphere { radius: 1.0, offset: 0.3 },
                PerturbedSphere { r0: 1.0, eps: 0.05, mode: 2 },
                PerturbedSphere { r0: 0.8, eps: 0.03, mode: 3 },
            ],
            tensors: TensorBattery::default(),
            divergence: vec![
                DivergenceCheck { metric: MetricSpec::AdsSchwarzschild { n: 5, k: 2, m: 1.0 }, k: 2, rho: 3.0, h: 1e-3 },
                DivergenceCheck { metric: MetricSpec::AdsSchwarzschild { n: 7, k: 3, m: 1.0 }, k: 3, rho: 5.0, h: 1e-3 },
                DivergenceCheck { metric: MetricSpec::Hyperbolic { n: 5 }, k: 2, rho: 2.0, h: 1e-3 },
            ],
            evolution: EvolutionBattery::default(),
            mass: vec![
                MassRun { metric: MetricSpec::AdsSchwarzschild { n: 5, k: 2, m: 1.0 }, k: None, radii: default_radii() },
                MassRun { metric: MetricSpec::AdsSchwarzschild { n: 7, k: 2, m: 1.5 }, k: None, radii: default_radii() },
                MassRun { metric: MetricSpec::AdsSchwarzschild { n: 7, k: 3, m: 1.0 }, k: None, radii: default_radii() },
                MassRun { metric: MetricSpec::Hyperbolic { n: 6 }, k: Some(2), radii: default_radii() },
                MassRun { metric: MetricSpec::Custom { n: 5, terms: vec![(-2.0, -0.5), (0.5, -1.5)] }, k: Some(2), radii: default_radii() },
            ],
            flow: vec![
                FlowRun { n: 4, k: 1, surface: CenteredSphere { r0: 1.0 }, t_max: default_t_max() },
                FlowRun { n: 4, k: 1, surface: OffsetSphere { radius: 1.0, offset: 0.3 }, t_max: default_t_max() },
            ],
            flow_policy: FlowPolicy::default(),
            slice_n: None,
        }
    }
}

/// Command-line overrides applied on top of a file or the defaults.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub nodes: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub k: Option<usize>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, command: &str, over: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                Self::parse(&text)?
            }
            None => Self::default(),
        };
        if let Some(c) = &cfg.command {
            if c != command {
                return Err(CliError::Config(format!("config is for `{c}`, not `{command}`")));
            }
        }
        if let Some(out) = &over.out {
            cfg.out = Some(out.clone());
        }
        if let Some(nodes) = over.nodes {
            cfg.nodes = nodes;
            cfg.flow_policy.nodes = nodes;
        }
        if let Some(tol) = over.tol {
            cfg.tolerances = Tolerances::uniform(tol);
        }
        if let Some(seed) = over.seed {
            cfg.seed = seed;
        }
        if let Some(n) = over.n {
            cfg.dims = vec![n];
            cfg.slice_n = Some(n);
        }
        if let Some(k) = over.k {
            cfg.orders = Some(vec![k]);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn order_selected(&self, k: Option<usize>) -> bool {
        match (&self.orders, k) {
            (None, _) => true,
            (Some(ks), Some(k)) => ks.contains(&k),
            (Some(_), None) => false,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.dims.iter().any(|&n| n < 3) {
            return bad(format!("dims must be at least 3, got {:?}", self.dims));
        }
        if self.nodes == 0 {
            return bad("nodes must be positive".into());
        }
        let t = &self.tolerances;
        let all = [t.minkowski, t.proposition, t.tensor, t.divergence, t.evolution, t.inequality, t.flow_monotone, t.penrose];
        if all.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return bad("tolerances must be finite and non-negative".into());
        }
        for d in &self.divergence {
            let n = d.metric.dim();
            if d.k == 0 || 2 * d.k >= n {
                return bad(format!("divergence check needs 1 <= k and 2k < n, got n = {n}, k = {}", d.k));
            }
        }
        for run in &self.mass {
            let n = run.metric.dim();
            let k = run.order()?;
            if k == 0 || 2 * k >= n {
                return bad(format!("mass run needs 1 <= k and 2k < n, got n = {n}, k = {k}"));
            }
            if let MetricSpec::AdsSchwarzschild { k: own, .. } = run.metric {
                if own != k {
                    return bad(format!("adS-Schwarzschild metric has k = {own} but the run asks for k = {k}"));
                }
            }
        }
        for run in &self.flow {
            if run.k == 0 || run.k + 1 >= run.n {
                return bad(format!("flow run needs 1 <= k < n - 1, got n = {}, k = {}", run.n, run.k));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_roundtrip_through_toml() {
        let cfg = RunConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::parse("dims = [4]\nbogus = 1\n").is_err());
        assert!(RunConfig::parse("[tolerances]\nminkowsky = 1e-9\n").is_err());
        assert!(RunConfig::parse("[[surfaces]]\nkind = \"centered_sphere\"\nr0 = 1.0\nr1 = 2.0\n").is_err());
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = RunConfig::parse("dims = [5]\n[tolerances]\nminkowski = 1e-6\n").unwrap();
        assert_eq!(cfg.dims, vec![5]);
        assert_eq!(cfg.tolerances.minkowski, 1e-6);
        assert_eq!(cfg.tolerances.tensor, Tolerances::default().tensor);
        assert_eq!(cfg.surfaces, RunConfig::default().surfaces);
    }

    #[test]
    fn overrides_and_validation() {
        let over = Overrides { n: Some(5), k: Some(2), tol: Some(1e-3), nodes: Some(64), ..Default::default() };
        let cfg = RunConfig::load(None, "mass", &over).unwrap();
        assert_eq!(cfg.dims, vec![5]);
        assert!(cfg.order_selected(Some(2)) && !cfg.order_selected(Some(1)) && !cfg.order_selected(None));
        assert_eq!(cfg.tolerances.divergence, 1e-3);
        assert_eq!(cfg.flow_policy.nodes, 64);

        let mut bad = RunConfig::default();
        bad.mass = vec![MassRun { metric: MetricSpec::Hyperbolic { n: 4 }, k: Some(2), radii: default_radii() }];
        assert!(bad.validate().is_err());
        bad.mass = vec![MassRun { metric: MetricSpec::Hyperbolic { n: 6 }, k: None, radii: default_radii() }];
        assert!(bad.validate().is_err());
        assert!(RunConfig::parse("command = \"flow\"\n").unwrap().command.is_some());
    }
}
