//! Generalized Kronecker delta contractions of dense curvature tensors:
//! Gauss-Bonnet curvatures L_k, the modified tensor, and the P_(k) tensors.

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::symfunc::{binomial, factorial};
use crate::warped::{self, WarpedProfile};

/// A positive-definite metric with its cached inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTensor {
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
}

impl MetricTensor {
    pub fn new(g: DMatrix<f64>) -> Result<Self> {
        let m = g.nrows();
        if m == 0 || g.ncols() != m {
            return invalid("metric must be square");
        }
        if (&g - g.transpose()).amax() > 1e-12 * g.amax().max(1.0) {
            return invalid("metric must be symmetric");
        }
        let Some(chol) = g.clone().cholesky() else {
            return invalid("metric must be positive definite");
        };
        let g_inv = chol.inverse();
        let g_inv = (&g_inv + g_inv.transpose()) * 0.5;
        Ok(Self { g, g_inv })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            g: DMatrix::identity(m, m),
            g_inv: DMatrix::identity(m, m),
        }
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn inv(&self) -> &DMatrix<f64> {
        &self.g_inv
    }
}

#[inline]
fn idx4(m: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * m + j) * m + k) * m + l
}

/// Kulkarni-Nomizu product of two symmetric bilinear forms.
pub fn kulkarni_nomizu(h: &DMatrix<f64>, q: &DMatrix<f64>) -> Vec<f64> {
    let m = h.nrows();
    let mut out = vec![0.0; m.pow(4)];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    out[idx4(m, i, j, k, l)] = h[(i, k)] * q[(j, l)] + h[(j, l)] * q[(i, k)]
                        - h[(i, l)] * q[(j, k)]
                        - h[(j, k)] * q[(i, l)];
                }
            }
        }
    }
    out
}

/// Fully covariant curvature tensor R_{ijkl} with R_{ijij} the sectional curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannTensor {
    dim: usize,
    values: Vec<f64>,
    metric: MetricTensor,
}

const SYMMETRY_TOL: f64 = 1e-12;

impl RiemannTensor {
    /// Validates antisymmetry, pair symmetry and the first Bianchi identity.
    pub fn new(values: Vec<f64>, metric: MetricTensor) -> Result<Self> {
        let m = metric.dim();
        if values.len() != m.pow(4) {
            return invalid(format!("expected {} components, got {}", m.pow(4), values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("curvature components must be finite");
        }
        let t = Self { dim: m, values, metric };
        let scale = t.values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let defect = t.symmetry_defect();
        if defect > SYMMETRY_TOL * scale {
            return invalid(format!("curvature symmetries violated by {defect:e}"));
        }
        Ok(t)
    }

    pub fn zero(metric: MetricTensor) -> Self {
        let m = metric.dim();
        Self { dim: m, values: vec![0.0; m.pow(4)], metric }
    }

    /// Constant sectional curvature `kappa`.
    pub fn constant_curvature(metric: MetricTensor, kappa: f64) -> Self {
        let mut values = kulkarni_nomizu(metric.g(), metric.g());
        values.iter_mut().for_each(|v| *v *= 0.5 * kappa);
        Self { dim: metric.dim(), values, metric }
    }

    /// Curvature of a warped form: sectional value `radial` on planes containing the
    /// unit covector `normal`, `tangential` on planes orthogonal to it.
    pub fn two_eigenvalue(metric: MetricTensor, normal: &[f64], radial: f64, tangential: f64) -> Result<Self> {
        let m = metric.dim();
        if normal.len() != m {
            return invalid("normal covector has wrong length");
        }
        let nv = nalgebra::DVector::from_column_slice(normal);
        let norm2 = (metric.inv() * &nv).dot(&nv);
        if (norm2 - 1.0).abs() > 1e-10 {
            return invalid("normal covector must be unit length");
        }
        let nn = &nv * nv.transpose();
        let gt = metric.g() - &nn;
        let a = kulkarni_nomizu(&gt, &gt);
        let b = kulkarni_nomizu(&gt, &nn);
        let values = a.iter().zip(&b).map(|(x, y)| 0.5 * tangential * x + radial * y).collect();
        Ok(Self { dim: m, values, metric })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> &MetricTensor {
        &self.metric
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.values[idx4(self.dim, i, j, k, l)]
    }

    /// Largest violation of the algebraic curvature symmetries.
    pub fn symmetry_defect(&self) -> f64 {
        let m = self.dim;
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let r = self.get(i, j, k, l);
                        worst = worst
                            .max((r + self.get(j, i, k, l)).abs())
                            .max((r + self.get(i, j, l, k)).abs())
                            .max((r - self.get(k, l, i, j)).abs())
                            .max((r + self.get(j, k, i, l) + self.get(k, i, j, l)).abs());
                    }
                }
            }
        }
        worst
    }

    /// R_{ij}^{kl}, indices raised with the inverse metric.
    pub fn mixed(&self) -> Vec<f64> {
        let m = self.dim;
        let gi = self.metric.inv();
        let mut half = vec![0.0; m.pow(4)];
        for i in 0..m {
            for j in 0..m {
                for a in 0..m {
                    for l in 0..m {
                        let mut acc = 0.0;
                        for b in 0..m {
                            acc += self.get(i, j, a, b) * gi[(b, l)];
                        }
                        half[idx4(m, i, j, a, l)] = acc;
                    }
                }
            }
        }
        let mut out = vec![0.0; m.pow(4)];
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let mut acc = 0.0;
                        for a in 0..m {
                            acc += half[idx4(m, i, j, a, l)] * gi[(a, k)];
                        }
                        out[idx4(m, i, j, k, l)] = acc;
                    }
                }
            }
        }
        out
    }

    /// Ric_{jl} = g^{ik} R_{ijkl}.
    pub fn ricci(&self) -> DMatrix<f64> {
        let m = self.dim;
        let gi = self.metric.inv();
        DMatrix::from_fn(m, m, |j, l| {
            let mut acc = 0.0;
            for i in 0..m {
                for k in 0..m {
                    acc += gi[(i, k)] * self.get(i, j, k, l);
                }
            }
            acc
        })
    }

    pub fn scalar(&self) -> f64 {
        let gi = self.metric.inv();
        let ric = self.ricci();
        gi.component_mul(&ric).sum()
    }

    /// R_{ijkl} R^{ijkl}.
    pub fn norm_squared(&self) -> f64 {
        let m = self.dim;
        let mixed = self.mixed();
        let gi = self.metric.inv();
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let mut up = 0.0;
                        for a in 0..m {
                            for b in 0..m {
                                up += gi[(i, a)] * gi[(j, b)] * mixed[idx4(m, a, b, k, l)];
                            }
                        }
                        acc += self.get(i, j, k, l) * up;
                    }
                }
            }
        }
        acc
    }
}

/// Ric_{ij} Ric^{ij}.
pub fn ricci_norm_squared(r: &RiemannTensor) -> f64 {
    let ric = r.ricci();
    let gi = r.metric().inv();
    let up = gi * &ric * gi;
    ric.component_mul(&up).sum()
}

/// A four-index tensor P^{stjl} (all indices up).
#[derive(Debug, Clone, PartialEq)]
pub struct FourTensor {
    dim: usize,
    values: Vec<f64>,
}

impl FourTensor {
    pub fn zero(dim: usize) -> Self {
        Self { dim, values: vec![0.0; dim.pow(4)] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, s: usize, t: usize, j: usize, l: usize) -> f64 {
        self.values[idx4(self.dim, s, t, j, l)]
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, c: f64, other: &FourTensor) -> FourTensor {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        FourTensor { dim: self.dim, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Largest violation of P^{stjl} = −P^{tsjl} = −P^{stlj} = P^{jlst}.
    pub fn symmetry_defect(&self) -> f64 {
        let m = self.dim;
        let mut worst = 0.0f64;
        for s in 0..m {
            for t in 0..m {
                for j in 0..m {
                    for l in 0..m {
                        let p = self.get(s, t, j, l);
                        worst = worst
                            .max((p + self.get(t, s, j, l)).abs())
                            .max((p + self.get(s, t, l, j)).abs())
                            .max((p - self.get(j, l, s, t)).abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest cyclic sum P^{stjl} + P^{tjsl} + P^{jstl}.
    pub fn bianchi_defect(&self) -> f64 {
        let m = self.dim;
        let mut worst = 0.0f64;
        for s in 0..m {
            for t in 0..m {
                for j in 0..m {
                    for l in 0..m {
                        worst = worst.max((self.get(s, t, j, l) + self.get(t, j, s, l) + self.get(j, s, t, l)).abs());
                    }
                }
            }
        }
        worst
    }

    /// R_{stjl} P^{stjl}.
    pub fn contract(&self, r: &RiemannTensor) -> f64 {
        self.values.iter().zip(r.values()).map(|(p, q)| p * q).sum()
    }
}

/// Determinant of the matrix of single deltas: the permutation sign, or 0.
pub fn generalized_delta(upper: &[usize], lower: &[usize]) -> i32 {
    if upper.len() != lower.len() {
        return 0;
    }
    let mut pos = Vec::with_capacity(lower.len());
    for l in lower {
        match upper.iter().position(|u| u == l) {
            Some(p) if !pos.contains(&p) => pos.push(p),
            _ => return 0,
        }
    }
    for (a, u) in upper.iter().enumerate() {
        if upper[a + 1..].contains(u) {
            return 0;
        }
    }
    permutation_sign(&pos)
}

fn permutation_sign(p: &[usize]) -> i32 {
    let mut sign = 1;
    for a in 0..p.len() {
        for b in a + 1..p.len() {
            if p[a] > p[b] {
                sign = -sign;
            }
        }
    }
    sign
}

/// All permutations of `0..r` with their signs.
fn signed_permutations(r: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut perms = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; r], &mut perms);
    perms
        .into_iter()
        .map(|p| {
            let s = permutation_sign(&p) as f64;
            (p, s)
        })
        .collect()
}

/// Sets of `count` disjoint increasing pairs drawn from `0..m`, avoiding `forbidden`,
/// listed with first elements increasing.
fn pair_sets(m: usize, count: usize, forbidden: &[usize]) -> Vec<Vec<(usize, usize)>> {
    fn rec(m: usize, count: usize, start: usize, used: &mut Vec<bool>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if cur.len() == count {
            out.push(cur.clone());
            return;
        }
        for a in start..m {
            if used[a] {
                continue;
            }
            used[a] = true;
            for b in a + 1..m {
                if used[b] {
                    continue;
                }
                used[b] = true;
                cur.push((a, b));
                rec(m, count, a + 1, used, cur, out);
                cur.pop();
                used[b] = false;
            }
            used[a] = false;
        }
    }
    let mut used = vec![false; m];
    for &f in forbidden {
        used[f] = true;
    }
    let mut out = Vec::new();
    rec(m, count, 0, &mut used, &mut Vec::new(), &mut out);
    out
}

/// L_k = 2^{-k} δ^{i_1…i_{2k}}_{j_1…j_{2k}} Π R_{i i}^{j j}; zero when 2k > m.
pub fn gauss_bonnet_lk(r: &RiemannTensor, k: usize) -> f64 {
    let m = r.dim();
    if k == 0 {
        return 1.0;
    }
    if 2 * k > m {
        return 0.0;
    }
    let mixed = r.mixed();
    let perms = signed_permutations(2 * k);
    let mut total = 0.0;
    for pairs in pair_sets(m, k, &[]) {
        let upper: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        let mut lower = vec![0usize; 2 * k];
        for (p, sign) in &perms {
            for (slot, &q) in p.iter().enumerate() {
                lower[slot] = upper[q];
            }
            if (0..k).any(|a| lower[2 * a] > lower[2 * a + 1]) {
                continue;
            }
            let mut prod = *sign;
            for (a, &(i1, i2)) in pairs.iter().enumerate() {
                prod *= mixed[idx4(m, i1, i2, lower[2 * a], lower[2 * a + 1])];
            }
            total += prod;
        }
    }
    total * 2f64.powi(k as i32) * factorial(k)
}

/// R̃_{ijsl} = R_{ijsl} + g_{is} g_{jl} − g_{il} g_{js}.
pub fn modified_riemann(r: &RiemannTensor) -> RiemannTensor {
    shift(r, 1.0)
}

/// Inverse of [`modified_riemann`].
pub fn unmodified_riemann(r: &RiemannTensor) -> RiemannTensor {
    shift(r, -1.0)
}

fn shift(r: &RiemannTensor, c: f64) -> RiemannTensor {
    let m = r.dim();
    let g = r.metric().g();
    let mut values = r.values().to_vec();
    for i in 0..m {
        for j in 0..m {
            for s in 0..m {
                for l in 0..m {
                    values[idx4(m, i, j, s, l)] += c * (g[(i, s)] * g[(j, l)] - g[(i, l)] * g[(j, s)]);
                }
            }
        }
    }
    RiemannTensor { dim: m, values, metric: r.metric().clone() }
}

/// P_(k)^{stjl}, or P̃_(k) built from the modified tensor when `modified`.
pub fn p_tensor(r: &RiemannTensor, k: usize, modified: bool) -> Result<FourTensor> {
    let m = r.dim();
    if k == 0 || 2 * k > m {
        return invalid(format!("P tensor needs 1 <= k and 2k <= {m}, got k = {k}"));
    }
    let base;
    let r = if modified {
        base = modified_riemann(r);
        &base
    } else {
        r
    };
    let mixed = r.mixed();
    let perms = signed_permutations(2 * k);
    let mut mixed_p = vec![0.0; m.pow(4)];
    for pairs in pair_sets(m, k - 1, &[]) {
        let used: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        for s in 0..m {
            for t in 0..m {
                if s == t || used.contains(&s) || used.contains(&t) {
                    continue;
                }
                let mut upper = used.clone();
                upper.push(s);
                upper.push(t);
                let mut lower = vec![0usize; 2 * k];
                for (p, sign) in &perms {
                    for (slot, &q) in p.iter().enumerate() {
                        lower[slot] = upper[q];
                    }
                    if (0..k - 1).any(|a| lower[2 * a] > lower[2 * a + 1]) {
                        continue;
                    }
                    let mut prod = *sign;
                    for (a, &(i1, i2)) in pairs.iter().enumerate() {
                        prod *= mixed[idx4(m, i1, i2, lower[2 * a], lower[2 * a + 1])];
                    }
                    mixed_p[idx4(m, s, t, lower[2 * k - 2], lower[2 * k - 1])] += prod;
                }
            }
        }
    }
    let prefactor = 2f64.powi(k as i32 - 2) * factorial(k - 1);
    let gi = r.metric().inv();
    let mut half = vec![0.0; m.pow(4)];
    for s in 0..m {
        for t in 0..m {
            for a in 0..m {
                for l in 0..m {
                    let mut acc = 0.0;
                    for b in 0..m {
                        acc += mixed_p[idx4(m, s, t, a, b)] * gi[(b, l)];
                    }
                    half[idx4(m, s, t, a, l)] = acc;
                }
            }
        }
    }
    let mut values = vec![0.0; m.pow(4)];
    for s in 0..m {
        for t in 0..m {
            for j in 0..m {
                for l in 0..m {
                    let mut acc = 0.0;
                    for a in 0..m {
                        acc += half[idx4(m, s, t, a, l)] * gi[(a, j)];
                    }
                    values[idx4(m, s, t, j, l)] = prefactor * acc;
                }
            }
        }
    }
    Ok(FourTensor { dim: m, values })
}

/// L̃_k for a curvature operator with modified sectional value `a` on the n−1 planes
/// containing a fixed direction and `c` on all others.
pub fn two_eigenvalue_lk(a: f64, c: f64, n: usize, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if 2 * k > n {
        return 0.0;
    }
    factorial(2 * k) * (binomial(n - 1, 2 * k) * c.powi(k as i32) + binomial(n - 1, 2 * k - 1) * a * c.powi(k as i32 - 1))
}

/// Max-norm of a finite-difference ∇_s P̃^{stjl} for a rotationally symmetric metric,
/// evaluated at the point ρ·e_0 of its Cartesian chart. Central differences with step
/// `h` for P̃; Christoffel symbols from a high-order stencil.
pub fn divergence_residual<W: WarpedProfile + ?Sized>(metric: &W, k: usize, rho: f64, h: f64) -> Result<f64> {
    let n = metric.dim();
    if k == 0 || 2 * k > n {
        return invalid(format!("divergence residual needs 1 <= k and 2k <= {n}"));
    }
    if !(h > 0.0) || h >= 0.5 * (rho - metric.rho_min()) {
        return invalid("finite-difference step must be positive and stay inside the domain");
    }
    warped::check_radius(metric, rho)?;
    let mut x0 = vec![0.0; n];
    x0[0] = rho;
    let p_at = |x: &[f64]| -> Result<FourTensor> { p_tensor(&warped::chart_modified_riemann(metric, x)?, k, false) };
    let p0 = p_at(&x0)?;
    let gamma = warped::christoffel(metric, &x0)?;
    let mut dp = Vec::with_capacity(n);
    for s in 0..n {
        let mut xp = x0.clone();
        let mut xm = x0.clone();
        xp[s] += h;
        xm[s] -= h;
        let pp = p_at(&xp)?;
        let pm = p_at(&xm)?;
        dp.push(pp.add_scaled(-1.0, &pm));
    }
    let mut worst = 0.0f64;
    for t in 0..n {
        for j in 0..n {
            for l in 0..n {
                let mut acc = 0.0;
                for s in 0..n {
                    acc += dp[s].get(s, t, j, l) / (2.0 * h);
                    for a in 0..n {
                        acc += gamma[s][s][a] * p0.get(a, t, j, l)
                            + gamma[t][s][a] * p0.get(s, a, j, l)
                            + gamma[j][s][a] * p0.get(s, t, a, l)
                            + gamma[l][s][a] * p0.get(s, t, j, a);
                    }
                }
                worst = worst.max(acc.abs());
            }
        }
    }
    Ok(worst)
}
