//! Elementary symmetric functions, normalized mean curvatures and Newton
//! transformations.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Result};

/// Binomial coefficient as a float; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// `n!` as a float.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// A finite list of eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("spectrum must contain at least one value");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("spectrum values must be finite");
        }
        Ok(Self { values })
    }

    /// `m` copies of `c`.
    pub fn uniform(c: f64, m: usize) -> Result<Self> {
        Self::new(vec![c; m])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// All of σ_0, …, σ_m at once.
    pub fn elementary_all(&self) -> Vec<f64> {
        let m = self.values.len();
        let mut e = vec![0.0; m + 1];
        e[0] = 1.0;
        for (i, &x) in self.values.iter().enumerate() {
            for j in (1..=i + 1).rev() {
                e[j] += x * e[j - 1];
            }
        }
        e
    }
}

/// σ_k of the spectrum; zero for `k > m`.
pub fn elementary_symmetric(k: usize, s: &Spectrum) -> f64 {
    if k > s.len() {
        return 0.0;
    }
    s.elementary_all()[k]
}

/// p_k = σ_k / C(m, k).
pub fn normalized_p(k: usize, s: &Spectrum) -> f64 {
    if k > s.len() {
        return 0.0;
    }
    elementary_symmetric(k, s) / binomial(s.len(), k)
}

/// True iff σ_j(s) > 0 for every 1 ≤ j ≤ k.
pub fn garding_positive(k: usize, s: &Spectrum) -> bool {
    let e = s.elementary_all();
    (1..=k.min(s.len())).all(|j| e[j] > 0.0) && k <= s.len()
}

/// A (1,1)-tensor B^i_j that is self-adjoint for a positive-definite metric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricOperator {
    entries: DMatrix<f64>,
    metric: DMatrix<f64>,
}

const SYMMETRY_TOL: f64 = 1e-12;

impl SymmetricOperator {
    /// Plain symmetric matrix (identity metric).
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let m = entries.nrows();
        Self::with_metric(entries, DMatrix::identity(m, m))
    }

    /// Mixed tensor `entries[(i, j)] = B^i_j` with `g B` symmetric.
    pub fn with_metric(entries: DMatrix<f64>, metric: DMatrix<f64>) -> Result<Self> {
        let m = entries.nrows();
        if m == 0 || entries.ncols() != m || metric.nrows() != m || metric.ncols() != m {
            return invalid("operator and metric must be square of equal size");
        }
        if entries.iter().chain(metric.iter()).any(|v| !v.is_finite()) {
            return invalid("operator entries must be finite");
        }
        if metric.clone().cholesky().is_none() || asymmetry(&metric) > SYMMETRY_TOL {
            return invalid("metric must be symmetric positive definite");
        }
        let lowered = &metric * &entries;
        if asymmetry(&lowered) > SYMMETRY_TOL {
            return invalid("operator is not self-adjoint for the metric");
        }
        Ok(Self { entries, metric })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    /// Eigenvalues in ascending order, via g^{1/2} B g^{-1/2}.
    pub fn spectrum(&self) -> Spectrum {
        let eig = SymmetricEigen::new(self.metric.clone());
        let sqrt_d = eig.eigenvalues.map(f64::sqrt);
        let q = &eig.eigenvectors;
        let half = q * DMatrix::from_diagonal(&sqrt_d) * q.transpose();
        let half_inv = q * DMatrix::from_diagonal(&sqrt_d.map(|x| 1.0 / x)) * q.transpose();
        let mut s = &half * &self.entries * &half_inv;
        let st = s.transpose();
        s = (s + st) * 0.5;
        let mut values: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        Spectrum { values }
    }

    /// σ_0, …, σ_m from traces, without an eigen-decomposition.
    pub fn elementary_all(&self) -> Vec<f64> {
        let m = self.dim();
        let mut sig = vec![0.0; m + 1];
        sig[0] = 1.0;
        let mut t = DMatrix::<f64>::identity(m, m);
        for j in 1..=m {
            let bt = &self.entries * &t;
            sig[j] = bt.trace() / j as f64;
            t = DMatrix::identity(m, m) * sig[j] - bt;
        }
        sig
    }

    pub fn sigma(&self, k: usize) -> f64 {
        if k > self.dim() {
            return 0.0;
        }
        self.elementary_all()[k]
    }
}

fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let scale = a.amax().max(1.0);
    (a - a.transpose()).amax() / scale
}

/// T_k(B) = ∂σ_{k+1}/∂B by T_j = σ_j I − B T_{j−1}.
pub fn newton_transform(k: usize, b: &SymmetricOperator) -> Result<SymmetricOperator> {
    let m = b.dim();
    if k >= m {
        return invalid(format!("newton transform order {k} needs k < {m}"));
    }
    let mut t = DMatrix::<f64>::identity(m, m);
    for j in 1..=k {
        let bt = b.entries() * &t;
        let sigma_j = bt.trace() / j as f64;
        t = DMatrix::identity(m, m) * sigma_j - bt;
    }
    Ok(SymmetricOperator {
        entries: t,
        metric: b.metric.clone(),
    })
}
