//! Multivariate Gaussians: maximum-likelihood fitting, seeded sampling and
//! block conditioning.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::math::{sqrt_factor, symmetrize};
use crate::rng::{seeded, SearchRng};
use crate::ziggurat::standard_normal;
use crate::{Error, Result};

/// Relative ridge added to fitted covariances (times `trace / dim`).
pub const RIDGE_SCALE: f64 = 1e-8;
/// Absolute lower bound on the ridge.
pub const RIDGE_FLOOR: f64 = 1e-12;

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// Ridge magnitude used for a covariance with the given trace and dimension.
pub fn ridge_for(cov: &DMatrix<f64>) -> f64 {
    let d = cov.nrows().max(1) as f64;
    (RIDGE_SCALE * cov.trace() / d).max(RIDGE_FLOOR)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl Gaussian {
    /// Builds a Gaussian after checking shape, symmetry and positive
    /// semi-definiteness of `cov`.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::EmptyInput("gaussian mean"));
        }
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: cov.nrows() });
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidCovariance("non-finite entry"));
        }
        let scale = cov.amax().max(f64::MIN_POSITIVE);
        for i in 0..d {
            for j in 0..i {
                if (cov[(i, j)] - cov[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidCovariance("not symmetric"));
                }
            }
        }
        let eig = cov.clone().symmetric_eigen();
        let max = eig.eigenvalues.max();
        if eig.eigenvalues.iter().any(|&l| l < -PSD_TOL * max.abs().max(f64::MIN_POSITIVE)) {
            return Err(Error::InvalidCovariance("not positive semi-definite"));
        }
        Ok(Self { mean, cov })
    }

    pub fn standard(dim: usize) -> Self {
        Self { mean: DVector::zeros(dim), cov: DMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Per-axis standard deviations.
    pub fn std_devs(&self) -> DVector<f64> {
        self.cov.diagonal().map(|v| libm::sqrt(v.max(0.0)))
    }

    /// Maximum-likelihood fit (`1/N` covariance) plus ridge regularization.
    pub fn fit_mle(samples: &[DVector<f64>]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::EmptyInput("need at least 2 samples"));
        }
        let d = samples[0].len();
        if d == 0 {
            return Err(Error::EmptyInput("zero-dimensional samples"));
        }
        if let Some(bad) = samples.iter().find(|s| s.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: bad.len() });
        }
        let n = samples.len() as f64;
        let mut mean = DVector::zeros(d);
        for s in samples {
            mean += s;
        }
        mean /= n;
        let mut cov = DMatrix::zeros(d, d);
        for s in samples {
            let c = s - &mean;
            cov.ger(1.0, &c, &c, 1.0);
        }
        cov /= n;
        symmetrize(&mut cov);
        let ridge = ridge_for(&cov);
        for i in 0..d {
            cov[(i, i)] += ridge;
        }
        Self::new(mean, cov)
    }

    /// Fits rows of a matrix (one sample per row).
    pub fn fit_rows(rows: &DMatrix<f64>) -> Result<Self> {
        let samples: Vec<DVector<f64>> =
            rows.row_iter().map(|r| r.transpose().into_owned()).collect();
        Self::fit_mle(&samples)
    }

    /// `n` ziggurat-based draws; identical `(self, n, seed)` give
    /// bit-identical output.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<DVector<f64>> {
        let mut rng = seeded(seed);
        self.sample_with(n, &mut rng)
    }

    pub fn sample_with(&self, n: usize, rng: &mut SearchRng) -> Vec<DVector<f64>> {
        let factor = sqrt_factor(&self.cov);
        let d = self.dim();
        let mut z = DVector::zeros(d);
        (0..n)
            .map(|_| {
                for v in z.iter_mut() {
                    *v = standard_normal(rng);
                }
                &self.mean + &factor * &z
            })
            .collect()
    }

    pub fn log_density(&self, x: &DVector<f64>) -> f64 {
        let d = self.dim() as f64;
        let chol = match self.cov.clone().cholesky() {
            Some(c) => c,
            None => return f64::NEG_INFINITY,
        };
        let diff = x - &self.mean;
        let sol = chol.solve(&diff);
        let logdet = 2.0 * chol.l_dirty().diagonal().iter().map(|v| libm::log(*v)).sum::<f64>();
        -0.5 * (diff.dot(&sol) + logdet + d * libm::log(2.0 * core::f64::consts::PI))
    }

    pub fn density(&self, x: &DVector<f64>) -> f64 {
        libm::exp(self.log_density(x))
    }

    /// Squared Mahalanobis distance of `x` from the mean.
    pub fn mahalanobis_sq(&self, x: &DVector<f64>) -> f64 {
        let diff = x - &self.mean;
        match self.cov.clone().cholesky() {
            Some(c) => diff.dot(&c.solve(&diff)),
            None => f64::INFINITY,
        }
    }

    pub fn marginal(&self, indices: &[usize]) -> Gaussian {
        Gaussian {
            mean: self.mean.select_rows(indices),
            cov: self.cov.select_rows(indices).select_columns(indices),
        }
    }

    /// Precomputes the affine map `s -> E[a | s]` and the conditional
    /// covariance for repeated queries.
    pub fn conditioner(&self, partition: &BlockPartition) -> Result<Conditioner> {
        partition.check(self.dim())?;
        let a = partition.block_a();
        let s = partition.block_s();
        let mu_a = self.mean.select_rows(a);
        let mu_s = self.mean.select_rows(s);
        let cov_aa = self.cov.select_rows(a).select_columns(a);
        let cov_sa = self.cov.select_rows(s).select_columns(a);
        let mut cov_ss = self.cov.select_rows(s).select_columns(s);
        if cov_ss.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularBlock);
        }
        let chol = match cov_ss.clone().cholesky() {
            Some(c) => c,
            None => {
                let ridge = ridge_for(&cov_ss);
                for i in 0..cov_ss.nrows() {
                    cov_ss[(i, i)] += ridge;
                }
                cov_ss.cholesky().ok_or(Error::SingularBlock)?
            }
        };
        // gain = Σ_as Σ_ss⁻¹ = (Σ_ss⁻¹ Σ_sa)ᵀ
        let gain = chol.solve(&cov_sa).transpose();
        let mut cov = &cov_aa - &gain * &cov_sa;
        symmetrize(&mut cov);
        if gain.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::SingularBlock);
        }
        Ok(Conditioner { mu_a, mu_s, gain, cov })
    }

    /// Distribution of block `a` given block `s` equals `s_star`.
    pub fn condition(&self, partition: &BlockPartition, s_star: &DVector<f64>) -> Result<Gaussian> {
        let c = self.conditioner(partition)?;
        let mean = c.mean_at(s_star)?;
        Ok(Gaussian { mean, cov: c.cov })
    }
}

/// Disjoint index blocks `a` (predicted) and `s` (conditioned on).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    a: Vec<usize>,
    s: Vec<usize>,
}

impl BlockPartition {
    pub fn new(a: Vec<usize>, s: Vec<usize>, dim: usize) -> Result<Self> {
        let p = Self { a, s };
        p.check(dim)?;
        Ok(p)
    }

    /// `a = 0..split`, `s = split..dim`.
    pub fn leading(split: usize, dim: usize) -> Result<Self> {
        Self::new((0..split).collect(), (split..dim).collect(), dim)
    }

    pub fn block_a(&self) -> &[usize] {
        &self.a
    }

    pub fn block_s(&self) -> &[usize] {
        &self.s
    }

    fn check(&self, dim: usize) -> Result<()> {
        if self.a.is_empty() || self.s.is_empty() || self.a.len() + self.s.len() != dim {
            return Err(Error::InvalidPartition);
        }
        let mut seen = alloc::vec![false; dim];
        for &i in self.a.iter().chain(&self.s) {
            if i >= dim || seen[i] {
                return Err(Error::InvalidPartition);
            }
            seen[i] = true;
        }
        Ok(())
    }
}

/// Gaussian conditioning precomputed for one partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditioner {
    mu_a: DVector<f64>,
    mu_s: DVector<f64>,
    gain: DMatrix<f64>,
    cov: DMatrix<f64>,
}

impl Conditioner {
    /// `μ_a + Σ_as Σ_ss⁻¹ (s − μ_s)`.
    pub fn mean_at(&self, s_star: &DVector<f64>) -> Result<DVector<f64>> {
        if s_star.len() != self.mu_s.len() {
            return Err(Error::DimensionMismatch { expected: self.mu_s.len(), found: s_star.len() });
        }
        Ok(&self.mu_a + &self.gain * (s_star - &self.mu_s))
    }

    /// `Σ_aa − Σ_as Σ_ss⁻¹ Σ_sa`, independent of the conditioning value.
    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// `Σ_as Σ_ss⁻¹`.
    pub fn gain(&self) -> &DMatrix<f64> {
        &self.gain
    }
}
