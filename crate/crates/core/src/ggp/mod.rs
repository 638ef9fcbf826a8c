//! Graph Gaussian process priors: truncated spectral filters of a Laplacian
//! eigenbasis, with Matérn or squared-exponential decay.
//!
//! The same [`CovarianceModel`] also carries the analytic circle and sphere
//! oracles (see [`oracle`]), which only differ in where their eigenpairs
//! come from.

pub mod oracle;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_index, Error, Result};
use crate::graph::GraphSpectrum;
use crate::point_cloud::rng;

pub use oracle::{circle_oracle, sphere_eigenpairs, SphereHarmonics};

/// Anything that can hand out prior covariances between cloud points.
///
/// `entry` is unchecked; callers validate indices first.
pub trait Covariance: Send + Sync {
    /// Number of points the covariance is indexed by.
    fn len(&self) -> usize;

    fn entry(&self, i: usize, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn variance(&self, i: usize) -> f64 {
        self.entry(i, i)
    }

    /// `[c(r, c)]` for every `r` in `rows` and `c` in `cols`.
    fn cross(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |a, b| self.entry(rows[a], cols[b]))
    }

    /// `[c(x_i, c)]` for every cloud point `i` and every `c` in `cols`.
    fn cross_all(&self, cols: &[usize]) -> DMatrix<f64> {
        let rows: Vec<usize> = (0..self.len()).collect();
        self.cross(&rows, cols)
    }

    fn prior_variances(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.variance(i)).collect()
    }
}

/// Spectral decay family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelFamily {
    /// `w(λ) = κ^{2s−m} (κ² + λ)^{−s}`.
    Matern { kappa: f64, s: f64 },
    /// `w(λ) = τ^{m/2} e^{−λτ}`.
    SquaredExponential { tau: f64 },
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::Matern { .. } => "matern",
            KernelFamily::SquaredExponential { .. } => "se",
        }
    }
}

/// Prior parameters plus truncation level and intrinsic dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    /// Number of eigenpairs kept (`k_N`).
    pub truncation: usize,
    /// Intrinsic dimension `m`.
    pub intrinsic_dim: usize,
    /// Multiplies every spectral coefficient. 1 reproduces the unscaled prior.
    pub amplitude: f64,
}

impl KernelSpec {
    pub fn matern(kappa: f64, s: f64, truncation: usize, intrinsic_dim: usize) -> Self {
        Self { family: KernelFamily::Matern { kappa, s }, truncation, intrinsic_dim, amplitude: 1.0 }
    }

    pub fn squared_exponential(tau: f64, truncation: usize, intrinsic_dim: usize) -> Self {
        Self {
            family: KernelFamily::SquaredExponential { tau },
            truncation,
            intrinsic_dim,
            amplitude: 1.0,
        }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Argument(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match self.family {
            KernelFamily::Matern { kappa, s } => {
                positive("kappa", kappa)?;
                positive("s", s)?;
            }
            KernelFamily::SquaredExponential { tau } => positive("tau", tau)?,
        }
        positive("amplitude", self.amplitude)?;
        if self.truncation == 0 {
            return Err(Error::Argument("truncation must be at least 1".into()));
        }
        if self.intrinsic_dim == 0 {
            return Err(Error::Argument("intrinsic dimension must be at least 1".into()));
        }
        Ok(())
    }

    /// Variance assigned to a mode with Laplacian eigenvalue `lambda`.
    pub fn coefficient(&self, lambda: f64) -> f64 {
        let m = self.intrinsic_dim as f64;
        let w = match self.family {
            KernelFamily::Matern { kappa, s } => {
                kappa.powf(2.0 * s - m) * (kappa * kappa + lambda).powf(-s)
            }
            KernelFamily::SquaredExponential { tau } => tau.powf(m / 2.0) * (-lambda * tau).exp(),
        };
        self.amplitude * w
    }
}

/// A truncated spectral covariance `c(x_i, x_j) = Σ_r w_r ψ_r(x_i) ψ_r(x_j)`.
#[derive(Clone, Debug)]
pub struct CovarianceModel {
    spec: KernelSpec,
    eigenvalues: Vec<f64>,
    coefficients: Vec<f64>,
    /// `N × k`, column `r` is `√w_r ψ_r`.
    features: DMatrix<f64>,
}

impl CovarianceModel {
    /// Graph GP over the first `spec.truncation` eigenpairs of `spectrum`.
    pub fn from_spectrum(spec: KernelSpec, spectrum: &GraphSpectrum) -> Result<Self> {
        if spec.truncation > spectrum.k() {
            return Err(Error::Argument(format!(
                "truncation {} exceeds the {} available eigenpairs",
                spec.truncation,
                spectrum.k()
            )));
        }
        let k = spec.truncation;
        Self::from_eigenpairs(
            spec,
            &spectrum.eigenvalues()[..k],
            &spectrum.eigenvectors().columns(0, k).into_owned(),
        )
    }

    /// Model over explicit eigenpairs; `eigenvectors` is `N × k`, one column per
    /// eigenvalue, and `k` must equal `spec.truncation`.
    pub fn from_eigenpairs(
        spec: KernelSpec,
        eigenvalues: &[f64],
        eigenvectors: &DMatrix<f64>,
    ) -> Result<Self> {
        spec.validate()?;
        if eigenvalues.len() != spec.truncation || eigenvectors.ncols() != spec.truncation {
            return Err(Error::Argument(format!(
                "expected {} eigenpairs, got {} values and {} vectors",
                spec.truncation,
                eigenvalues.len(),
                eigenvectors.ncols()
            )));
        }
        let coefficients: Vec<f64> = eigenvalues.iter().map(|&l| spec.coefficient(l)).collect();
        if let Some(w) = coefficients.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::Numerical(format!("non-positive spectral coefficient {w}")));
        }
        let mut features = eigenvectors.clone();
        for (mut col, w) in features.column_iter_mut().zip(&coefficients) {
            col *= w.sqrt();
        }
        Ok(Self { spec, eigenvalues: eigenvalues.to_vec(), coefficients, features })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Cached per-mode variances `w_r`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `N × k` matrix with columns `√w_r ψ_r`.
    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn covariance(&self, i: usize, j: usize) -> Result<f64> {
        check_index(i, self.len())?;
        check_index(j, self.len())?;
        Ok(self.entry(i, j))
    }

    /// Gram matrix over `indices`.
    pub fn covariance_matrix(&self, indices: &[usize]) -> Result<DMatrix<f64>> {
        for &i in indices {
            check_index(i, self.len())?;
        }
        Ok(self.cross(indices, indices))
    }

    /// `Σ_r √w_r ξ_r ψ_r` with `ξ_r` i.i.d. standard normal from `seed`.
    pub fn sample_prior(&self, seed: u64) -> Vec<f64> {
        let mut rng = rng(seed);
        let xi: Vec<f64> = (0..self.features.ncols()).map(|_| rng.sample(StandardNormal)).collect();
        self.combine(&xi)
    }

    /// `Σ_r √w_r ξ_r ψ_r` for given standard normal weights.
    pub fn combine(&self, xi: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.features.row(i).iter().zip(xi).map(|(f, x)| f * x).sum())
            .collect()
    }
}

impl Covariance for CovarianceModel {
    fn len(&self) -> usize {
        self.features.nrows()
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        self.features.row(i).dot(&self.features.row(j))
    }

    fn cross(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        let a = self.features.select_rows(rows);
        let b = self.features.select_rows(cols);
        a * b.transpose()
    }

    fn cross_all(&self, cols: &[usize]) -> DMatrix<f64> {
        &self.features * self.features.select_rows(cols).transpose()
    }

    fn prior_variances(&self) -> Vec<f64> {
        self.features.row_iter().map(|r| r.norm_squared()).collect()
    }
}
