//! Maximum-likelihood fitting of graph GP hyperparameters by grid search.
//!
//! Observations are modeled as `Y ~ N(0, A C_θ Aᵀ + σ² I)` where `A` selects
//! the queried points. Matérn fits estimate the smoothness `s` with `κ` held
//! fixed; squared-exponential fits estimate `τ`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::acquisition::Surrogate;
use crate::error::{check_index, Error, Result};
use crate::ggp::{Covariance, CovarianceModel, KernelSpec};
use crate::graph::GraphSpectrum;
use crate::posterior::factorize;

/// Which hyperparameter the grid ranges over.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MleFamily {
    /// Grid over `s`, with `κ` fixed.
    Matern { kappa: f64 },
    /// Grid over `τ`.
    SquaredExponential,
}

impl MleFamily {
    pub fn spec(&self, theta: f64, truncation: usize, intrinsic_dim: usize) -> KernelSpec {
        match *self {
            MleFamily::Matern { kappa } => KernelSpec::matern(kappa, theta, truncation, intrinsic_dim),
            MleFamily::SquaredExponential => KernelSpec::squared_exponential(theta, truncation, intrinsic_dim),
        }
    }

    /// Default grid: 25 log-spaced points, `s ∈ [1, 10]` or `τ ∈ [0.01, 1]`.
    pub fn default_grid(&self) -> Vec<f64> {
        match self {
            MleFamily::Matern { .. } => log_grid(1.0, 10.0, 25),
            MleFamily::SquaredExponential => log_grid(0.01, 1.0, 25),
        }
    }
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

#[derive(Clone, Debug)]
pub struct MleProblem<'a> {
    pub spectrum: &'a GraphSpectrum,
    pub family: MleFamily,
    pub truncation: usize,
    pub intrinsic_dim: usize,
    pub queries: &'a [usize],
    pub observations: &'a [f64],
    pub noise_sd: f64,
    pub grid: Vec<f64>,
}

impl MleProblem<'_> {
    pub fn validate(&self) -> Result<()> {
        if self.queries.is_empty() || self.queries.len() != self.observations.len() {
            return Err(Error::Argument(format!(
                "need matching, nonempty queries and observations (got {} and {})",
                self.queries.len(),
                self.observations.len()
            )));
        }
        if self.grid.is_empty() || self.grid.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
            return Err(Error::Argument("grid must be nonempty and strictly positive".into()));
        }
        if self.truncation == 0 || self.truncation > self.spectrum.k() {
            return Err(Error::Argument(format!(
                "truncation {} outside [1, {}]",
                self.truncation,
                self.spectrum.k()
            )));
        }
        for &q in self.queries {
            check_index(q, self.spectrum.n())?;
        }
        Ok(())
    }

    /// `A C_θ Aᵀ` for the queried points.
    fn gram(&self, theta: f64) -> Result<DMatrix<f64>> {
        let spec = self.family.spec(theta, self.truncation, self.intrinsic_dim);
        spec.validate()?;
        let psi = self.spectrum.eigenvectors();
        let eigenvalues = &self.spectrum.eigenvalues()[..self.truncation];
        let weights: Vec<f64> = eigenvalues.iter().map(|&l| spec.coefficient(l).sqrt()).collect();
        let features = DMatrix::from_fn(self.queries.len(), self.truncation, |r, c| {
            psi[(self.queries[r], c)] * weights[c]
        });
        Ok(&features * features.transpose())
    }

    /// `½ [Yᵀ Σ⁻¹ Y + log det Σ + ℓ log 2π]`.
    pub fn negative_log_likelihood(&self, theta: f64) -> Result<f64> {
        self.validate()?;
        if !(theta > 0.0) {
            return Err(Error::Argument(format!("parameter must be positive, got {theta}")));
        }
        let gram = self.gram(theta)?;
        let (chol, _) = factorize(&gram, self.noise_sd * self.noise_sd)?;
        let y = DVector::from_column_slice(self.observations);
        let quad = y.dot(&chol.solve(&y));
        let logdet: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let l = self.queries.len() as f64;
        Ok(0.5 * (quad + logdet + l * (2.0 * PI).ln()))
    }

    /// Grid minimizer of the negative log-likelihood; ties go to the smaller
    /// parameter. Grid points that fail numerically are skipped.
    pub fn estimate(&self) -> Result<f64> {
        self.validate()?;
        let mut best: Option<(f64, f64)> = None;
        for &theta in &self.grid {
            let Ok(nll) = self.negative_log_likelihood(theta) else {
                continue;
            };
            if !nll.is_finite() {
                continue;
            }
            let better = match best {
                None => true,
                Some((v, t)) => nll < v || (nll == v && theta < t),
            };
            if better {
                best = Some((nll, theta));
            }
        }
        best.map(|(_, t)| t)
            .ok_or_else(|| Error::Estimation("every grid point failed to factorize".into()))
    }
}

/// Graph GP whose hyperparameter is re-estimated from the observations.
pub struct MleSurrogate {
    spectrum: Arc<GraphSpectrum>,
    family: MleFamily,
    truncation: usize,
    intrinsic_dim: usize,
    grid: Vec<f64>,
    /// Re-estimate every `stride` observations.
    stride: usize,
    theta: f64,
    model: CovarianceModel,
    fitted_at: usize,
}

impl MleSurrogate {
    pub fn new(
        spectrum: Arc<GraphSpectrum>,
        family: MleFamily,
        truncation: usize,
        intrinsic_dim: usize,
        grid: Vec<f64>,
        initial: f64,
    ) -> Result<Self> {
        let model = CovarianceModel::from_spectrum(
            family.spec(initial, truncation, intrinsic_dim),
            &spectrum,
        )?;
        Ok(Self {
            spectrum,
            family,
            truncation,
            intrinsic_dim,
            grid,
            stride: 1,
            theta: initial,
            model,
            fitted_at: 0,
        })
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride.max(1);
        self
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

impl Surrogate for MleSurrogate {
    fn model(
        &mut self,
        queries: &[usize],
        observations: &[f64],
        noise_sd: f64,
    ) -> Result<&dyn Covariance> {
        let l = queries.len();
        if l > 0 && l != self.fitted_at && (l - 1).is_multiple_of(self.stride) {
            let problem = MleProblem {
                spectrum: &self.spectrum,
                family: self.family,
                truncation: self.truncation,
                intrinsic_dim: self.intrinsic_dim,
                queries,
                observations,
                noise_sd,
                grid: self.grid.clone(),
            };
            let theta = problem.estimate()?;
            if theta != self.theta {
                self.model = CovarianceModel::from_spectrum(
                    self.family.spec(theta, self.truncation, self.intrinsic_dim),
                    &self.spectrum,
                )?;
                self.theta = theta;
            }
            self.fitted_at = l;
        }
        Ok(&self.model)
    }

    fn parameter(&self) -> Option<f64> {
        Some(self.theta)
    }
}
