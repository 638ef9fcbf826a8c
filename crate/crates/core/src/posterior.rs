//! Exact Gaussian process conditioning over the point cloud.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{check_index, Error, Result};
use crate::ggp::Covariance;

/// Relative jitter added to a noise-free Gram matrix.
pub const BASE_JITTER: f64 = 1e-10;
/// Largest relative jitter tried before giving up.
pub const MAX_JITTER: f64 = 1e-6;

/// Cholesky factor of `C + (σ² + jitter) I`, escalating the jitter tenfold
/// from [`BASE_JITTER`] up to [`MAX_JITTER`] (relative to the mean diagonal)
/// whenever the factorization fails. Noise-free problems start at
/// [`BASE_JITTER`]; noisy ones first try without jitter.
pub(crate) fn factorize(
    gram: &DMatrix<f64>,
    noise_var: f64,
) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let l = gram.nrows();
    let scale = {
        let mean_diag = gram.trace() / l.max(1) as f64;
        if mean_diag > 0.0 {
            mean_diag
        } else {
            1.0
        }
    };
    let mut jitter = if noise_var > 0.0 { 0.0 } else { BASE_JITTER * scale };
    loop {
        let mut a = gram.clone();
        for i in 0..l {
            a[(i, i)] += noise_var + jitter;
        }
        if let Some(chol) = Cholesky::new(a) {
            return Ok((chol, jitter));
        }
        jitter = if jitter == 0.0 { BASE_JITTER * scale } else { jitter * 10.0 };
        if jitter > MAX_JITTER * scale * (1.0 + 1e-9) {
            return Err(Error::Numerical(format!(
                "Gram matrix of {l} queries not positive definite even with jitter {:.1e}",
                MAX_JITTER * scale
            )));
        }
    }
}

/// Posterior mean and variance at every cloud point given noisy observations
/// at the query points.
#[derive(Clone, Debug)]
pub struct PosteriorState {
    queries: Vec<usize>,
    observations: Vec<f64>,
    noise_sd: f64,
    jitter: f64,
    mean: Vec<f64>,
    variance: Vec<f64>,
}

impl PosteriorState {
    /// Conditions the prior `model` on `observations` taken at `queries` with
    /// Gaussian noise of standard deviation `noise_sd`.
    pub fn condition(
        model: &dyn Covariance,
        queries: &[usize],
        observations: &[f64],
        noise_sd: f64,
    ) -> Result<Self> {
        if queries.len() != observations.len() {
            return Err(Error::Argument(format!(
                "{} queries but {} observations",
                queries.len(),
                observations.len()
            )));
        }
        if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
            return Err(Error::Argument(format!("noise sd must be finite and >= 0, got {noise_sd}")));
        }
        if observations.iter().any(|y| !y.is_finite()) {
            return Err(Error::Argument("observations must be finite".into()));
        }
        let n = model.len();
        for &q in queries {
            check_index(q, n)?;
        }
        let prior = model.prior_variances();
        if queries.is_empty() {
            return Ok(Self {
                queries: Vec::new(),
                observations: Vec::new(),
                noise_sd,
                jitter: 0.0,
                mean: vec![0.0; n],
                variance: prior,
            });
        }

        let gram = model.cross(queries, queries);
        let (chol, jitter) = factorize(&gram, noise_sd * noise_sd)?;
        let y = DVector::from_column_slice(observations);
        let alpha = chol.solve(&y);
        // N × ℓ
        let cross = model.cross_all(queries);
        let mean = (&cross * &alpha).iter().copied().collect();
        let v = chol
            .l_dirty()
            .solve_lower_triangular(&cross.transpose())
            .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
        let variance = prior
            .iter()
            .zip(v.column_iter())
            .map(|(p, col)| (p - col.norm_squared()).max(0.0))
            .collect();
        Ok(Self {
            queries: queries.to_vec(),
            observations: observations.to_vec(),
            noise_sd,
            jitter,
            mean,
            variance,
        })
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn queries(&self) -> &[usize] {
        &self.queries
    }

    pub fn observations(&self) -> &[f64] {
        &self.observations
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }

    /// Diagonal jitter that was needed to factorize the Gram matrix.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn mean(&self, z: usize) -> Result<f64> {
        check_index(z, self.len())?;
        Ok(self.mean[z])
    }

    /// Posterior variance, clamped at zero.
    pub fn variance(&self, z: usize) -> Result<f64> {
        check_index(z, self.len())?;
        Ok(self.variance[z])
    }

    pub fn std(&self, z: usize) -> Result<f64> {
        self.variance(z).map(f64::sqrt)
    }

    pub fn means(&self) -> &[f64] {
        &self.mean
    }

    pub fn variances(&self) -> &[f64] {
        &self.variance
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ggp::{CovarianceModel, KernelSpec};
    use crate::graph::{graph_spectrum, Normalization};
    use crate::point_cloud::sample_circle;

    fn model(k: usize) -> CovarianceModel {
        let cloud = sample_circle(30, 11).unwrap();
        let s = graph_spectrum(&cloud, 0.9, k, Normalization::EmpiricalL2).unwrap();
        CovarianceModel::from_spectrum(KernelSpec::matern(1.0, 2.0, k, 1), &s).unwrap()
    }

    #[test]
    fn empty_conditioning_returns_prior() {
        let m = model(8);
        let post = PosteriorState::condition(&m, &[], &[], 0.1).unwrap();
        for z in 0..30 {
            assert_eq!(post.mean(z).unwrap(), 0.0);
            assert_eq!(post.variance(z).unwrap(), m.variance(z));
        }
    }

    #[test]
    fn noise_free_interpolates() {
        let m = model(10);
        let post = PosteriorState::condition(&m, &[4], &[1.3], 0.0).unwrap();
        assert!((post.mean(4).unwrap() - 1.3).abs() < 1e-5);
        assert!(post.variance(4).unwrap() < 1e-8 * m.variance(4));
        assert!(post.jitter() > 0.0);
    }

    #[test]
    fn more_queries_than_modes_still_factorizes_without_noise() {
        let m = model(5);
        let queries: Vec<usize> = (0..12).collect();
        let obs: Vec<f64> = m.sample_prior(1)[..12].to_vec();
        let post = PosteriorState::condition(&m, &queries, &obs, 0.0).unwrap();
        assert!(post.variances().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn argument_errors() {
        let m = model(5);
        assert!(matches!(
            PosteriorState::condition(&m, &[1, 2], &[0.0], 0.1),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            PosteriorState::condition(&m, &[1], &[f64::NAN], 0.1),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            PosteriorState::condition(&m, &[1], &[0.0], -1.0),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            PosteriorState::condition(&m, &[30], &[0.0], 0.1),
            Err(Error::IndexOutOfRange { .. })
        ));
        let post = PosteriorState::condition(&m, &[1], &[0.0], 0.1).unwrap();
        assert!(post.mean(30).is_err());
    }

    #[test]
    fn evaluation_is_bitwise_stable() {
        let m = model(8);
        let post = PosteriorState::condition(&m, &[2, 9, 20], &[0.3, -0.1, 0.8], 0.05).unwrap();
        for z in 0..30 {
            assert_eq!(post.mean(z).unwrap().to_bits(), post.mean(z).unwrap().to_bits());
            assert_eq!(post.std(z).unwrap().to_bits(), post.std(z).unwrap().to_bits());
        }
    }

    #[test]
    fn queried_mean_is_bounded() {
        let m = model(8);
        let post = PosteriorState::condition(&m, &[2, 9], &[0.4, -0.7], 0.1).unwrap();
        for (k, &q) in [2usize, 9].iter().enumerate() {
            let y = [0.4f64, -0.7][k];
            assert!((post.mean(q).unwrap() - y).abs() <= y.abs() + m.variance(q).sqrt());
        }
    }
}
