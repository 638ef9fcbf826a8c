//! Stationary kernels on ambient Euclidean distance, ignoring the manifold.

use nalgebra::DMatrix;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::ggp::Covariance;
use crate::point_cloud::PointCloud;
use crate::special::bessel_k;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EuclideanKernel {
    /// `2^{1−ν}/Γ(ν) (κr)^ν K_ν(κr)`.
    Matern { nu: f64, kappa: f64 },
    /// `exp(−r² / 4τ)`.
    SquaredExponential { tau: f64 },
}

impl EuclideanKernel {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            EuclideanKernel::Matern { nu, kappa } => nu > 0.0 && kappa > 0.0 && nu.is_finite() && kappa.is_finite(),
            EuclideanKernel::SquaredExponential { tau } => tau > 0.0 && tau.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Argument(format!("kernel parameters must be positive: {self:?}")))
        }
    }

    /// Correlation at Euclidean distance `r`.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Ok(1.0);
        }
        match *self {
            EuclideanKernel::Matern { nu, kappa } => {
                let t = kappa * r;
                if t > 700.0 {
                    return Ok(0.0);
                }
                let log_prefactor = (1.0 - nu) * std::f64::consts::LN_2 - ln_gamma(nu) + nu * t.ln();
                Ok(log_prefactor.exp() * bessel_k(nu, t)?)
            }
            EuclideanKernel::SquaredExponential { tau } => Ok((-r * r / (4.0 * tau)).exp()),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            EuclideanKernel::Matern { nu, kappa } => format!("matern(nu={nu},kappa={kappa})"),
            EuclideanKernel::SquaredExponential { tau } => format!("se(tau={tau})"),
        }
    }
}

/// Ambient-distance GP over a cloud, with its full Gram matrix cached.
#[derive(Clone, Debug)]
pub struct EuclideanModel {
    kernel: EuclideanKernel,
    amplitude: f64,
    gram: DMatrix<f64>,
}

impl EuclideanModel {
    pub fn kernel(&self) -> EuclideanKernel {
        self.kernel
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }
}

/// Builds `amplitude · c(|x_i − x_j|)` for every pair of cloud points.
pub fn euclidean_kernel_model(
    cloud: &PointCloud,
    kernel: EuclideanKernel,
    amplitude: f64,
) -> Result<EuclideanModel> {
    kernel.validate()?;
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(Error::Argument(format!("amplitude must be positive, got {amplitude}")));
    }
    let n = cloud.len();
    let mut gram = DMatrix::zeros(n, n);
    for i in 0..n {
        gram[(i, i)] = amplitude;
        for j in 0..i {
            let v = amplitude * kernel.evaluate(cloud.distance(i, j))?;
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    Ok(EuclideanModel { kernel, amplitude, gram })
}

impl Covariance for EuclideanModel {
    fn len(&self) -> usize {
        self.gram.nrows()
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        self.gram[(i, j)]
    }

    fn cross_all(&self, cols: &[usize]) -> DMatrix<f64> {
        self.gram.select_columns(cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_cloud::sample_sphere;

    #[test]
    fn unit_variance_on_the_diagonal() {
        let cloud = sample_sphere(10, 1).unwrap();
        for k in [
            EuclideanKernel::SquaredExponential { tau: 0.2 },
            EuclideanKernel::Matern { nu: 1.5, kappa: 3.0 },
        ] {
            let m = euclidean_kernel_model(&cloud, k, 1.0).unwrap();
            assert!((0..10).all(|i| m.variance(i) == 1.0));
        }
    }

    #[test]
    fn matern_decays_monotonically() {
        let k = EuclideanKernel::Matern { nu: 2.5, kappa: 4.0 };
        let values: Vec<f64> = (1..60).map(|i| k.evaluate(i as f64 * 0.05).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]));
        assert!(values[0] < 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let cloud = sample_sphere(5, 1).unwrap();
        assert!(euclidean_kernel_model(&cloud, EuclideanKernel::SquaredExponential { tau: 0.0 }, 1.0).is_err());
        assert!(euclidean_kernel_model(&cloud, EuclideanKernel::Matern { nu: 1.0, kappa: -1.0 }, 1.0).is_err());
        assert!(euclidean_kernel_model(&cloud, EuclideanKernel::SquaredExponential { tau: 1.0 }, 0.0).is_err());
    }
}
