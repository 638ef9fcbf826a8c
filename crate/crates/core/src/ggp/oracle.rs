//! Analytic Laplace–Beltrami eigenpairs for the unit circle and unit sphere.
//!
//! Eigenfunctions are normalized under the uniform probability measure, so
//! every one of them has mean square 1.

use std::f64::consts::SQRT_2;

use nalgebra::DMatrix;

use super::{CovarianceModel, KernelSpec};
use crate::error::{Error, Result};
use crate::point_cloud::PointCloud;

/// Circle eigenvalues `0, 1, 1, 4, 4, 9, 9, …` truncated to `count` entries.
pub fn circle_eigenvalues(count: usize) -> Vec<f64> {
    (0..count).map(|i| i.div_ceil(2).pow(2) as f64).collect()
}

/// Eigenfunction `i` of the circle at angle `theta`: `1`, then alternating
/// `√2 cos(jθ)`, `√2 sin(jθ)` for `j = 1, 2, …`.
pub fn circle_eigenfunction(i: usize, theta: f64) -> f64 {
    if i == 0 {
        return 1.0;
    }
    let j = i.div_ceil(2) as f64;
    if i % 2 == 1 {
        SQRT_2 * (j * theta).cos()
    } else {
        SQRT_2 * (j * theta).sin()
    }
}

/// Manifold GP on the unit circle, evaluated at the cloud's angles, using the
/// first `spec.truncation` analytic eigenpairs.
pub fn circle_oracle(spec: KernelSpec, cloud: &PointCloud) -> Result<CovarianceModel> {
    if spec.intrinsic_dim != 1 {
        return Err(Error::Argument("the circle oracle needs intrinsic dimension 1".into()));
    }
    let angles = cloud.angles()?;
    let k = spec.truncation;
    let vectors = DMatrix::from_fn(angles.len(), k, |r, c| circle_eigenfunction(c, angles[r]));
    CovarianceModel::from_eigenpairs(spec, &circle_eigenvalues(k), &vectors)
}

/// Real spherical harmonics up to degree `l_max`.
///
/// Modes are ordered by degree; within degree `l` the order is `m = 0`, then
/// the cosine and sine partners for `m = 1, …, l`.
#[derive(Clone, Debug)]
pub struct SphereHarmonics {
    l_max: usize,
    /// `norms[l][m]` for the associated Legendre function `P_l^m`.
    norms: Vec<Vec<f64>>,
}

pub fn sphere_eigenpairs(l_max: usize) -> SphereHarmonics {
    let norms = (0..=l_max)
        .map(|l| {
            (0..=l)
                .map(|m| {
                    // (l−m)!/(l+m)!
                    let ratio: f64 = ((l - m + 1)..=(l + m)).map(|v| 1.0 / v as f64).product();
                    let base = ((2 * l + 1) as f64 * ratio).sqrt();
                    if m == 0 {
                        base
                    } else {
                        base * SQRT_2
                    }
                })
                .collect()
        })
        .collect();
    SphereHarmonics { l_max, norms }
}

impl SphereHarmonics {
    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// `(l_max + 1)²`.
    pub fn len(&self) -> usize {
        (self.l_max + 1) * (self.l_max + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `l(l+1)`, each repeated `2l+1` times.
    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..=self.l_max)
            .flat_map(|l| std::iter::repeat_n((l * (l + 1)) as f64, 2 * l + 1))
            .collect()
    }

    /// Degree of every mode, in mode order.
    pub fn degrees(&self) -> Vec<usize> {
        (0..=self.l_max).flat_map(|l| std::iter::repeat_n(l, 2 * l + 1)).collect()
    }

    /// All harmonics at a unit vector `x`.
    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        let z = x[2].clamp(-1.0, 1.0);
        let phi = x[1].atan2(x[0]);
        let sin_theta = (1.0 - z * z).max(0.0).sqrt();
        let legendre = associated_legendre(self.l_max, z, sin_theta);
        let mut out = Vec::with_capacity(self.len());
        for l in 0..=self.l_max {
            out.push(self.norms[l][0] * legendre[l][0]);
            for m in 1..=l {
                let p = self.norms[l][m] * legendre[l][m];
                let mf = m as f64;
                out.push(p * (mf * phi).cos());
                out.push(p * (mf * phi).sin());
            }
        }
        out
    }

    /// `N × (l_max+1)²` matrix of harmonics evaluated at the cloud points.
    pub fn matrix(&self, cloud: &PointCloud) -> Result<DMatrix<f64>> {
        if cloud.dim() != 3 {
            return Err(Error::Argument("spherical harmonics need points in R^3".into()));
        }
        let mut out = DMatrix::zeros(cloud.len(), self.len());
        for (r, p) in cloud.points().enumerate() {
            for (c, v) in self.evaluate(p).into_iter().enumerate() {
                out[(r, c)] = v;
            }
        }
        Ok(out)
    }

    /// Manifold GP on the sphere over all `(l_max+1)²` harmonics.
    pub fn covariance_model(&self, spec: KernelSpec, cloud: &PointCloud) -> Result<CovarianceModel> {
        if spec.truncation != self.len() || spec.intrinsic_dim != 2 {
            return Err(Error::Argument(format!(
                "sphere oracle needs truncation {} and intrinsic dimension 2",
                self.len()
            )));
        }
        CovarianceModel::from_eigenpairs(spec, &self.eigenvalues(), &self.matrix(cloud)?)
    }
}

/// `P_l^m(z)` for `0 ≤ m ≤ l ≤ l_max`, without the Condon–Shortley phase.
fn associated_legendre(l_max: usize, z: f64, sin_theta: f64) -> Vec<Vec<f64>> {
    let mut p: Vec<Vec<f64>> = (0..=l_max).map(|l| vec![0.0; l + 1]).collect();
    let mut diag = 1.0;
    for m in 0..=l_max {
        if m > 0 {
            diag *= (2 * m - 1) as f64 * sin_theta;
        }
        p[m][m] = diag;
        if m < l_max {
            p[m + 1][m] = z * (2 * m + 1) as f64 * diag;
        }
        for l in (m + 2)..=l_max {
            p[l][m] = ((2 * l - 1) as f64 * z * p[l - 1][m] - (l + m - 1) as f64 * p[l - 2][m])
                / (l - m) as f64;
        }
    }
    p
}
