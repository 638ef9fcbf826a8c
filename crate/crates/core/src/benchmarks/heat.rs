//! Heat-source detection on the unit sphere.
//!
//! Data come from the analytic spherical-harmonic solution of the heat
//! equation; the objective only sees the point cloud, through graph
//! eigenpairs.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_index, Error, Result};
use crate::ggp::sphere_eigenpairs;
use crate::graph::GraphSpectrum;
use crate::point_cloud::{rng, PointCloud};

/// Objective value used when the residual is exactly zero.
pub const OBJECTIVE_CAP: f64 = 1e12;

const UNIT_NORM_TOL: f64 = 1e-8;
const BLOCK: usize = 256;

fn check_unit_sphere(cloud: &PointCloud) -> Result<()> {
    if cloud.dim() != 3 {
        return Err(Error::Argument(format!("heat problems live on S² ⊂ R³, got d={}", cloud.dim())));
    }
    for (i, p) in cloud.points().enumerate() {
        let norm = p.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::Argument(format!("point {i} has norm {norm}, expected 1")));
        }
    }
    Ok(())
}

fn check_params(zeta: f64, t: f64) -> Result<()> {
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(Error::Argument(format!("zeta must be positive, got {zeta}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Argument(format!("t must be >= 0, got {t}")));
    }
    Ok(())
}

/// `exp(ζ zᵀx_j)` for every cloud point `x_j`.
pub fn initial_heat(cloud: &PointCloud, zeta: f64, z: usize) -> Vec<f64> {
    let c = cloud.point(z);
    cloud
        .points()
        .map(|p| (zeta * (p[0] * c[0] + p[1] * c[1] + p[2] * c[2])).exp())
        .collect()
}

/// Analytic heat at time `t` from a source at cloud point `z`, truncated to
/// harmonics of degree at most `l_max`. Inner products with the source are
/// Monte Carlo averages over the cloud.
pub fn analytic_heat(cloud: &PointCloud, zeta: f64, z: usize, t: f64, l_max: usize) -> Result<Vec<f64>> {
    check_unit_sphere(cloud)?;
    check_params(zeta, t)?;
    check_index(z, cloud.len())?;
    let harmonics = sphere_eigenpairs(l_max);
    let y = harmonics.matrix(cloud)?;
    let phi0 = DVector::from_vec(initial_heat(cloud, zeta, z));
    let n = cloud.len() as f64;
    let mut coeffs = y.tr_mul(&phi0) / n;
    for (c, lambda) in coeffs.iter_mut().zip(harmonics.eigenvalues()) {
        *c *= (-lambda * t).exp();
    }
    Ok((y * coeffs).iter().copied().collect())
}

/// Graph forward map `G_N(z) = Σ_{i≤k} ⟨φ_0^z, ψ_i⟩/⟨ψ_i, ψ_i⟩ e^{−λ_i t} ψ_i`
/// for every source `z`, cached column by column.
#[derive(Clone, Debug)]
pub struct HeatForward {
    cloud: Arc<PointCloud>,
    zeta: f64,
    t: f64,
    k: usize,
    /// Column `z` is `G_N(z)`.
    forward: DMatrix<f64>,
}

impl HeatForward {
    pub fn new(cloud: Arc<PointCloud>, spectrum: &GraphSpectrum, zeta: f64, t: f64) -> Result<Self> {
        check_unit_sphere(&cloud)?;
        check_params(zeta, t)?;
        if spectrum.n() != cloud.len() {
            return Err(Error::Argument(format!(
                "spectrum has {} points, cloud has {}",
                spectrum.n(),
                cloud.len()
            )));
        }
        let n = cloud.len();
        let k = spectrum.k();
        let psi = spectrum.eigenvectors();
        let mut scaled = psi.clone();
        for (r, mut col) in scaled.column_iter_mut().enumerate() {
            let norm_sq = psi.column(r).norm_squared();
            col *= (-spectrum.eigenvalues()[r] * t).exp() / norm_sq;
        }
        let mut forward = DMatrix::zeros(n, n);
        let mut start = 0;
        while start < n {
            let width = BLOCK.min(n - start);
            let sources = DMatrix::from_fn(n, width, |j, c| {
                let (p, q) = (cloud.point(j), cloud.point(start + c));
                (zeta * (p[0] * q[0] + p[1] * q[1] + p[2] * q[2])).exp()
            });
            let coeffs = psi.tr_mul(&sources);
            forward.columns_mut(start, width).copy_from(&(&scaled * coeffs));
            start += width;
        }
        Ok(Self { cloud, zeta, t, k, forward })
    }

    pub fn cloud(&self) -> &Arc<PointCloud> {
        &self.cloud
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Number of graph modes in the expansion.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.forward.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `G_N(z)`.
    pub fn map(&self, z: usize) -> Result<&[f64]> {
        check_index(z, self.len())?;
        let n = self.forward.nrows();
        Ok(&self.forward.as_slice()[z * n..(z + 1) * n])
    }
}

/// Observations of the heat from a hidden source `z_star`, plus everything
/// needed to evaluate the approximate objective.
#[derive(Clone, Debug)]
pub struct HeatProblem {
    forward: Arc<HeatForward>,
    l_max: usize,
    z_star: usize,
    data: Vec<f64>,
    data_noise_sd: f64,
}

/// Draws `d = φ(·, t) + η` with `φ` the analytic solution truncated at
/// `l_max` and `η ~ N(0, noise_sd² I)` seeded by `seed`.
pub fn make_heat_problem(
    forward: Arc<HeatForward>,
    z_star: usize,
    noise_sd: f64,
    l_max: usize,
    seed: u64,
) -> Result<HeatProblem> {
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::Argument(format!("noise sd must be >= 0, got {noise_sd}")));
    }
    let mut data = analytic_heat(&forward.cloud, forward.zeta, z_star, forward.t, l_max)?;
    if noise_sd > 0.0 {
        let mut rng = rng(seed);
        for d in &mut data {
            *d += noise_sd * rng.sample::<f64, _>(StandardNormal);
        }
    }
    Ok(HeatProblem { forward, l_max, z_star, data, data_noise_sd: noise_sd })
}

impl HeatProblem {
    /// Problem with externally supplied data.
    pub fn with_data(forward: Arc<HeatForward>, z_star: usize, data: Vec<f64>) -> Result<Self> {
        check_index(z_star, forward.len())?;
        if data.len() != forward.len() {
            return Err(Error::Argument(format!(
                "data has {} entries, cloud has {}",
                data.len(),
                forward.len()
            )));
        }
        Ok(Self { forward, l_max: 0, z_star, data, data_noise_sd: 0.0 })
    }

    pub fn forward(&self) -> &HeatForward {
        &self.forward
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.forward.cloud
    }

    pub fn z_star(&self) -> usize {
        self.z_star
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_noise_sd(&self) -> f64 {
        self.data_noise_sd
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// `f_N` at every cloud point.
    pub fn tabulate(&self) -> Vec<f64> {
        (0..self.len()).map(|z| self.value(z)).collect()
    }

    fn value(&self, z: usize) -> f64 {
        let n = self.len();
        let g = &self.forward.forward.as_slice()[z * n..(z + 1) * n];
        let sup = self.data.iter().zip(g).map(|(d, g)| (d - g).abs()).fold(0.0, f64::max);
        if sup == 0.0 {
            OBJECTIVE_CAP
        } else {
            (-sup.ln()).min(OBJECTIVE_CAP)
        }
    }

    /// Maximizer of `f_N` over the cloud (lowest index on ties).
    pub fn best_attainable(&self) -> usize {
        let values = self.tabulate();
        let mut best = 0;
        for (i, v) in values.iter().enumerate() {
            if *v > values[best] {
                best = i;
            }
        }
        best
    }

    /// `‖z* − x_z‖₂`.
    pub fn distance_to_source(&self, z: usize) -> Result<f64> {
        check_index(z, self.len())?;
        Ok(self.cloud().distance(self.z_star, z))
    }
}

/// `f_N(z) = −log ‖d − G_N(z)‖_∞`, capped at [`OBJECTIVE_CAP`].
pub fn heat_objective(problem: &HeatProblem, z: usize) -> Result<f64> {
    check_index(z, problem.len())?;
    Ok(problem.value(z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{graph_spectrum, Normalization};
    use crate::point_cloud::sample_sphere;

    fn setup(n: usize, t: f64) -> (Arc<PointCloud>, GraphSpectrum, Arc<HeatForward>) {
        let cloud = Arc::new(sample_sphere(n, 3).unwrap());
        let spectrum = graph_spectrum(&cloud, 0.7, 16, Normalization::EmpiricalL2).unwrap();
        let forward = Arc::new(HeatForward::new(cloud.clone(), &spectrum, 2.0, t).unwrap());
        (cloud, spectrum, forward)
    }

    #[test]
    fn cached_map_matches_direct_projection() {
        let (cloud, spectrum, forward) = setup(200, 0.3);
        let z = 17;
        let phi = DVector::from_vec(initial_heat(&cloud, 2.0, z));
        let mut direct = DVector::zeros(200);
        for r in 0..spectrum.k() {
            let psi = spectrum.eigenvectors().column(r);
            let a = psi.dot(&phi) / psi.norm_squared();
            direct += psi * (a * (-spectrum.eigenvalues()[r] * 0.3).exp());
        }
        let cached = forward.map(z).unwrap();
        for (a, b) in cached.iter().zip(direct.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn forward_map_ignores_normalization() {
        let (cloud, spectrum, forward) = setup(150, 0.25);
        let other = HeatForward::new(cloud, &spectrum.renormalized(Normalization::EuclideanUnit), 2.0, 0.25)
            .unwrap();
        for (a, b) in forward.map(5).unwrap().iter().zip(other.map(5).unwrap()) {
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn noise_free_data_is_deterministic() {
        let (_, _, forward) = setup(120, 0.25);
        let a = make_heat_problem(forward.clone(), 3, 0.0, 5, 1).unwrap();
        let b = make_heat_problem(forward, 3, 0.0, 5, 2).unwrap();
        assert_eq!(a.data(), b.data());
    }

    #[test]
    fn objective_invariant_under_common_shift() {
        let (_, _, forward) = setup(120, 0.25);
        let p = make_heat_problem(forward.clone(), 3, 0.1, 5, 9).unwrap();
        let base = heat_objective(&p, 40).unwrap();
        let shift = 0.75;
        let g = forward.map(40).unwrap();
        let shifted_sup = p.data().iter().zip(g).map(|(d, g)| ((d + shift) - (g + shift)).abs()).fold(0.0, f64::max);
        assert!((base + shifted_sup.ln()).abs() < 1e-12);
    }

    #[test]
    fn exact_match_hits_the_cap() {
        let (_, _, forward) = setup(100, 0.2);
        let data = forward.map(7).unwrap().to_vec();
        let p = HeatProblem::with_data(forward, 7, data).unwrap();
        assert_eq!(heat_objective(&p, 7).unwrap(), OBJECTIVE_CAP);
        assert_eq!(p.best_attainable(), 7);
    }

    #[test]
    fn rejects_off_sphere_clouds() {
        let cloud = PointCloud::from_rows(
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, -1.0, 0.0]],
            2,
        )
        .unwrap();
        assert!(analytic_heat(&cloud, 2.0, 0, 0.1, 5).is_err());
    }
}
