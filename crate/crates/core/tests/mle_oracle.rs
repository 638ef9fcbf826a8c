use std::f64::consts::PI;

use ggp_ucb::ggp::{CovarianceModel, KernelSpec};
use ggp_ucb::graph::{graph_spectrum, GraphSpectrum, Normalization};
use ggp_ucb::mle::{MleFamily, MleProblem};
use ggp_ucb::point_cloud::{sample_circle, subsample_indices};
use nalgebra::{DMatrix, DVector};

fn setup() -> (GraphSpectrum, Vec<usize>, Vec<f64>) {
    let cloud = sample_circle(200, 4).unwrap();
    let spectrum = graph_spectrum(&cloud, 4.0 / 200f64.sqrt(), 15, Normalization::EmpiricalL2).unwrap();
    let model = CovarianceModel::from_spectrum(KernelSpec::matern(1.0, 2.0, 15, 1), &spectrum).unwrap();
    let truth = model.sample_prior(5);
    let queries = subsample_indices(200, 25, 6).unwrap();
    let observations = queries.iter().map(|&q| truth[q]).collect();
    (spectrum, queries, observations)
}

/// `−log N(y; 0, A C Aᵀ + σ² I)` through an LU inverse and determinant.
fn dense_nll(spectrum: &GraphSpectrum, k: usize, s: f64, queries: &[usize], y: &[f64], noise_sd: f64) -> f64 {
    let l = queries.len();
    let psi = spectrum.eigenvectors();
    let mut sigma = DMatrix::identity(l, l) * noise_sd * noise_sd;
    for r in 0..k {
        let w = (1.0 + spectrum.eigenvalues()[r]).powf(-s);
        for a in 0..l {
            for b in 0..l {
                sigma[(a, b)] += w * psi[(queries[a], r)] * psi[(queries[b], r)];
            }
        }
    }
    let y = DVector::from_column_slice(y);
    let lu = sigma.clone().lu();
    let quad = y.dot(&(lu.try_inverse().unwrap() * &y));
    0.5 * (quad + sigma.determinant().ln() + l as f64 * (2.0 * PI).ln())
}

#[test]
fn likelihood_matches_dense_density() {
    let (spectrum, queries, y) = setup();
    for noise in [0.05, 0.2] {
        let p = MleProblem {
            spectrum: &spectrum,
            family: MleFamily::Matern { kappa: 1.0 },
            truncation: 15,
            intrinsic_dim: 1,
            queries: &queries,
            observations: &y,
            noise_sd: noise,
            grid: vec![2.0],
        };
        for s in [1.0, 2.0, 3.5] {
            let ours = p.negative_log_likelihood(s).unwrap();
            let oracle = dense_nll(&spectrum, 15, s, &queries, &y, noise);
            assert!((ours - oracle).abs() < 1e-8, "s={s} noise={noise}: {ours} vs {oracle}");
        }
    }
}

#[test]
fn estimate_is_the_grid_argmin() {
    let (spectrum, queries, y) = setup();
    let grid = MleFamily::Matern { kappa: 1.0 }.default_grid();
    let p = MleProblem {
        spectrum: &spectrum,
        family: MleFamily::Matern { kappa: 1.0 },
        truncation: 15,
        intrinsic_dim: 1,
        queries: &queries,
        observations: &y,
        noise_sd: 0.05,
        grid: grid.clone(),
    };
    let best = grid
        .iter()
        .copied()
        .min_by(|a, b| dense_nll(&spectrum, 15, *a, &queries, &y, 0.05).total_cmp(&dense_nll(&spectrum, 15, *b, &queries, &y, 0.05)))
        .unwrap();
    assert_eq!(p.estimate().unwrap(), best);
}

#[test]
fn mismatched_inputs_are_rejected() {
    let (spectrum, queries, y) = setup();
    let p = MleProblem {
        spectrum: &spectrum,
        family: MleFamily::SquaredExponential,
        truncation: 15,
        intrinsic_dim: 1,
        queries: &queries[..3],
        observations: &y,
        noise_sd: 0.1,
        grid: vec![0.1],
    };
    assert!(p.estimate().is_err());
    let p = MleProblem { queries: &queries, truncation: 16, ..p };
    assert!(p.negative_log_likelihood(0.1).is_err());
}
