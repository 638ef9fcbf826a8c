use ggp_ucb::ggp::{CovarianceModel, KernelSpec};
use ggp_ucb::graph::{graph_spectrum, Normalization};
use ggp_ucb::point_cloud::sample_circle;
use statrs::distribution::{ContinuousCDF, Normal};

fn model() -> CovarianceModel {
    let cloud = sample_circle(40, 2).unwrap();
    let spectrum = graph_spectrum(&cloud, 0.9, 8, Normalization::EmpiricalL2).unwrap();
    CovarianceModel::from_spectrum(KernelSpec::matern(2.0, 1.5, 8, 1), &spectrum).unwrap()
}

#[test]
fn coefficients_follow_the_matern_filter() {
    let m = model();
    for (w, l) in m.coefficients().iter().zip(m.eigenvalues()) {
        let expected = 2f64.powf(2.0 * 1.5 - 1.0) * (4.0 + l).powf(-1.5);
        assert!((w - expected).abs() <= 1e-14 * expected);
    }
    let se = KernelSpec::squared_exponential(0.3, 8, 2);
    for l in [0.0, 1.0, 7.5] {
        assert!((se.coefficient(l) - 0.3f64 * (-l * 0.3).exp()).abs() < 1e-15);
    }
}

#[test]
fn sample_covariance_matches_the_model() {
    let m = model();
    let draws = 4000;
    let idx = [0usize, 5, 13, 31];
    let samples: Vec<Vec<f64>> = (0..draws).map(|s| m.sample_prior(s as u64)).collect();
    for &i in &idx {
        for &j in &idx {
            let c = m.covariance(i, j).unwrap();
            let emp = samples.iter().map(|v| v[i] * v[j]).sum::<f64>() / draws as f64;
            // sd of the product is at most √(c_ii c_jj + c_ij²)
            let sd = ((m.covariance(i, i).unwrap() * m.covariance(j, j).unwrap() + c * c) / draws as f64).sqrt();
            assert!((emp - c).abs() < 5.0 * sd, "({i},{j}): {emp} vs {c}");
        }
    }
}

#[test]
fn standardized_marginal_passes_kolmogorov_smirnov() {
    let m = model();
    let sd = m.covariance(7, 7).unwrap().sqrt();
    let mut z: Vec<f64> = (0..2000).map(|s| m.sample_prior(10_000 + s)[7] / sd).collect();
    z.sort_by(f64::total_cmp);
    let normal = Normal::standard();
    let n = z.len() as f64;
    let d = z
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let f = normal.cdf(*v);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    // 1% critical value
    assert!(d < 1.63 / n.sqrt(), "KS statistic {d}");
}

#[test]
fn draws_are_seed_deterministic() {
    let m = model();
    assert_eq!(m.sample_prior(3), m.sample_prior(3));
    assert_ne!(m.sample_prior(3), m.sample_prior(4));
}
