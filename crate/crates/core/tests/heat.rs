use std::sync::Arc;

use ggp_ucb::benchmarks::heat::analytic_heat;
use ggp_ucb::benchmarks::{heat_objective, make_heat_problem, HeatForward};
use ggp_ucb::graph::{graph_spectrum, ConnectivityRule, Normalization};
use ggp_ucb::point_cloud::sample_sphere;

fn forward(n: usize, k: usize, t: f64) -> Arc<HeatForward> {
    let cloud = Arc::new(sample_sphere(n, 21).unwrap());
    let h = ConnectivityRule::Theory.radius(n, 2, 2.0);
    let spectrum = graph_spectrum(&cloud, h, k, Normalization::EmpiricalL2).unwrap();
    Arc::new(HeatForward::new(cloud, &spectrum, 2.0, t).unwrap())
}

fn geodesic(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    dot.clamp(-1.0, 1.0).acos()
}

#[test]
fn objective_argmax_lies_near_the_source() {
    let fwd = forward(1500, 50, 0.25);
    for (trial, z_star) in [3usize, 400, 777, 1200].into_iter().enumerate() {
        let problem = make_heat_problem(fwd.clone(), z_star, 0.0, 5, trial as u64).unwrap();
        let best = problem.best_attainable();
        let cloud = problem.cloud();
        let d = geodesic(cloud.point(best), cloud.point(z_star));
        assert!(d < 0.3, "source {z_star}: argmax {best} is {d} away");
    }
}

#[test]
fn constant_mode_conserves_total_heat() {
    let fwd = forward(600, 20, 0.4);
    let cloud = fwd.cloud().clone();
    for z in [0, 123, 599] {
        let phi0 = ggp_ucb::benchmarks::heat::initial_heat(&cloud, 2.0, z);
        let mean0 = phi0.iter().sum::<f64>() / phi0.len() as f64;
        let g = fwd.map(z).unwrap();
        let mean_t = g.iter().sum::<f64>() / g.len() as f64;
        assert!((mean_t - mean0).abs() < 1e-9 * mean0, "{mean_t} vs {mean0}");
    }
}

#[test]
fn analytic_heat_at_time_zero_projects_the_source() {
    // the degree-limited projection still peaks at the source
    let cloud = sample_sphere(400, 5).unwrap();
    let u0 = analytic_heat(&cloud, 2.0, 9, 0.0, 5).unwrap();
    let phi0 = ggp_ucb::benchmarks::heat::initial_heat(&cloud, 2.0, 9);
    let peak = u0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let idx = u0.iter().position(|v| *v == peak).unwrap();
    let dot: f64 = cloud.point(idx).iter().zip(cloud.point(9)).map(|(a, b)| a * b).sum();
    assert!(dot > 0.9);
    assert!(phi0[9] > phi0.iter().sum::<f64>() / 400.0);
}

#[test]
fn objective_is_bounded_by_the_cap() {
    let fwd = forward(300, 16, 0.3);
    let problem = make_heat_problem(fwd, 10, 0.0, 5, 0).unwrap();
    for z in 0..problem.len() {
        let v = heat_objective(&problem, z).unwrap();
        assert!(v.is_finite() && v <= ggp_ucb::benchmarks::heat::OBJECTIVE_CAP);
    }
    assert!(heat_objective(&problem, problem.len()).is_err());
}
