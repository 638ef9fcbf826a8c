use std::f64::consts::PI;

use ggp_ucb::benchmarks::EuclideanKernel;
use ggp_ucb::ggp::oracle::{circle_eigenfunction, circle_eigenvalues};
use ggp_ucb::ggp::sphere_eigenpairs;
use ggp_ucb::point_cloud::sample_sphere;
use ggp_ucb::special::bessel_k;

fn legendre(l: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return p0;
    }
    for k in 1..l {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

#[test]
fn sphere_table_has_36_modes_up_to_30() {
    let h = sphere_eigenpairs(5);
    let ev = h.eigenvalues();
    assert_eq!(ev.len(), 36);
    assert_eq!(ev.iter().copied().fold(0.0, f64::max), 30.0);
    assert_eq!(ev.iter().filter(|v| **v <= 30.0).count(), 36);
}

#[test]
fn addition_theorem_holds() {
    let h = sphere_eigenpairs(5);
    let cloud = sample_sphere(40, 11).unwrap();
    let degrees = h.degrees();
    for a in 0..20 {
        let (x, y) = (cloud.point(a), cloud.point(a + 20));
        let (ya, yb) = (h.evaluate(x), h.evaluate(y));
        let dot: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
        for l in 0..=5 {
            let sum: f64 = (0..h.len()).filter(|&i| degrees[i] == l).map(|i| ya[i] * yb[i]).sum();
            let expected = (2 * l + 1) as f64 * legendre(l, dot);
            assert!((sum - expected).abs() <= 1e-8 * (2 * l + 1) as f64, "l={l}: {sum} vs {expected}");
        }
    }
}

#[test]
fn circle_eigenfunctions_are_orthonormal_under_the_uniform_measure() {
    let n = 1000;
    let ev = circle_eigenvalues(11);
    assert_eq!(ev, vec![0.0, 1.0, 1.0, 4.0, 4.0, 9.0, 9.0, 16.0, 16.0, 25.0, 25.0]);
    for i in 0..11 {
        for j in 0..11 {
            let ip = (0..n)
                .map(|t| {
                    let theta = 2.0 * PI * t as f64 / n as f64 - PI;
                    circle_eigenfunction(i, theta) * circle_eigenfunction(j, theta)
                })
                .sum::<f64>()
                / n as f64;
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((ip - target).abs() < 1e-12);
        }
    }
}

#[test]
fn euclidean_matern_half_integer_closed_forms() {
    let kappa = 3.0;
    for i in 1..100 {
        let r = i as f64 * 0.02;
        let t = kappa * r;
        let cases = [
            (0.5, (-t).exp()),
            (1.5, (1.0 + t) * (-t).exp()),
            (2.5, (1.0 + t + t * t / 3.0) * (-t).exp()),
        ];
        for (nu, expected) in cases {
            let v = EuclideanKernel::Matern { nu, kappa }.evaluate(r).unwrap();
            assert!((v - expected).abs() <= 1e-10, "nu={nu} r={r}: {v} vs {expected}");
        }
    }
}

#[test]
fn bessel_k_half_order_closed_form() {
    for x in [0.01, 0.3, 1.0, 2.5, 10.0, 40.0] {
        let expected = (PI / (2.0 * x)).sqrt() * (-x).exp();
        assert!((bessel_k(0.5, x).unwrap() - expected).abs() <= 1e-12 * expected);
    }
}
