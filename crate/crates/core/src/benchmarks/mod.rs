//! Objectives for the experiments: closed-form circle benchmarks, sampled
//! GP truths, the ambient Euclidean kernel baseline and heat-source detection.

pub mod euclidean;
pub mod heat;

use std::f64::consts::{E, PI};

use crate::error::{check_index, Error, Result};
use crate::ggp::CovarianceModel;
use crate::point_cloud::PointCloud;

pub use euclidean::{euclidean_kernel_model, EuclideanKernel, EuclideanModel};
pub use heat::{heat_objective, make_heat_problem, HeatForward, HeatProblem};

pub fn levy(theta: f64) -> f64 {
    let a = 0.75 * theta;
    let b = (PI * (3.0 * theta + 3.0) / 2.0).sin();
    a * a * (1.0 + b * b)
}

/// Taken literally, including the signed `−0.1θ` in the first exponential.
pub fn ackley(theta: f64) -> f64 {
    -20.0 * (-0.1 * theta).exp() - (2.0 * PI * theta).cos().exp() + 20.0 + E
}

pub fn rastrigin(theta: f64) -> f64 {
    2.0 + theta * theta - 2.0 * (2.0 * PI * theta).cos()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CircleBenchmark {
    Levy,
    Ackley,
    Rastrigin,
}

impl CircleBenchmark {
    pub const ALL: [CircleBenchmark; 3] =
        [CircleBenchmark::Levy, CircleBenchmark::Ackley, CircleBenchmark::Rastrigin];

    pub fn name(self) -> &'static str {
        match self {
            CircleBenchmark::Levy => "levy",
            CircleBenchmark::Ackley => "ackley",
            CircleBenchmark::Rastrigin => "rastrigin",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown circle benchmark '{s}'")))
    }

    pub fn evaluate(self, theta: f64) -> f64 {
        match self {
            CircleBenchmark::Levy => levy(theta),
            CircleBenchmark::Ackley => ackley(theta),
            CircleBenchmark::Rastrigin => rastrigin(theta),
        }
    }

    /// Values at every cloud point, negated so that optimization maximizes.
    pub fn tabulate(self, cloud: &PointCloud) -> Result<Vec<f64>> {
        Ok(cloud.angles()?.into_iter().map(|t| -self.evaluate(t)).collect())
    }
}

/// Objectives known to the CLI, with a one-line description each.
pub fn list() -> Vec<(&'static str, &'static str)> {
    vec![
        ("levy", "negated Levy function on the unit circle"),
        ("ackley", "negated Ackley function on the unit circle"),
        ("rastrigin", "negated Rastrigin function on the unit circle"),
        ("matern-sample", "draw from a graph Matérn prior over the cloud"),
        ("se-sample", "draw from a graph squared-exponential prior over the cloud"),
        ("circle-matern-sample", "draw from the analytic circle Matérn prior"),
        ("heat", "heat-source detection on the unit sphere"),
    ]
}

/// A seeded prior draw, tabulated over the model's points.
pub fn sampled_truth(model: &CovarianceModel, seed: u64) -> Vec<f64> {
    model.sample_prior(seed)
}

/// `values[i]` for every `i` in `indices`.
pub fn restrict(values: &[f64], indices: &[usize]) -> Result<Vec<f64>> {
    indices
        .iter()
        .map(|&i| {
            check_index(i, values.len())?;
            Ok(values[i])
        })
        .collect()
}

/// Observation noise `level · ‖f‖₂ / √N`.
pub fn relative_noise_sd(truth: &[f64], level: f64) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let norm = truth.iter().map(|v| v * v).sum::<f64>().sqrt();
    level * norm / (truth.len() as f64).sqrt()
}
