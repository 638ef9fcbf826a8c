//! ε-neighborhood graphs over a point cloud, the unnormalized graph Laplacian
//! `D - W`, and its low-frequency spectrum.

use std::collections::VecDeque;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::point_cloud::PointCloud;

/// Eigenvalues below this are treated as exact zeros of the Laplacian.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-10;

/// Volume of the unit ball in ℝ^m.
pub fn unit_ball_volume(m: usize) -> f64 {
    let half = m as f64 / 2.0;
    PI.powf(half) / gamma(half + 1.0)
}

/// The weight shared by every edge of an ε-graph: `2(m+2) / (N ν_m h^{m+2})`.
pub fn edge_weight(n: usize, m: usize, h: f64) -> f64 {
    2.0 * (m as f64 + 2.0) / (n as f64 * unit_ball_volume(m) * h.powi(m as i32 + 2))
}

/// Indicator-kernel ε-graph. Every edge carries the same weight, so the
/// graph is stored as symmetric adjacency lists without self-loops.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    neighbors: Vec<Vec<usize>>,
    h: f64,
    coefficient: f64,
}

impl WeightedGraph {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// Connectivity radius.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// The common edge weight.
    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        if i != j && self.neighbors[i].binary_search(&j).is_ok() {
            self.coefficient
        } else {
            0.0
        }
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.neighbors[i].len() as f64 * self.coefficient
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Number of connected components (breadth-first search).
    pub fn components(&self) -> usize {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(i) = queue.pop_front() {
                for &j in &self.neighbors[i] {
                    if !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        count
    }

    /// `Δ_N v` without forming the dense Laplacian.
    pub fn apply_laplacian(&self, v: &[f64]) -> Vec<f64> {
        self.neighbors
            .iter()
            .enumerate()
            .map(|(i, nb)| self.coefficient * nb.iter().map(|&j| v[i] - v[j]).sum::<f64>())
            .collect()
    }

    /// `½ Σ_ij W_ij (v_i − v_j)²`.
    pub fn dirichlet_energy(&self, v: &[f64]) -> f64 {
        let total: f64 = self
            .neighbors
            .iter()
            .enumerate()
            .map(|(i, nb)| nb.iter().map(|&j| (v[i] - v[j]).powi(2)).sum::<f64>())
            .sum();
        0.5 * self.coefficient * total
    }
}

/// Builds the ε-neighborhood graph `W_ij = coefficient · 1{|x_i − x_j| < h}`,
/// `W_ii = 0`, with `m` taken from the cloud's intrinsic dimension.
pub fn build_weight_matrix(cloud: &PointCloud, h: f64) -> Result<WeightedGraph> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Argument(format!("connectivity radius must be positive, got {h}")));
    }
    let n = cloud.len();
    let h2 = h * h;
    let mut neighbors = vec![Vec::new(); n];
    for i in 0..n {
        let xi = cloud.point(i);
        for j in (i + 1)..n {
            let d2: f64 = xi.iter().zip(cloud.point(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 < h2 {
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
    }
    for nb in &mut neighbors {
        nb.sort_unstable();
    }
    Ok(WeightedGraph { neighbors, h, coefficient: edge_weight(n, cloud.intrinsic_dim(), h) })
}

/// Dense unnormalized Laplacian `Δ_N = D − W`.
pub fn laplacian(graph: &WeightedGraph) -> DMatrix<f64> {
    let n = graph.len();
    let mut lap = DMatrix::zeros(n, n);
    for i in 0..n {
        lap[(i, i)] = graph.degree(i);
        for &j in graph.neighbors(i) {
            lap[(i, j)] = -graph.coefficient;
        }
    }
    lap
}

/// Amplitude convention for eigenvectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Euclidean norm 1 (orthonormal in ℝ^N).
    EuclideanUnit,
    /// Euclidean norm √N, i.e. unit norm under the empirical measure.
    #[default]
    EmpiricalL2,
}

impl Normalization {
    pub fn vector_norm(self, n: usize) -> f64 {
        match self {
            Normalization::EuclideanUnit => 1.0,
            Normalization::EmpiricalL2 => (n as f64).sqrt(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "euclidean-unit" => Ok(Self::EuclideanUnit),
            "empirical-l2" => Ok(Self::EmpiricalL2),
            other => Err(Error::Argument(format!("unknown normalization {other:?}"))),
        }
    }
}

/// The `k` algebraically smallest eigenpairs of a graph Laplacian.
#[derive(Clone, Debug)]
pub struct GraphSpectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    normalization: Normalization,
}

impl GraphSpectrum {
    /// Wraps precomputed eigenpairs. Columns are rescaled to the requested
    /// normalization and the sign convention is applied.
    pub fn from_parts(
        eigenvalues: Vec<f64>,
        mut eigenvectors: DMatrix<f64>,
        normalization: Normalization,
    ) -> Result<Self> {
        if eigenvalues.len() != eigenvectors.ncols() {
            return Err(Error::Argument(format!(
                "{} eigenvalues for {} eigenvectors",
                eigenvalues.len(),
                eigenvectors.ncols()
            )));
        }
        if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Argument("eigenvalues must be sorted ascending".into()));
        }
        let target = normalization.vector_norm(eigenvectors.nrows());
        for mut col in eigenvectors.column_iter_mut() {
            let norm = col.norm();
            if norm == 0.0 {
                return Err(Error::Argument("zero eigenvector".into()));
            }
            let sign = col.iter().find(|v| v.abs() > 1e-10).map_or(1.0, |v| v.signum());
            col *= sign * target / norm;
        }
        Ok(Self { eigenvalues, eigenvectors, normalization })
    }

    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Number of points the eigenvectors are indexed by.
    pub fn n(&self) -> usize {
        self.eigenvectors.nrows()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `N × k` matrix whose columns are the eigenvectors.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// The first `k` eigenpairs.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.k() {
            return Err(Error::Argument(format!("truncation {k} outside [1, {}]", self.k())));
        }
        Ok(Self {
            eigenvalues: self.eigenvalues[..k].to_vec(),
            eigenvectors: self.eigenvectors.columns(0, k).into_owned(),
            normalization: self.normalization,
        })
    }

    /// Same eigenpairs under another amplitude convention.
    pub fn renormalized(&self, normalization: Normalization) -> Self {
        let n = self.n();
        let scale = normalization.vector_norm(n) / self.normalization.vector_norm(n);
        Self {
            eigenvalues: self.eigenvalues.clone(),
            eigenvectors: &self.eigenvectors * scale,
            normalization,
        }
    }
}

/// Symmetric eigendecomposition, eigenvalues ascending, eigenvectors as columns.
pub fn symmetric_eigen(matrix: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = matrix.nrows();
    if n != matrix.ncols() {
        return Err(Error::Argument("eigendecomposition needs a square matrix".into()));
    }
    let a = faer::Mat::<f64>::from_fn(n, n, |i, j| matrix[(i, j)]);
    let eig = a
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numerical(format!("symmetric eigensolver failed: {e:?}")))?;
    let values = eig.S().column_vector();
    let vectors = eig.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues = order.iter().map(|&i| values[i]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    Ok((eigenvalues, eigenvectors))
}

/// The `k` smallest eigenpairs of a graph Laplacian, sorted ascending.
///
/// The graph must be connected: a second eigenvalue below
/// [`ZERO_EIGENVALUE_TOL`] is reported as [`Error::Disconnected`].
pub fn spectrum(
    laplacian: &DMatrix<f64>,
    k: usize,
    normalization: Normalization,
) -> Result<GraphSpectrum> {
    let n = laplacian.nrows();
    if k == 0 || k > n {
        return Err(Error::Argument(format!("requested {k} eigenpairs of a {n}-point graph")));
    }
    let (values, vectors) = symmetric_eigen(laplacian)?;
    let zeros = values.iter().filter(|&&v| v < ZERO_EIGENVALUE_TOL).count();
    if zeros > 1 {
        return Err(Error::Disconnected { components: zeros });
    }
    let eigenvalues: Vec<f64> = values[..k].iter().map(|&v| v.max(0.0)).collect();
    GraphSpectrum::from_parts(eigenvalues, vectors.columns(0, k).into_owned(), normalization)
}

/// Builds the graph, checks connectivity, and returns its `k` smallest eigenpairs.
pub fn graph_spectrum(
    cloud: &PointCloud,
    h: f64,
    k: usize,
    normalization: Normalization,
) -> Result<GraphSpectrum> {
    let graph = build_weight_matrix(cloud, h)?;
    let components = graph.components();
    if components > 1 {
        return Err(Error::Disconnected { components });
    }
    spectrum(&laplacian(&graph), k, normalization)
}

/// Scaling rule for the connectivity radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConnectivityRule {
    /// `c · N^{-1/(2m)}`.
    Theory,
    /// `c · N^{-1/2}`, the convention used in the shipped experiments.
    Experiment,
}

impl ConnectivityRule {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "theory" => Ok(Self::Theory),
            "experiment" => Ok(Self::Experiment),
            other => Err(Error::Argument(format!("unknown connectivity rule {other:?}"))),
        }
    }

    pub fn radius(self, n: usize, m: usize, c: f64) -> f64 {
        let exponent = match self {
            Self::Theory => -1.0 / (2.0 * m as f64),
            Self::Experiment => -0.5,
        };
        c * (n as f64).powf(exponent)
    }
}

pub fn suggest_connectivity(cloud: &PointCloud, c: f64, rule: ConnectivityRule) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Argument(format!("connectivity coefficient must be positive, got {c}")));
    }
    Ok(rule.radius(cloud.len(), cloud.intrinsic_dim(), c))
}

/// Plateau detection parameters for [`detect_saturation`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaturationRule {
    /// Relative forward increment below which the spectrum counts as flat.
    pub threshold: f64,
    /// Consecutive flat increments required.
    pub run: usize,
}

impl Default for SaturationRule {
    fn default() -> Self {
        Self { threshold: 0.02, run: 3 }
    }
}

/// Suggests a truncation level: the smallest 1-based index `i ≥ 2` at which
/// `(λ_{j+1} − λ_j)/λ_j < threshold` holds for `run` consecutive `j ≥ i`, or
/// the list length when no plateau exists.
pub fn detect_saturation(eigenvalues: &[f64], rule: SaturationRule) -> usize {
    let n = eigenvalues.len();
    let flat = |j: usize| {
        // j is 1-based
        let (a, b) = (eigenvalues[j - 1], eigenvalues[j]);
        a > ZERO_EIGENVALUE_TOL && (b - a) / a < rule.threshold
    };
    let run = rule.run.max(1);
    (2..n)
        .find(|&i| i + run - 1 < n && (i..i + run).all(flat))
        .unwrap_or(n)
}

/// Least-squares factor `c` minimizing `Σ (c·graph_i − reference_i)²`.
pub fn fit_spectral_scale(graph: &[f64], reference: &[f64]) -> Result<f64> {
    if graph.len() != reference.len() || graph.is_empty() {
        return Err(Error::Argument("scale fit needs equal, nonempty lists".into()));
    }
    let num: f64 = graph.iter().zip(reference).map(|(g, r)| g * r).sum();
    let den: f64 = graph.iter().map(|g| g * g).sum();
    if den == 0.0 {
        return Err(Error::Degenerate("all graph eigenvalues are zero".into()));
    }
    Ok(num / den)
}

/// Residual `‖Δ_N ψ − λ ψ‖` for every eigenpair, relative to `‖ψ‖`.
pub fn relative_residuals(laplacian: &DMatrix<f64>, spectrum: &GraphSpectrum) -> Vec<f64> {
    spectrum
        .eigenvectors()
        .column_iter()
        .zip(spectrum.eigenvalues())
        .map(|(psi, &lambda)| {
            let psi: DVector<f64> = psi.into_owned();
            (laplacian * &psi - &psi * lambda).norm() / psi.norm()
        })
        .collect()
}
