//! Point clouds standing in for a hidden manifold: loading, sampling and
//! subsampling.
//!
//! Every sampler is a pure function of its arguments and seed.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// `N` points in ambient dimension `d`, sampled from a manifold of declared
/// intrinsic dimension `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    coords: Vec<f64>,
    dim: usize,
    intrinsic_dim: usize,
    labels: Option<Vec<String>>,
}

impl PointCloud {
    /// Builds a cloud from explicit rows.
    pub fn from_rows(rows: Vec<Vec<f64>>, intrinsic_dim: usize) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::Parse {
                row: row + 1,
                message: format!("expected {dim} coordinates, found {}", r.len()),
            });
        }
        let coords = rows.into_iter().flatten().collect();
        Self::from_flat(coords, dim, intrinsic_dim)
    }

    /// Builds a cloud from row-major coordinates.
    pub fn from_flat(coords: Vec<f64>, dim: usize, intrinsic_dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Degenerate("ambient dimension must be at least 1".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::Argument(format!(
                "{} coordinates do not divide into rows of {dim}",
                coords.len()
            )));
        }
        let n = coords.len() / dim;
        if n < 2 {
            return Err(Error::Degenerate(format!("a point cloud needs at least 2 points, got {n}")));
        }
        if intrinsic_dim == 0 || intrinsic_dim > dim {
            return Err(Error::Argument(format!(
                "intrinsic dimension {intrinsic_dim} must lie in [1, {dim}]"
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Argument("point coordinates must be finite".into()));
        }
        Ok(Self { coords, dim, intrinsic_dim, labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::Argument(format!(
                "{} labels for {} points",
                labels.len(),
                self.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Ambient dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Declared intrinsic dimension `m`.
    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic_dim
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        euclidean(self.point(i), self.point(j))
    }

    /// Angles in `[-π, π)` of a planar cloud, as used by the circle objectives.
    pub fn angles(&self) -> Result<Vec<f64>> {
        if self.dim != 2 {
            return Err(Error::Argument(format!("angles need a planar cloud, got d={}", self.dim)));
        }
        Ok(self.points().map(|p| wrap_angle(p[1].atan2(p[0]))).collect())
    }

    /// The sub-cloud at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            crate::error::check_index(i, self.len())?;
            coords.extend_from_slice(self.point(i));
        }
        let mut out = Self::from_flat(coords, self.dim, self.intrinsic_dim)?;
        if let Some(labels) = &self.labels {
            out.labels = Some(indices.iter().map(|&i| labels[i].clone()).collect());
        }
        Ok(out)
    }

    /// Serializes as comma-separated rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|c| format!("{c:.17e}")).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn wrap_angle(theta: f64) -> f64 {
    if theta >= PI {
        theta - 2.0 * PI
    } else {
        theta
    }
}

/// Parses whitespace- or comma-separated rows. Blank lines and lines starting
/// with `#` are skipped; the ambient dimension comes from the first data row.
pub fn parse_point_cloud(text: &str, intrinsic_dim: usize) -> Result<PointCloud> {
    let mut coords = Vec::new();
    let mut dim = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>().map_err(|e| Error::Parse {
                    row: lineno + 1,
                    message: format!("bad number {t:?}: {e}"),
                })
            })
            .collect::<Result<_>>()?;
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(Error::Parse {
                    row: lineno + 1,
                    message: format!("expected {d} coordinates, found {}", row.len()),
                })
            }
            Some(_) => {}
        }
        coords.extend(row);
    }
    let dim = dim.ok_or_else(|| Error::Degenerate("point cloud file has no rows".into()))?;
    PointCloud::from_flat(coords, dim, intrinsic_dim)
}

pub fn load_point_cloud(path: impl AsRef<Path>, intrinsic_dim: usize) -> Result<PointCloud> {
    let text = std::fs::read_to_string(path)?;
    parse_point_cloud(&text, intrinsic_dim)
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` i.i.d. uniform points on the unit circle in ℝ².
pub fn sample_circle(n: usize, seed: u64) -> Result<PointCloud> {
    if n < 2 {
        return Err(Error::Degenerate(format!("circle sample needs n >= 2, got {n}")));
    }
    let mut rng = rng(seed);
    let mut coords = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let theta = rng.random_range(-PI..PI);
        coords.push(theta.cos());
        coords.push(theta.sin());
    }
    PointCloud::from_flat(coords, 2, 1)
}

/// `n` i.i.d. uniform points on the unit sphere S² ⊂ ℝ³ (normalized Gaussians).
pub fn sample_sphere(n: usize, seed: u64) -> Result<PointCloud> {
    if n < 4 {
        return Err(Error::Degenerate(format!("sphere sample needs n >= 4, got {n}")));
    }
    let mut rng = rng(seed);
    let mut coords = Vec::with_capacity(3 * n);
    while coords.len() < 3 * n {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm < 1e-12 {
            continue;
        }
        coords.extend(v.iter().map(|c| c / norm));
    }
    PointCloud::from_flat(coords, 3, 2)
}

/// `n` area-uniform points on the torus with center-line radius `major` and
/// tube radius `minor` (rejection sampling on the tube angle).
pub fn sample_torus(n: usize, major: f64, minor: f64, seed: u64) -> Result<PointCloud> {
    if n < 4 {
        return Err(Error::Degenerate(format!("torus sample needs n >= 4, got {n}")));
    }
    if !(minor > 0.0 && major > minor) {
        return Err(Error::Argument(format!(
            "torus radii need major > minor > 0, got {major}, {minor}"
        )));
    }
    let mut rng = rng(seed);
    let mut coords = Vec::with_capacity(3 * n);
    while coords.len() < 3 * n {
        let u = rng.random_range(-PI..PI);
        let v = rng.random_range(-PI..PI);
        // area element is proportional to major + minor cos v
        let accept: f64 = rng.random();
        if accept * (major + minor) > major + minor * v.cos() {
            continue;
        }
        let r = major + minor * v.cos();
        coords.extend([r * u.cos(), r * u.sin(), minor * v.sin()]);
    }
    PointCloud::from_flat(coords, 3, 2)
}

/// `n` area-uniform points on a rolled sheet: the spiral
/// `r(φ) = inner + gap·φ/2π`, `φ ∈ [0, 2π·turns]`, swept along `y ∈ [0, width]`.
/// Neighbouring layers are `gap` apart in ℝ³.
pub fn sample_swiss_roll(
    n: usize,
    inner: f64,
    gap: f64,
    turns: f64,
    width: f64,
    seed: u64,
) -> Result<PointCloud> {
    if n < 4 {
        return Err(Error::Degenerate(format!("swiss roll sample needs n >= 4, got {n}")));
    }
    if !(inner > 0.0 && gap > 0.0 && turns > 0.0 && width > 0.0) {
        return Err(Error::Argument("swiss roll parameters must be positive".into()));
    }
    let b = gap / (2.0 * PI);
    let phi_max = 2.0 * PI * turns;
    // arc length element |dx/dφ| = √(r² + b²), largest at the outer end
    let speed = |phi: f64| ((inner + b * phi).powi(2) + b * b).sqrt();
    let max_speed = speed(phi_max);
    let mut rng = rng(seed);
    let mut coords = Vec::with_capacity(3 * n);
    while coords.len() < 3 * n {
        let phi = rng.random_range(0.0..phi_max);
        let accept: f64 = rng.random();
        if accept * max_speed > speed(phi) {
            continue;
        }
        let y = rng.random_range(0.0..width);
        let r = inner + b * phi;
        coords.extend([r * phi.cos(), y, r * phi.sin()]);
    }
    PointCloud::from_flat(coords, 3, 2)
}

/// Indices of a uniformly random `n`-subset of `0..total`, without replacement.
pub fn subsample_indices(total: usize, n: usize, seed: u64) -> Result<Vec<usize>> {
    if n < 2 || n > total {
        return Err(Error::Argument(format!("subsample size {n} outside [2, {total}]")));
    }
    let mut rng = rng(seed);
    Ok(index::sample(&mut rng, total, n).into_vec())
}

pub fn subsample(cloud: &PointCloud, n: usize, seed: u64) -> Result<PointCloud> {
    let indices = subsample_indices(cloud.len(), n, seed)?;
    cloud.select(&indices)
}
