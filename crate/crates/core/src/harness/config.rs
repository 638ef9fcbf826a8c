//! Flat `key = value` experiment configuration.
//!
//! Lines starting with `#` and blank lines are ignored, as is anything after
//! a `#` on a value line. List values are comma separated. Every key has a
//! default (see [`ExperimentConfig::default`]), so a config only needs the
//! keys it changes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::acquisition::{BetaMode, Recommendation, UcbConfig};
use crate::error::{Error, Result};
use crate::graph::{ConnectivityRule, Normalization};

/// Where the optimization cloud comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum CloudSource {
    Circle,
    Sphere,
    Torus { major: f64, minor: f64 },
    SwissRoll { inner: f64, gap: f64, turns: f64, width: f64 },
    File { path: PathBuf, intrinsic_dim: usize },
}

/// What is being optimized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Objective {
    /// Draw from the analytic circle Matérn prior.
    CircleMaternSample,
    /// Draw from a graph Matérn prior, built on the fine cloud when there is one.
    MaternSample,
    /// Draw from a graph squared-exponential prior, likewise.
    SeSample,
    Levy,
    Ackley,
    Rastrigin,
    Heat,
}

impl Objective {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "circle-matern-sample" => Self::CircleMaternSample,
            "matern-sample" => Self::MaternSample,
            "se-sample" => Self::SeSample,
            "levy" => Self::Levy,
            "ackley" => Self::Ackley,
            "rastrigin" => Self::Rastrigin,
            "heat" => Self::Heat,
            other => return Err(Error::Config(format!("unknown objective {other:?}"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::CircleMaternSample => "circle-matern-sample",
            Self::MaternSample => "matern-sample",
            Self::SeSample => "se-sample",
            Self::Levy => "levy",
            Self::Ackley => "ackley",
            Self::Rastrigin => "rastrigin",
            Self::Heat => "heat",
        }
    }
}

/// Surrogate prior family for the graph methods.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PriorFamily {
    Matern,
    SquaredExponential,
}

pub const METHODS: [&str; 5] = ["mgp-ucb", "ggp-ucb", "ggp-ucb-ml", "egp-ucb", "random"];

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub cloud: CloudSource,
    pub n: usize,
    /// When nonzero, truths live on a fine cloud of this many points and the
    /// optimizer sees a seeded subsample of `n` of them.
    pub fine_n: usize,
    pub h_rule: ConnectivityRule,
    pub h_coeff: f64,
    pub k: usize,
    pub normalization: Normalization,
    pub objective: Objective,
    pub truth_kappa_sq: f64,
    pub truth_s: f64,
    pub truth_tau: f64,
    /// Modes in the truth: analytic circle modes, or graph modes on the fine cloud.
    pub truth_k: usize,
    pub prior: PriorFamily,
    pub kappa_sq: f64,
    pub s: f64,
    pub tau: f64,
    /// Analytic modes used by `mgp-ucb`.
    pub oracle_k: usize,
    /// Observation noise as a fraction of the truth's root mean square.
    pub noise_level: f64,
    /// Absolute observation noise; overrides `noise_level` when set.
    pub noise_sd: Option<f64>,
    pub delta: f64,
    pub b_mode: String,
    pub a: f64,
    pub epsilon: f64,
    pub iterations: usize,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<String>,
    /// `κ` held fixed by `ggp-ucb-ml` Matérn fits; defaults to `√kappa_sq`.
    pub ml_kappa: Option<f64>,
    pub mle_stride: usize,
    pub egp_nu: Vec<f64>,
    pub egp_kappa: Vec<f64>,
    pub egp_tau: Vec<f64>,
    pub zeta: f64,
    pub t: f64,
    pub heat_noise_sd: f64,
    pub l_max: usize,
    pub exclude_visited: bool,
    pub recommendation: Recommendation,
    /// Random candidates scanned per iteration; 0 scans the whole cloud.
    pub acquisition_subsample: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            cloud: CloudSource::Circle,
            n: 500,
            fine_n: 0,
            h_rule: ConnectivityRule::Experiment,
            h_coeff: 4.0,
            k: 20,
            normalization: Normalization::EmpiricalL2,
            objective: Objective::CircleMaternSample,
            truth_kappa_sq: 15.0,
            truth_s: 2.0,
            truth_tau: 0.1,
            truth_k: 100,
            prior: PriorFamily::Matern,
            kappa_sq: 15.0,
            s: 2.0,
            tau: 0.1,
            oracle_k: 100,
            noise_level: 0.05,
            noise_sd: None,
            delta: 0.1,
            b_mode: "empirical".into(),
            a: 0.5,
            epsilon: 0.0,
            iterations: 50,
            trials: 50,
            seed: 0,
            methods: vec!["ggp-ucb".into()],
            ml_kappa: None,
            mle_stride: 1,
            egp_nu: vec![0.5, 1.5, 2.5],
            egp_kappa: vec![1.0, 3.0, 10.0],
            egp_tau: vec![0.01, 0.05, 0.2],
            zeta: 2.0,
            t: 0.25,
            heat_noise_sd: 0.1,
            l_max: 5,
            exclude_visited: true,
            recommendation: Recommendation::BestObserved,
            acquisition_subsample: 0,
        }
    }
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?} as a number")))
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|v| number(key, v))
        .collect()
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got {value:?}"))),
    }
}

impl ExperimentConfig {
    /// Parses config text; relative `cloud_file` paths resolve against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut config = Self::default();
        let mut cloud_kind = None;
        let mut torus = (0.4, 0.15);
        let mut roll = (0.15, 0.15, 1.5, 1.0);
        let mut file: Option<PathBuf> = None;
        let mut intrinsic_dim = 2;
        for (row, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { row: row + 1, message: format!("expected key = value, got {line:?}") })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "cloud" => cloud_kind = Some(value.to_string()),
                "torus_major" => torus.0 = number(key, value)?,
                "torus_minor" => torus.1 = number(key, value)?,
                "roll_inner" => roll.0 = number(key, value)?,
                "roll_gap" => roll.1 = number(key, value)?,
                "roll_turns" => roll.2 = number(key, value)?,
                "roll_width" => roll.3 = number(key, value)?,
                "cloud_file" => {
                    let p = PathBuf::from(value);
                    file = Some(match base {
                        Some(b) if p.is_relative() => b.join(p),
                        _ => p,
                    });
                }
                "intrinsic_dim" => intrinsic_dim = number(key, value)?,
                _ => config.set(key, value).map_err(|e| match e {
                    Error::Config(m) => Error::Parse { row: row + 1, message: m },
                    other => other,
                })?,
            }
        }
        if let Some(kind) = cloud_kind {
            config.cloud = match kind.as_str() {
                "circle" => CloudSource::Circle,
                "sphere" => CloudSource::Sphere,
                "torus" => CloudSource::Torus { major: torus.0, minor: torus.1 },
                "swiss-roll" => CloudSource::SwissRoll { inner: roll.0, gap: roll.1, turns: roll.2, width: roll.3 },
                "file" => CloudSource::File {
                    path: file.ok_or_else(|| Error::Config("cloud = file needs cloud_file".into()))?,
                    intrinsic_dim,
                },
                other => return Err(Error::Config(format!("unknown cloud {other:?}"))),
            };
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent())
    }

    /// Sets one scalar or list key. Cloud keys other than `n` and `fine_n`
    /// are only accepted in config files.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "name" => self.name = value.to_string(),
            "n" => self.n = number(key, value)?,
            "fine_n" => self.fine_n = number(key, value)?,
            "h_rule" => self.h_rule = ConnectivityRule::parse(value).map_err(|e| Error::Config(e.to_string()))?,
            "h_coeff" => self.h_coeff = number(key, value)?,
            "k" => self.k = number(key, value)?,
            "normalization" => {
                self.normalization = Normalization::parse(value).map_err(|e| Error::Config(e.to_string()))?
            }
            "objective" => self.objective = Objective::parse(value)?,
            "truth_kappa_sq" => self.truth_kappa_sq = number(key, value)?,
            "truth_s" => self.truth_s = number(key, value)?,
            "truth_tau" => self.truth_tau = number(key, value)?,
            "truth_k" => self.truth_k = number(key, value)?,
            "prior" => {
                self.prior = match value {
                    "matern" => PriorFamily::Matern,
                    "se" => PriorFamily::SquaredExponential,
                    other => return Err(Error::Config(format!("unknown prior {other:?}"))),
                }
            }
            "kappa_sq" => self.kappa_sq = number(key, value)?,
            "s" => self.s = number(key, value)?,
            "tau" => self.tau = number(key, value)?,
            "oracle_k" => self.oracle_k = number(key, value)?,
            "noise_level" => self.noise_level = number(key, value)?,
            "noise_sd" => self.noise_sd = Some(number(key, value)?),
            "delta" => self.delta = number(key, value)?,
            "b_mode" => self.b_mode = value.to_string(),
            "a" => self.a = number(key, value)?,
            "epsilon" => self.epsilon = number(key, value)?,
            "iterations" => self.iterations = number(key, value)?,
            "trials" => self.trials = number(key, value)?,
            "seed" => self.seed = number(key, value)?,
            "methods" => {
                self.methods = value.split(',').map(|m| m.trim().to_string()).filter(|m| !m.is_empty()).collect()
            }
            "ml_kappa" => self.ml_kappa = Some(number(key, value)?),
            "mle_stride" => self.mle_stride = number(key, value)?,
            "egp_nu" => self.egp_nu = list(key, value)?,
            "egp_kappa" => self.egp_kappa = list(key, value)?,
            "egp_tau" => self.egp_tau = list(key, value)?,
            "zeta" => self.zeta = number(key, value)?,
            "t" => self.t = number(key, value)?,
            "heat_noise_sd" => self.heat_noise_sd = number(key, value)?,
            "l_max" => self.l_max = number(key, value)?,
            "exclude_visited" => self.exclude_visited = boolean(key, value)?,
            "recommendation" => {
                self.recommendation = match value {
                    "best-observed" => Recommendation::BestObserved,
                    "posterior-mean" => Recommendation::PosteriorMean,
                    other => return Err(Error::Config(format!("unknown recommendation {other:?}"))),
                }
            }
            "acquisition_subsample" => self.acquisition_subsample = number(key, value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.trials == 0 {
            return fail("trials must be >= 1".into());
        }
        if self.iterations == 0 {
            return fail("iterations must be >= 1".into());
        }
        if self.n < 2 {
            return fail(format!("n must be >= 2, got {}", self.n));
        }
        if self.fine_n != 0 && self.fine_n < self.n {
            return fail(format!("fine_n {} is smaller than n {}", self.fine_n, self.n));
        }
        if self.k == 0 || self.k > self.n {
            return fail(format!("k must lie in [1, n], got {}", self.k));
        }
        if self.methods.is_empty() {
            return fail("methods must not be empty".into());
        }
        for m in &self.methods {
            if !METHODS.contains(&m.as_str()) {
                return fail(format!("unknown method {m:?}; known: {}", METHODS.join(", ")));
            }
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            return fail("methods must not repeat".into());
        }
        for (name, v) in [
            ("h_coeff", self.h_coeff),
            ("kappa_sq", self.kappa_sq),
            ("s", self.s),
            ("tau", self.tau),
            ("truth_kappa_sq", self.truth_kappa_sq),
            ("truth_s", self.truth_s),
            ("truth_tau", self.truth_tau),
            ("zeta", self.zeta),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.noise_level >= 0.0) || self.noise_sd.is_some_and(|s| !(s >= 0.0)) {
            return fail("noise must be >= 0".into());
        }
        if !(self.t >= 0.0) || !(self.heat_noise_sd >= 0.0) {
            return fail("t and heat_noise_sd must be >= 0".into());
        }
        if self.methods.iter().any(|m| m == "egp-ucb")
            && self.egp_nu.is_empty()
            && self.egp_tau.is_empty()
        {
            return fail("egp-ucb needs a nonempty egp_nu or egp_tau grid".into());
        }
        if self.methods.iter().any(|m| m == "mgp-ucb")
            && !matches!(self.cloud, CloudSource::Circle | CloudSource::Sphere)
        {
            return fail("mgp-ucb needs an analytic manifold (circle or sphere)".into());
        }
        if matches!(self.objective, Objective::Heat) && self.cloud != CloudSource::Sphere {
            return fail("the heat objective needs cloud = sphere".into());
        }
        if matches!(self.objective, Objective::CircleMaternSample | Objective::Levy | Objective::Ackley | Objective::Rastrigin)
            && self.cloud != CloudSource::Circle
        {
            return fail(format!("objective {} needs cloud = circle", self.objective.name()));
        }
        self.ucb()?;
        Ok(())
    }

    /// Acquisition settings.
    pub fn ucb(&self) -> Result<UcbConfig> {
        let mode = match self.b_mode.as_str() {
            "empirical" => BetaMode::Empirical { a: self.a },
            "theoretical" => BetaMode::Theoretical { epsilon: self.epsilon },
            other => return Err(Error::Config(format!("unknown b_mode {other:?}"))),
        };
        let config = UcbConfig {
            mode,
            delta: self.delta,
            exclude_visited: self.exclude_visited,
            recommendation: self.recommendation,
            acquisition_subsample: (self.acquisition_subsample > 0).then_some(self.acquisition_subsample),
        };
        config.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(config)
    }

    /// `κ` for the graph prior.
    pub fn kappa(&self) -> f64 {
        self.kappa_sq.sqrt()
    }

    /// Canonical text form; parsing it gives back the same config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let _ = writeln!(out, "name = {}", self.name);
        match &self.cloud {
            CloudSource::Circle => out.push_str("cloud = circle\n"),
            CloudSource::Sphere => out.push_str("cloud = sphere\n"),
            CloudSource::Torus { major, minor } => {
                let _ = writeln!(out, "cloud = torus\ntorus_major = {major}\ntorus_minor = {minor}");
            }
            CloudSource::SwissRoll { inner, gap, turns, width } => {
                let _ = writeln!(
                    out,
                    "cloud = swiss-roll\nroll_inner = {inner}\nroll_gap = {gap}\nroll_turns = {turns}\nroll_width = {width}"
                );
            }
            CloudSource::File { path, intrinsic_dim } => {
                let _ = writeln!(out, "cloud = file\ncloud_file = {}\nintrinsic_dim = {intrinsic_dim}", path.display());
            }
        }
        let h_rule = match self.h_rule {
            ConnectivityRule::Theory => "theory",
            ConnectivityRule::Experiment => "experiment",
        };
        let normalization = match self.normalization {
            Normalization::EmpiricalL2 => "empirical-l2",
            Normalization::EuclideanUnit => "euclidean-unit",
        };
        let prior = match self.prior {
            PriorFamily::Matern => "matern",
            PriorFamily::SquaredExponential => "se",
        };
        let recommendation = match self.recommendation {
            Recommendation::BestObserved => "best-observed",
            Recommendation::PosteriorMean => "posterior-mean",
        };
        let _ = writeln!(out, "n = {}\nfine_n = {}\nh_rule = {h_rule}\nh_coeff = {}", self.n, self.fine_n, self.h_coeff);
        let _ = writeln!(out, "k = {}\nnormalization = {normalization}\nobjective = {}", self.k, self.objective.name());
        let _ = writeln!(
            out,
            "truth_kappa_sq = {}\ntruth_s = {}\ntruth_tau = {}\ntruth_k = {}",
            self.truth_kappa_sq, self.truth_s, self.truth_tau, self.truth_k
        );
        let _ = writeln!(
            out,
            "prior = {prior}\nkappa_sq = {}\ns = {}\ntau = {}\noracle_k = {}",
            self.kappa_sq, self.s, self.tau, self.oracle_k
        );
        let _ = writeln!(out, "noise_level = {}", self.noise_level);
        if let Some(sd) = self.noise_sd {
            let _ = writeln!(out, "noise_sd = {sd}");
        }
        let _ = writeln!(
            out,
            "delta = {}\nb_mode = {}\na = {}\nepsilon = {}\niterations = {}\ntrials = {}\nseed = {}",
            self.delta, self.b_mode, self.a, self.epsilon, self.iterations, self.trials, self.seed
        );
        let _ = writeln!(out, "methods = {}", self.methods.join(", "));
        if let Some(k) = self.ml_kappa {
            let _ = writeln!(out, "ml_kappa = {k}");
        }
        let _ = writeln!(out, "mle_stride = {}", self.mle_stride);
        let _ = writeln!(
            out,
            "egp_nu = {}\negp_kappa = {}\negp_tau = {}",
            join(&self.egp_nu),
            join(&self.egp_kappa),
            join(&self.egp_tau)
        );
        let _ = writeln!(
            out,
            "zeta = {}\nt = {}\nheat_noise_sd = {}\nl_max = {}",
            self.zeta, self.t, self.heat_noise_sd, self.l_max
        );
        let _ = writeln!(
            out,
            "exclude_visited = {}\nrecommendation = {recommendation}\nacquisition_subsample = {}",
            self.exclude_visited, self.acquisition_subsample
        );
        out
    }
}
