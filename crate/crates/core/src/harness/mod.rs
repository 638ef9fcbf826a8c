//! Multi-trial experiment driver: builds the cloud, surrogates and truths
//! from an [`ExperimentConfig`], runs every method on every trial, and
//! aggregates regret (or heat-source recovery) traces.

pub mod config;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::acquisition::{random_search_baseline, run_ucb, FixedSurrogate, RunRecord, Surrogate};
use crate::benchmarks::{
    euclidean_kernel_model, make_heat_problem, relative_noise_sd, restrict, CircleBenchmark,
    EuclideanKernel, EuclideanModel, HeatForward, HeatProblem,
};
use crate::error::{check_index, Error, Result};
use crate::ggp::{circle_oracle, sphere_eigenpairs, Covariance, CovarianceModel, KernelSpec};
use crate::graph::{graph_spectrum, GraphSpectrum};
use crate::mle::{MleFamily, MleSurrogate};
use crate::point_cloud::{
    load_point_cloud, rng, sample_circle, sample_sphere, sample_swiss_roll, sample_torus, subsample_indices, PointCloud,
};

pub use config::{CloudSource, ExperimentConfig, Objective, PriorFamily, METHODS};

/// Stable per-(label, trial) seed: the first eight bytes of
/// `SHA-256(master ‖ label ‖ 0 ‖ trial)`, little endian.
pub fn derive_seed(master: u64, label: &str, trial: usize) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update([0u8]);
    hasher.update((trial as u64).to_le_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// `r_ℓ = max f − max_{k≤ℓ} f(z_k)` with `values` the noise-free objective
/// over the whole cloud.
pub fn simple_regret(values: &[f64], run: &RunRecord) -> Result<Vec<f64>> {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut running = f64::NEG_INFINITY;
    run.queries
        .iter()
        .map(|&q| {
            check_index(q, values.len())?;
            running = running.max(values[q]);
            Ok((best - running).max(0.0))
        })
        .collect()
}

/// Distance from the source to the incumbent: the query with the largest
/// `f_N` among the first `ℓ`.
pub fn recovery_error(problem: &HeatProblem, run: &RunRecord) -> Result<Vec<f64>> {
    let values = problem.tabulate();
    let mut incumbent: Option<usize> = None;
    run.queries
        .iter()
        .map(|&q| {
            check_index(q, values.len())?;
            if incumbent.is_none_or(|i| values[q] > values[i]) {
                incumbent = Some(q);
            }
            problem.distance_to_source(incumbent.unwrap_or(q))
        })
        .collect()
}

/// Linearly interpolated percentile (`p ∈ [0, 100]`) of ascending `sorted`.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = (p / 100.0).clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Per-iteration mean and 10th/90th percentiles across trials.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub mean: Vec<f64>,
    pub p10: Vec<f64>,
    pub p90: Vec<f64>,
}

pub fn aggregate(traces: &[Vec<f64>]) -> Result<Aggregate> {
    let len = traces.first().map(Vec::len).ok_or_else(|| Error::Argument("no traces to aggregate".into()))?;
    if traces.iter().any(|t| t.len() != len) {
        return Err(Error::Argument("traces have different lengths".into()));
    }
    let mut out = Aggregate { mean: Vec::with_capacity(len), p10: Vec::with_capacity(len), p90: Vec::with_capacity(len) };
    for l in 0..len {
        let mut column: Vec<f64> = traces.iter().map(|t| t[l]).collect();
        out.mean.push(column.iter().sum::<f64>() / column.len() as f64);
        column.sort_by(f64::total_cmp);
        out.p10.push(percentile(&column, 10.0));
        out.p90.push(percentile(&column, 90.0));
    }
    Ok(out)
}

impl Aggregate {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,mean,p10,p90\n");
        for l in 0..self.mean.len() {
            out.push_str(&format!("{},{},{},{}\n", l + 1, self.mean[l], self.p10[l], self.p90[l]));
        }
        out
    }
}

/// What the traces measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    /// Simple regret in objective units.
    Regret,
    /// Euclidean distance from the heat source to the incumbent.
    Recovery,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Regret => "simple-regret",
            Metric::Recovery => "recovery-error",
        }
    }
}

/// All trials of one method.
#[derive(Clone, Debug)]
pub struct MethodResult {
    pub name: String,
    /// One entry per trial; `None` when the trial failed.
    pub traces: Vec<Option<Vec<f64>>>,
    /// `(trial, message)` for failed trials.
    pub errors: Vec<(usize, String)>,
    /// Last fitted hyperparameter per successful trial, for adaptive surrogates.
    pub final_parameters: Vec<f64>,
    pub aggregate: Option<Aggregate>,
}

impl MethodResult {
    pub fn successful(&self) -> Vec<Vec<f64>> {
        self.traces.iter().flatten().cloned().collect()
    }

    pub fn is_complete(&self) -> bool {
        self.errors.is_empty()
    }

    /// Values at the last iteration for the successful trials.
    pub fn final_values(&self) -> Vec<f64> {
        self.traces.iter().flatten().filter_map(|t| t.last().copied()).collect()
    }

    pub fn final_mean(&self) -> Option<f64> {
        self.aggregate.as_ref().and_then(|a| a.mean.last().copied())
    }

    /// Fraction of successful trials whose final value is exactly zero.
    pub fn fraction_at_zero(&self) -> f64 {
        let v = self.final_values();
        if v.is_empty() {
            return 0.0;
        }
        v.iter().filter(|x| **x == 0.0).count() as f64 / v.len() as f64
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub name: String,
    pub metric: Metric,
    pub methods: Vec<MethodResult>,
    pub runtime_secs: f64,
    /// Connectivity radius of the optimization graph.
    pub h: f64,
    /// Observation noise used in each trial.
    pub noise_sd: Vec<f64>,
    /// Distance from the source to the maximizer of `f_N`, per trial
    /// (heat experiments only).
    pub attainable: Vec<f64>,
}

impl ExperimentResult {
    pub fn method(&self, name: &str) -> Option<&MethodResult> {
        self.methods.iter().find(|m| m.name == name)
    }

    /// The EGP grid entry with the smallest final mean.
    pub fn best_egp(&self) -> Option<&MethodResult> {
        self.methods
            .iter()
            .filter(|m| m.name.starts_with("egp-ucb"))
            .filter(|m| m.final_mean().is_some())
            .min_by(|a, b| a.final_mean().unwrap().total_cmp(&b.final_mean().unwrap()))
    }

    pub fn summary_json(&self) -> serde_json::Value {
        let methods: Vec<serde_json::Value> = self
            .methods
            .iter()
            .map(|m| {
                let finals = m.final_values();
                let mut sorted = finals.clone();
                sorted.sort_by(f64::total_cmp);
                json!({
                    "name": m.name,
                    "trials_ok": finals.len(),
                    "trials_failed": m.errors.len(),
                    "complete": m.is_complete(),
                    "errors": m.errors.iter().map(|(t, e)| json!({"trial": t, "error": e})).collect::<Vec<_>>(),
                    "final_mean": m.final_mean(),
                    "final_p10": (!sorted.is_empty()).then(|| percentile(&sorted, 10.0)),
                    "final_p90": (!sorted.is_empty()).then(|| percentile(&sorted, 90.0)),
                    "fraction_at_zero": m.fraction_at_zero(),
                    "final_parameters": m.final_parameters,
                })
            })
            .collect();
        let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        json!({
            "name": self.name,
            "metric": self.metric.name(),
            "runtime_secs": self.runtime_secs,
            "h": self.h,
            "incomplete": self.methods.iter().any(|m| !m.is_complete()),
            "mean_noise_sd": mean(&self.noise_sd),
            "mean_attainable_discrepancy": mean(&self.attainable),
            "best_egp": self.best_egp().map(|m| m.name.clone()),
            "methods": methods,
        })
    }
}

/// Runtime options that do not change results.
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    /// Worker threads; 0 uses the rayon default.
    pub jobs: usize,
    /// Print `method trial ℓ best_so_far` progress lines to stderr.
    pub verbose: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { jobs: 1, verbose: false }
    }
}

enum TruthSource {
    Model { model: CovarianceModel, indices: Option<Vec<usize>> },
    Fixed(Vec<f64>),
    Heat(Arc<HeatForward>),
}

struct Trial {
    values: Vec<f64>,
    noise_sd: f64,
    heat: Option<HeatProblem>,
}

enum Method {
    Fixed(Box<dyn Covariance>),
    Mle,
    Random,
}

struct Setup {
    cloud: Arc<PointCloud>,
    spectrum: Arc<GraphSpectrum>,
    h: f64,
    truth: TruthSource,
    methods: Vec<(String, Method)>,
}

fn base_cloud(config: &ExperimentConfig, size: usize) -> Result<PointCloud> {
    let seed = derive_seed(config.seed, "cloud", 0);
    match &config.cloud {
        CloudSource::Circle => sample_circle(size, seed),
        CloudSource::Sphere => sample_sphere(size, seed),
        CloudSource::Torus { major, minor } => sample_torus(size, *major, *minor, seed),
        CloudSource::SwissRoll { inner, gap, turns, width } => {
            sample_swiss_roll(size, *inner, *gap, *turns, *width, seed)
        }
        CloudSource::File { path, intrinsic_dim } => load_point_cloud(path, *intrinsic_dim),
    }
}

fn prior_spec(config: &ExperimentConfig, k: usize, m: usize) -> KernelSpec {
    match config.prior {
        PriorFamily::Matern => KernelSpec::matern(config.kappa(), config.s, k, m),
        PriorFamily::SquaredExponential => KernelSpec::squared_exponential(config.tau, k, m),
    }
}

fn truth_spec(config: &ExperimentConfig, k: usize, m: usize) -> KernelSpec {
    match config.objective {
        Objective::SeSample => KernelSpec::squared_exponential(config.truth_tau, k, m),
        _ => KernelSpec::matern(config.truth_kappa_sq.sqrt(), config.truth_s, k, m),
    }
}

/// Name of each EGP grid entry, with its kernel.
pub fn egp_grid(config: &ExperimentConfig) -> Vec<(String, EuclideanKernel)> {
    match config.prior {
        PriorFamily::Matern => config
            .egp_nu
            .iter()
            .flat_map(|&nu| {
                config.egp_kappa.iter().map(move |&kappa| {
                    (format!("egp-ucb-matern-nu{nu}-kappa{kappa}"), EuclideanKernel::Matern { nu, kappa })
                })
            })
            .collect(),
        PriorFamily::SquaredExponential => config
            .egp_tau
            .iter()
            .map(|&tau| (format!("egp-ucb-se-tau{tau}"), EuclideanKernel::SquaredExponential { tau }))
            .collect(),
    }
}

fn build_setup(config: &ExperimentConfig) -> Result<Setup> {
    let mut base = base_cloud(config, if config.fine_n > 0 { config.fine_n } else { config.n })?;
    let m = base.intrinsic_dim();
    let mut subsample = None;
    if config.fine_n > 0 {
        if base.len() != config.fine_n {
            return Err(Error::Config(format!("fine_n = {} but the cloud has {} points", config.fine_n, base.len())));
        }
        subsample = Some(subsample_indices(config.fine_n, config.n, derive_seed(config.seed, "subsample", 0))?);
    } else if !matches!(config.cloud, CloudSource::File { .. }) && base.len() != config.n {
        return Err(Error::Config("cloud size mismatch".into()));
    }
    let cloud = match &subsample {
        Some(idx) => Arc::new(base.select(idx)?),
        None => Arc::new(std::mem::replace(&mut base, PointCloud::from_flat(vec![0.0; 2], 1, 1)?)),
    };
    let n = cloud.len();
    if config.k > n {
        return Err(Error::Config(format!("k = {} exceeds the cloud size {n}", config.k)));
    }
    if config.iterations > n {
        return Err(Error::Config(format!("iterations = {} exceed the cloud size {n}", config.iterations)));
    }
    let h = config.h_rule.radius(n, m, config.h_coeff);
    let graph_truth_on_cloud =
        subsample.is_none() && matches!(config.objective, Objective::MaternSample | Objective::SeSample);
    let modes = if graph_truth_on_cloud { config.k.max(config.truth_k.min(n)) } else { config.k };
    let full = graph_spectrum(&cloud, h, modes, config.normalization)?;
    let spectrum = Arc::new(full.truncated(config.k)?);

    let truth = match config.objective {
        Objective::CircleMaternSample => TruthSource::Model {
            model: circle_oracle(truth_spec(config, config.truth_k, 1), &cloud)?,
            indices: None,
        },
        Objective::MaternSample | Objective::SeSample => match &subsample {
            Some(idx) => {
                let fine_h = config.h_rule.radius(base.len(), m, config.h_coeff);
                let fine = graph_spectrum(&base, fine_h, config.truth_k, config.normalization)?;
                TruthSource::Model {
                    model: CovarianceModel::from_spectrum(truth_spec(config, config.truth_k, m), &fine)?,
                    indices: Some(idx.clone()),
                }
            }
            None => TruthSource::Model {
                model: CovarianceModel::from_spectrum(truth_spec(config, config.truth_k.min(n), m), &full)?,
                indices: None,
            },
        },
        Objective::Levy | Objective::Ackley | Objective::Rastrigin => {
            let bench = CircleBenchmark::parse(config.objective.name())?;
            TruthSource::Fixed(bench.tabulate(&cloud)?)
        }
        Objective::Heat => TruthSource::Heat(Arc::new(HeatForward::new(cloud.clone(), &spectrum, config.zeta, config.t)?)),
    };

    let ggp = CovarianceModel::from_spectrum(prior_spec(config, config.k, m), &spectrum)?;
    let mut methods: Vec<(String, Method)> = Vec::new();
    for name in &config.methods {
        match name.as_str() {
            "ggp-ucb" => methods.push((name.clone(), Method::Fixed(Box::new(ggp.clone())))),
            "mgp-ucb" => {
                let model = match config.cloud {
                    CloudSource::Circle => circle_oracle(prior_spec(config, config.oracle_k, 1), &cloud)?,
                    _ => {
                        let l_max = ((config.oracle_k as f64).sqrt().floor() as usize).max(1) - 1;
                        let harmonics = sphere_eigenpairs(l_max);
                        harmonics.covariance_model(prior_spec(config, harmonics.len(), 2), &cloud)?
                    }
                };
                methods.push((name.clone(), Method::Fixed(Box::new(model))));
            }
            "ggp-ucb-ml" => methods.push((name.clone(), Method::Mle)),
            "egp-ucb" => {
                let amplitude = ggp.prior_variances().iter().sum::<f64>() / n as f64;
                for (label, kernel) in egp_grid(config) {
                    let model: EuclideanModel = euclidean_kernel_model(&cloud, kernel, amplitude)?;
                    methods.push((label, Method::Fixed(Box::new(model))));
                }
            }
            "random" => methods.push((name.clone(), Method::Random)),
            other => return Err(Error::Config(format!("unknown method {other:?}"))),
        }
    }
    Ok(Setup { cloud, spectrum, h, truth, methods })
}

fn make_trial(config: &ExperimentConfig, setup: &Setup, trial: usize) -> Result<Trial> {
    let seed = derive_seed(config.seed, "truth", trial);
    let (values, heat) = match &setup.truth {
        TruthSource::Model { model, indices } => {
            let sample = model.sample_prior(seed);
            let values = match indices {
                Some(idx) => restrict(&sample, idx)?,
                None => sample,
            };
            (values, None)
        }
        TruthSource::Fixed(values) => (values.clone(), None),
        TruthSource::Heat(forward) => {
            let z_star = rng(seed).random_range(0..forward.len());
            let problem = make_heat_problem(
                forward.clone(),
                z_star,
                config.heat_noise_sd,
                config.l_max,
                derive_seed(config.seed, "heat-data", trial),
            )?;
            (problem.tabulate(), Some(problem))
        }
    };
    let noise_sd = config.noise_sd.unwrap_or_else(|| relative_noise_sd(&values, config.noise_level));
    Ok(Trial { values, noise_sd, heat })
}

fn run_trial(
    config: &ExperimentConfig,
    setup: &Setup,
    method: &(String, Method),
    trial: usize,
    data: &Trial,
    verbose: bool,
) -> Result<(RunRecord, Vec<f64>, Option<f64>)> {
    let (name, kind) = method;
    let seed = derive_seed(config.seed, name, trial);
    let values = &data.values;
    let objective = |z: usize| values[z];
    let ucb = config.ucb()?;
    let mut print = |ell: usize, best: f64| eprintln!("{name} {trial} {ell} {best}");
    let progress: Option<&mut dyn FnMut(usize, f64)> = if verbose { Some(&mut print) } else { None };
    let (record, parameter) = match kind {
        Method::Fixed(model) => {
            let mut surrogate = FixedSurrogate(model.as_ref());
            (run_ucb(&mut surrogate, &objective, data.noise_sd, config.iterations, &ucb, seed, progress)?, None)
        }
        Method::Mle => {
            let family = match config.prior {
                PriorFamily::Matern => MleFamily::Matern { kappa: config.ml_kappa.unwrap_or(config.kappa()) },
                PriorFamily::SquaredExponential => MleFamily::SquaredExponential,
            };
            let initial = match config.prior {
                PriorFamily::Matern => config.s,
                PriorFamily::SquaredExponential => config.tau,
            };
            let mut surrogate = MleSurrogate::new(
                setup.spectrum.clone(),
                family,
                config.k,
                setup.cloud.intrinsic_dim(),
                family.default_grid(),
                initial,
            )?
            .with_stride(config.mle_stride);
            let record = run_ucb(&mut surrogate, &objective, data.noise_sd, config.iterations, &ucb, seed, progress)?;
            (record, surrogate.parameter())
        }
        Method::Random => {
            let record = random_search_baseline(&objective, values.len(), config.iterations, seed)?;
            if verbose {
                for (l, b) in record.best_so_far().iter().enumerate() {
                    eprintln!("{name} {trial} {} {b}", l + 1);
                }
            }
            (record, None)
        }
    };
    let trace = match &data.heat {
        Some(problem) => recovery_error(problem, &record)?,
        None => simple_regret(values, &record)?,
    };
    Ok((record, trace, parameter))
}

/// Runs every configured method on every trial. Failures inside a trial are
/// recorded on the method and do not stop the experiment; setup failures do.
pub fn run_experiment(config: &ExperimentConfig, options: RunOptions) -> Result<ExperimentResult> {
    config.validate()?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        let setup = build_setup(config)?;
        let trials: Vec<Result<Trial>> =
            (0..config.trials).into_par_iter().map(|t| make_trial(config, &setup, t)).collect();
        let jobs: Vec<(usize, usize)> =
            (0..setup.methods.len()).flat_map(|m| (0..config.trials).map(move |t| (m, t))).collect();
        let outcomes: Vec<Result<(Vec<f64>, Option<f64>)>> = jobs
            .par_iter()
            .map(|&(m, t)| match &trials[t] {
                Ok(data) => run_trial(config, &setup, &setup.methods[m], t, data, options.verbose)
                    .map(|(_, trace, parameter)| (trace, parameter)),
                Err(e) => Err(Error::Numerical(format!("trial setup failed: {e}"))),
            })
            .collect();

        let mut methods = Vec::with_capacity(setup.methods.len());
        let mut outcomes = outcomes.into_iter();
        for (name, _) in &setup.methods {
            let mut result = MethodResult {
                name: name.clone(),
                traces: Vec::with_capacity(config.trials),
                errors: Vec::new(),
                final_parameters: Vec::new(),
                aggregate: None,
            };
            for t in 0..config.trials {
                match outcomes.next().expect("one outcome per job") {
                    Ok((trace, parameter)) => {
                        result.traces.push(Some(trace));
                        result.final_parameters.extend(parameter);
                    }
                    Err(e) => {
                        result.traces.push(None);
                        result.errors.push((t, e.to_string()));
                    }
                }
            }
            let ok = result.successful();
            if !ok.is_empty() {
                result.aggregate = Some(aggregate(&ok)?);
            }
            methods.push(result);
        }
        let noise_sd = trials.iter().flatten().map(|t| t.noise_sd).collect();
        let attainable = trials
            .iter()
            .flatten()
            .filter_map(|t| t.heat.as_ref())
            .map(|p| p.distance_to_source(p.best_attainable()))
            .collect::<Result<Vec<f64>>>()?;
        let metric = if matches!(config.objective, Objective::Heat) { Metric::Recovery } else { Metric::Regret };
        Ok(ExperimentResult {
            name: config.name.clone(),
            metric,
            methods,
            runtime_secs: start.elapsed().as_secs_f64(),
            h: setup.h,
            noise_sd,
            attainable,
        })
    })
}

/// One run of one method, as the experiment would perform it for `trial`.
#[derive(Clone, Debug)]
pub struct SingleRun {
    /// Method name; EGP runs use the first grid entry.
    pub method: String,
    pub record: RunRecord,
    /// Regret or recovery trace.
    pub trace: Vec<f64>,
    pub noise_sd: f64,
    /// Noise-free objective over the cloud.
    pub values: Vec<f64>,
    pub cloud: Arc<PointCloud>,
}

pub fn run_single(config: &ExperimentConfig, method: &str, trial: usize, verbose: bool) -> Result<SingleRun> {
    let mut config = config.clone();
    config.methods = vec![method.to_string()];
    config.validate()?;
    let setup = build_setup(&config)?;
    let data = make_trial(&config, &setup, trial)?;
    let chosen = setup.methods.first().ok_or_else(|| Error::Config("no method to run".into()))?;
    let (record, trace, _) = run_trial(&config, &setup, chosen, trial, &data, verbose)?;
    Ok(SingleRun {
        method: chosen.0.clone(),
        record,
        trace,
        noise_sd: data.noise_sd,
        values: data.values,
        cloud: setup.cloud.clone(),
    })
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Writes `<out>/<name>/<method>.csv`, `<method>_trials.csv`, `config.cfg`
/// and `summary.json`; returns the experiment directory.
pub fn write_results(result: &ExperimentResult, config: &ExperimentConfig, out: &Path) -> Result<PathBuf> {
    let dir = out.join(&result.name);
    std::fs::create_dir_all(&dir)?;
    for m in &result.methods {
        if let Some(agg) = &m.aggregate {
            write_atomic(&dir.join(format!("{}.csv", m.name)), agg.to_csv().as_bytes())?;
        }
        let mut trials = String::from("trial,iteration,value\n");
        for (t, trace) in m.traces.iter().enumerate() {
            for (l, v) in trace.iter().flatten().enumerate() {
                trials.push_str(&format!("{t},{},{v}\n", l + 1));
            }
        }
        write_atomic(&dir.join(format!("{}_trials.csv", m.name)), trials.as_bytes())?;
    }
    write_atomic(&dir.join("config.cfg"), config.to_text().as_bytes())?;
    let summary = serde_json::to_string_pretty(&result.summary_json())?;
    write_atomic(&dir.join("summary.json"), summary.as_bytes())?;
    Ok(dir)
}
