use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ggp_ucb::acquisition::RunRecord;
use ggp_ucb::benchmarks;
use ggp_ucb::ggp::{CovarianceModel, KernelSpec};
use ggp_ucb::graph::{detect_saturation, graph_spectrum, ConnectivityRule, Normalization, SaturationRule};
use ggp_ucb::harness::{run_experiment, run_single, write_atomic, write_results, CloudSource, ExperimentConfig, Objective, RunOptions};
use ggp_ucb::mle::{MleFamily, MleProblem};
use ggp_ucb::point_cloud::{load_point_cloud, sample_circle, sample_sphere, sample_swiss_roll, sample_torus, PointCloud};
use ggp_ucb::{Error, Result};

/// Bayesian optimization over point clouds with graph Gaussian process priors.
#[derive(Parser, Debug)]
#[command(name = "ggp-ucb", version, arg_required_else_help = true)]
struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print progress lines "method trial iteration best_so_far" to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    /// Worker threads for `experiment`.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a point cloud, optionally with a graph prior draw as a last column.
    Sample {
        #[command(flatten)]
        cloud: CloudArgs,
        #[command(flatten)]
        graph: GraphArgs,
        /// Append a draw from the graph Matérn prior.
        #[arg(long)]
        prior_draw: bool,
        #[arg(long, default_value_t = 15.0)]
        kappa_sq: f64,
        #[arg(long, default_value_t = 2.0)]
        s: f64,
        /// Output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Smallest graph Laplacian eigenvalues as CSV.
    Spectrum {
        #[command(flatten)]
        cloud: CloudArgs,
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A single optimization run on a named objective; prints the run record.
    Optimize {
        /// Base config file; flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "levy")]
        objective: String,
        #[arg(long, default_value = "ggp-ucb")]
        method: String,
        /// Trial index, selecting the truth and noise draw.
        #[arg(long, default_value_t = 0)]
        trial: usize,
        #[arg(long)]
        cloud: Option<CloudKind>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        h_coeff: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        kappa_sq: Option<f64>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        noise_level: Option<f64>,
        /// Any other config key, as KEY=VALUE.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a multi-trial experiment and write CSV and JSON results.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Results directory; files go to <out>/<name>/.
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        /// Any other config key, as KEY=VALUE.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Maximum-likelihood estimate of the prior parameter from a run record.
    Estimate {
        /// Run record CSV as written by `optimize`.
        #[arg(long)]
        record: PathBuf,
        #[command(flatten)]
        cloud: CloudArgs,
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum, default_value_t = Family::Matern)]
        family: Family,
        /// Fixed κ for Matérn fits.
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, default_value_t = 0.0)]
        noise_sd: f64,
    },
    /// Objective catalog.
    Benchmarks {
        #[command(subcommand)]
        action: BenchmarkAction,
    },
}

#[derive(Subcommand, Debug)]
enum BenchmarkAction {
    List,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CloudKind {
    Circle,
    Sphere,
    Torus,
    SwissRoll,
    File,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Family {
    Matern,
    Se,
}

#[derive(Args, Debug)]
struct CloudArgs {
    #[arg(long, value_enum, default_value_t = CloudKind::Circle)]
    cloud: CloudKind,
    #[arg(long, default_value_t = 500)]
    n: usize,
    /// Point file for `--cloud file`.
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    intrinsic_dim: usize,
    #[arg(long, default_value_t = 0.4)]
    torus_major: f64,
    #[arg(long, default_value_t = 0.15)]
    torus_minor: f64,
}

const ROLL: (f64, f64, f64, f64) = (0.15, 0.15, 1.5, 1.0);

#[derive(Args, Debug)]
struct GraphArgs {
    #[arg(long, default_value_t = 4.0)]
    h_coeff: f64,
    /// experiment: c·N^(-1/2); theory: c·N^(-1/(2m)).
    #[arg(long, default_value = "experiment")]
    h_rule: String,
    #[arg(long, default_value_t = 20)]
    k: usize,
    #[arg(long, default_value = "empirical-l2")]
    normalization: String,
}

impl CloudArgs {
    fn build(&self, seed: u64) -> Result<PointCloud> {
        match self.cloud {
            CloudKind::Circle => sample_circle(self.n, seed),
            CloudKind::Sphere => sample_sphere(self.n, seed),
            CloudKind::Torus => sample_torus(self.n, self.torus_major, self.torus_minor, seed),
            CloudKind::SwissRoll => sample_swiss_roll(self.n, ROLL.0, ROLL.1, ROLL.2, ROLL.3, seed),
            CloudKind::File => {
                let path = self.file.as_ref().ok_or_else(|| Error::Argument("--cloud file needs --file".into()))?;
                load_point_cloud(path, self.intrinsic_dim)
            }
        }
    }
}

impl GraphArgs {
    fn spectrum(&self, cloud: &PointCloud) -> Result<ggp_ucb::graph::GraphSpectrum> {
        let rule = ConnectivityRule::parse(&self.h_rule)?;
        let h = rule.radius(cloud.len(), cloud.intrinsic_dim(), self.h_coeff);
        graph_spectrum(cloud, h, self.k, Normalization::parse(&self.normalization)?)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn apply_sets(config: &mut ExperimentConfig, sets: &[String]) -> Result<()> {
    for item in sets {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {item:?}")))?;
        config.set(key.trim(), value.trim())?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample { cloud, graph, prior_draw, kappa_sq, s, out } => {
            let points = cloud.build(cli.seed)?;
            let mut text = points.to_csv();
            if prior_draw {
                let spectrum = graph.spectrum(&points)?;
                let spec = KernelSpec::matern(kappa_sq.sqrt(), s, graph.k, points.intrinsic_dim());
                let draw = CovarianceModel::from_spectrum(spec, &spectrum)?.sample_prior(cli.seed);
                text = text.lines().zip(&draw).map(|(row, v)| format!("{row},{v:.17e}\n")).collect();
            }
            emit(out.as_deref(), &text)
        }
        Command::Spectrum { cloud, graph, out } => {
            let points = cloud.build(cli.seed)?;
            let spectrum = graph.spectrum(&points)?;
            let mut text = String::from("index,eigenvalue\n");
            for (i, l) in spectrum.eigenvalues().iter().enumerate() {
                text.push_str(&format!("{},{l:.17e}\n", i + 1));
            }
            if cli.verbose {
                let k = detect_saturation(spectrum.eigenvalues(), SaturationRule::default());
                eprintln!("suggested truncation: {k}");
            }
            emit(out.as_deref(), &text)
        }
        Command::Optimize {
            config,
            objective,
            method,
            trial,
            cloud,
            n,
            k,
            h_coeff,
            iterations,
            kappa_sq,
            s,
            a,
            delta,
            noise_level,
            set,
            out,
        } => {
            let mut cfg = match &config {
                Some(path) => ExperimentConfig::load(path)?,
                None => {
                    let mut c = ExperimentConfig::default();
                    let obj = Objective::parse(&objective)?;
                    c.objective = obj;
                    if matches!(obj, Objective::Heat) {
                        c.cloud = CloudSource::Sphere;
                    }
                    c
                }
            };
            if config.is_some() {
                cfg.objective = Objective::parse(&objective)?;
            }
            if let Some(kind) = cloud {
                cfg.cloud = match kind {
                    CloudKind::Circle => CloudSource::Circle,
                    CloudKind::Sphere => CloudSource::Sphere,
                    CloudKind::Torus => CloudSource::Torus { major: 0.4, minor: 0.15 },
                    CloudKind::SwissRoll => {
                        CloudSource::SwissRoll { inner: ROLL.0, gap: ROLL.1, turns: ROLL.2, width: ROLL.3 }
                    }
                    CloudKind::File => return Err(Error::Argument("use a config file for file clouds".into())),
                };
            }
            let numeric = [
                ("n", n.map(|v| v.to_string())),
                ("k", k.map(|v| v.to_string())),
                ("h_coeff", h_coeff.map(|v| v.to_string())),
                ("iterations", iterations.map(|v| v.to_string())),
                ("kappa_sq", kappa_sq.map(|v| v.to_string())),
                ("s", s.map(|v| v.to_string())),
                ("a", a.map(|v| v.to_string())),
                ("delta", delta.map(|v| v.to_string())),
                ("noise_level", noise_level.map(|v| v.to_string())),
            ];
            for (key, value) in numeric {
                if let Some(v) = value {
                    cfg.set(key, &v)?;
                }
            }
            cfg.set("seed", &cli.seed.to_string())?;
            apply_sets(&mut cfg, &set)?;
            let single = run_single(&cfg, &method, trial, cli.verbose)?;
            eprintln!(
                "{}: final {} {}, noise sd {}",
                single.method,
                if matches!(cfg.objective, Objective::Heat) { "recovery error" } else { "regret" },
                single.trace.last().copied().unwrap_or(f64::NAN),
                single.noise_sd
            );
            emit(out.as_deref(), &single.record.to_csv())
        }
        Command::Experiment { config, out, trials, iterations, set } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if cli.seed != 0 {
                cfg.seed = cli.seed;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(l) = iterations {
                cfg.iterations = l;
            }
            apply_sets(&mut cfg, &set)?;
            cfg.validate()?;
            let result = run_experiment(&cfg, RunOptions { jobs: cli.jobs, verbose: cli.verbose })?;
            let dir = write_results(&result, &cfg, &out)?;
            for m in &result.methods {
                let status = if m.is_complete() { String::new() } else { format!(" ({} failed trials)", m.errors.len()) };
                println!(
                    "{} {} final mean {}{status}",
                    m.name,
                    result.metric.name(),
                    m.final_mean().map_or("n/a".to_string(), |v| format!("{v:.6}"))
                );
            }
            println!("wrote {} in {:.1}s", dir.display(), result.runtime_secs);
            Ok(())
        }
        Command::Estimate { record, cloud, graph, family, kappa, noise_sd } => {
            let run = RunRecord::from_csv(&std::fs::read_to_string(&record)?)?;
            let points = cloud.build(cli.seed)?;
            let spectrum = Arc::new(graph.spectrum(&points)?);
            let family = match family {
                Family::Matern => MleFamily::Matern { kappa },
                Family::Se => MleFamily::SquaredExponential,
            };
            let problem = MleProblem {
                spectrum: &spectrum,
                family,
                truncation: graph.k,
                intrinsic_dim: points.intrinsic_dim(),
                queries: &run.queries,
                observations: &run.observations,
                noise_sd,
                grid: family.default_grid(),
            };
            let theta = problem.estimate()?;
            let name = match family {
                MleFamily::Matern { .. } => "s",
                MleFamily::SquaredExponential => "tau",
            };
            println!("{name},{theta}");
            println!("nll,{}", problem.negative_log_likelihood(theta)?);
            Ok(())
        }
        Command::Benchmarks { action: BenchmarkAction::List } => {
            for (name, description) in benchmarks::list() {
                println!("{name}\t{description}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
