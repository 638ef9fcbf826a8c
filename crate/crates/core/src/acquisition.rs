//! Upper-confidence-bound acquisition and the sequential optimization loop.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::ggp::Covariance;
use crate::point_cloud::rng;
use crate::posterior::PosteriorState;

/// How the exploration weight `B_ℓ` is scheduled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BetaMode {
    /// `√(2 log(π²ℓ²N/6δ)) + ε_N √(ℓ−1) / (δ σ)`.
    Theoretical { epsilon: f64 },
    /// `a √(2 log(π²ℓ²N/6δ))`.
    Empirical { a: f64 },
}

/// Which visited point a run reports as its answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Recommendation {
    /// Query with the largest observed value.
    #[default]
    BestObserved,
    /// Maximizer of the final posterior mean among visited points.
    PosteriorMean,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UcbConfig {
    pub mode: BetaMode,
    pub delta: f64,
    pub exclude_visited: bool,
    pub recommendation: Recommendation,
    /// Scan only this many random candidates per iteration instead of the
    /// whole cloud.
    pub acquisition_subsample: Option<usize>,
}

impl Default for UcbConfig {
    fn default() -> Self {
        Self {
            mode: BetaMode::Empirical { a: 0.5 },
            delta: 0.1,
            exclude_visited: true,
            recommendation: Recommendation::BestObserved,
            acquisition_subsample: None,
        }
    }
}

impl UcbConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Argument(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        match self.mode {
            BetaMode::Empirical { a } if !(a > 0.0 && a.is_finite()) => {
                Err(Error::Argument(format!("empirical weight a must be positive, got {a}")))
            }
            BetaMode::Theoretical { epsilon } if !(epsilon >= 0.0 && epsilon.is_finite()) => {
                Err(Error::Argument(format!("epsilon must be >= 0, got {epsilon}")))
            }
            _ => Ok(()),
        }
    }
}

/// Exploration weight `B_ℓ` for iteration `ell ≥ 1` on an `n`-point cloud.
pub fn beta(config: &UcbConfig, ell: usize, n: usize, noise_sd: f64) -> Result<f64> {
    config.validate()?;
    if ell == 0 {
        return Err(Error::Argument("iterations are counted from 1".into()));
    }
    if n < 2 {
        return Err(Error::Argument(format!("cloud size must be at least 2, got {n}")));
    }
    let l = ell as f64;
    let base = (2.0 * (PI * PI * l * l * n as f64 / (6.0 * config.delta)).ln()).sqrt();
    match config.mode {
        BetaMode::Empirical { a } => Ok(a * base),
        BetaMode::Theoretical { epsilon } => {
            if epsilon == 0.0 || ell == 1 {
                return Ok(base);
            }
            if !(noise_sd > 0.0) {
                return Err(Error::Argument(
                    "the misspecification correction needs a positive noise level".into(),
                ));
            }
            Ok(base + epsilon * (l - 1.0).sqrt() / (config.delta * noise_sd))
        }
    }
}

/// A chosen point and its acquisition value `μ + Bσ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub value: f64,
}

/// Maximizes `μ(z) + B σ(z)` over non-excluded points (all points, or
/// `candidates` when given). Ties go to the lowest index.
pub fn select_next(
    state: &PosteriorState,
    b: f64,
    excluded: &[bool],
    candidates: Option<&[usize]>,
) -> Result<Selection> {
    let n = state.len();
    if excluded.len() != n {
        return Err(Error::Argument(format!(
            "exclusion mask has {} entries for {n} points",
            excluded.len()
        )));
    }
    let score = |z: usize| state.means()[z] + b * state.variances()[z].sqrt();
    let mut best: Option<Selection> = None;
    let mut consider = |z: usize| {
        if excluded[z] {
            return;
        }
        let value = score(z);
        let better = match best {
            None => true,
            Some(s) => value > s.value || (value == s.value && z < s.index),
        };
        if better {
            best = Some(Selection { index: z, value });
        }
    };
    match candidates {
        Some(list) => list.iter().copied().filter(|&z| z < n).for_each(&mut consider),
        None => (0..n).for_each(&mut consider),
    }
    best.ok_or(Error::Exhausted(n))
}

/// Supplies the prior used at each iteration; adaptive surrogates refit to
/// the data seen so far.
pub trait Surrogate {
    fn model(
        &mut self,
        queries: &[usize],
        observations: &[f64],
        noise_sd: f64,
    ) -> Result<&dyn Covariance>;

    /// Current fitted hyperparameter, for adaptive surrogates.
    fn parameter(&self) -> Option<f64> {
        None
    }
}

/// A prior that never changes.
pub struct FixedSurrogate<'a>(pub &'a dyn Covariance);

impl Surrogate for FixedSurrogate<'_> {
    fn model(&mut self, _: &[usize], _: &[f64], _: f64) -> Result<&dyn Covariance> {
        Ok(self.0)
    }
}

/// Trace of one optimization run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    /// Evaluated points, in order.
    pub queries: Vec<usize>,
    pub observations: Vec<f64>,
    /// `B_ℓ` used after the `ℓ`-th observation.
    pub betas: Vec<f64>,
    /// Acquisition maximum found after the `ℓ`-th observation.
    pub acquisition_values: Vec<f64>,
    /// Fitted hyperparameter after each observation, for adaptive surrogates.
    pub parameters: Vec<f64>,
    /// Point selected by the last iteration but never evaluated.
    pub final_selection: Option<usize>,
    pub recommendation: usize,
}

impl RunRecord {
    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    /// Running maximum of the observations.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.observations
            .iter()
            .scan(f64::NEG_INFINITY, |best, &y| {
                *best = best.max(y);
                Some(*best)
            })
            .collect()
    }

    /// CSV with columns `iteration,query_index,observation,B,best_so_far`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,query_index,observation,B,best_so_far\n");
        for (i, best) in self.best_so_far().iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                i + 1,
                self.queries[i],
                self.observations[i],
                self.betas[i],
                best
            );
        }
        out
    }

    /// Reads the `query_index`, `observation` and `B` columns back.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::Parse {
            row: 1,
            message: "empty run record".into(),
        })?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let find = |name: &str| {
            cols.iter().position(|c| *c == name).ok_or_else(|| Error::Parse {
                row: 1,
                message: format!("missing column {name}"),
            })
        };
        let (qi, oi, bi) = (find("query_index")?, find("observation")?, find("B")?);
        let mut record = RunRecord {
            queries: Vec::new(),
            observations: Vec::new(),
            betas: Vec::new(),
            acquisition_values: Vec::new(),
            parameters: Vec::new(),
            final_selection: None,
            recommendation: 0,
        };
        for (row, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let get = |i: usize| {
                fields.get(i).copied().ok_or_else(|| Error::Parse {
                    row: row + 1,
                    message: format!("expected {} fields", cols.len()),
                })
            };
            let bad = |e: String| Error::Parse { row: row + 1, message: e };
            record.queries.push(get(qi)?.parse().map_err(|e| bad(format!("{e}")))?);
            record.observations.push(get(oi)?.parse().map_err(|e| bad(format!("{e}")))?);
            record.betas.push(get(bi)?.parse().map_err(|e| bad(format!("{e}")))?);
            record.acquisition_values.push(f64::NAN);
        }
        record.recommendation = best_observed(&record.queries, &record.observations);
        Ok(record)
    }
}

fn best_observed(queries: &[usize], observations: &[f64]) -> usize {
    let mut best = 0;
    for (i, y) in observations.iter().enumerate() {
        if *y > observations[best] {
            best = i;
        }
    }
    queries.get(best).copied().unwrap_or(0)
}

/// Called after every iteration with `(ℓ, best observation so far)`.
pub type Progress<'a> = &'a mut dyn FnMut(usize, f64);

/// Sequential UCB: start from a seeded uniform `z_0`, then for `ℓ = 1..=iterations`
/// observe `y = f(z_{ℓ−1}) + η`, condition the surrogate on all observations,
/// and select `z_ℓ`. Observation noise and `z_0` are drawn from `seed`.
pub fn run_ucb(
    surrogate: &mut dyn Surrogate,
    objective: &dyn Fn(usize) -> f64,
    noise_sd: f64,
    iterations: usize,
    config: &UcbConfig,
    seed: u64,
    mut progress: Option<Progress<'_>>,
) -> Result<RunRecord> {
    config.validate()?;
    if iterations == 0 {
        return Err(Error::Argument("need at least one iteration".into()));
    }
    if !(noise_sd >= 0.0) {
        return Err(Error::Argument(format!("noise sd must be >= 0, got {noise_sd}")));
    }
    let n = surrogate.model(&[], &[], noise_sd)?.len();
    if n < 2 {
        return Err(Error::Argument("cloud must have at least 2 points".into()));
    }
    if config.exclude_visited && iterations >= n {
        return Err(Error::Exhausted(n));
    }
    let mut rng = rng(seed);
    let mut next = rng.random_range(0..n);
    let mut excluded = vec![false; n];
    let mut record = RunRecord {
        queries: Vec::with_capacity(iterations),
        observations: Vec::with_capacity(iterations),
        betas: Vec::with_capacity(iterations),
        acquisition_values: Vec::with_capacity(iterations),
        parameters: Vec::new(),
        final_selection: None,
        recommendation: 0,
    };
    let mut last_state = None;
    for ell in 1..=iterations {
        let noise: f64 = if noise_sd > 0.0 { noise_sd * rng.sample::<f64, _>(StandardNormal) } else { 0.0 };
        let y = objective(next) + noise;
        record.queries.push(next);
        record.observations.push(y);
        if config.exclude_visited {
            excluded[next] = true;
        }

        let model = surrogate.model(&record.queries, &record.observations, noise_sd)?;
        let state = PosteriorState::condition(model, &record.queries, &record.observations, noise_sd)?;
        if let Some(p) = surrogate.parameter() {
            record.parameters.push(p);
        }
        let b = beta(config, ell, n, noise_sd)?;
        let candidates = config.acquisition_subsample.filter(|&s| s < n).map(|s| {
            index::sample(&mut rng, n, s).into_vec()
        });
        let selection = match select_next(&state, b, &excluded, candidates.as_deref()) {
            Err(Error::Exhausted(_)) if candidates.is_some() => select_next(&state, b, &excluded, None)?,
            other => other?,
        };
        record.betas.push(b);
        record.acquisition_values.push(selection.value);
        next = selection.index;
        if let Some(cb) = progress.as_mut() {
            let best = record.observations.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            cb(ell, best);
        }
        last_state = Some(state);
    }
    record.final_selection = Some(next);
    record.recommendation = match config.recommendation {
        Recommendation::BestObserved => best_observed(&record.queries, &record.observations),
        Recommendation::PosteriorMean => {
            let state = last_state.expect("at least one iteration");
            let mut best = record.queries[0];
            for &q in &record.queries {
                if state.means()[q] > state.means()[best] {
                    best = q;
                }
            }
            best
        }
    };
    Ok(record)
}

/// `iterations` distinct uniformly random points, evaluated without noise.
pub fn random_search_baseline(
    objective: &dyn Fn(usize) -> f64,
    n: usize,
    iterations: usize,
    seed: u64,
) -> Result<RunRecord> {
    if iterations == 0 || iterations > n {
        return Err(Error::Argument(format!(
            "random search needs 1 <= L <= N, got L={iterations}, N={n}"
        )));
    }
    let mut rng = rng(seed);
    let queries = index::sample(&mut rng, n, iterations).into_vec();
    let observations: Vec<f64> = queries.iter().map(|&q| objective(q)).collect();
    let recommendation = best_observed(&queries, &observations);
    Ok(RunRecord {
        betas: vec![0.0; iterations],
        acquisition_values: vec![0.0; iterations],
        parameters: Vec::new(),
        final_selection: None,
        recommendation,
        queries,
        observations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ggp::{CovarianceModel, KernelSpec};
    use crate::graph::{graph_spectrum, Normalization};
    use crate::point_cloud::sample_circle;

    fn model() -> CovarianceModel {
        let cloud = sample_circle(60, 5).unwrap();
        let s = graph_spectrum(&cloud, 0.6, 12, Normalization::EmpiricalL2).unwrap();
        CovarianceModel::from_spectrum(KernelSpec::matern(1.0, 2.0, 12, 1), &s).unwrap()
    }

    #[test]
    fn theoretical_beta_at_first_iteration_has_no_correction() {
        let cfg = UcbConfig { mode: BetaMode::Theoretical { epsilon: 3.0 }, ..Default::default() };
        let expected = (2.0 * (PI * PI * 500.0 / 0.6f64).ln()).sqrt();
        assert!((beta(&cfg, 1, 500, 0.0).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn empirical_beta_matches_hand_value() {
        let cfg = UcbConfig::default();
        // 0.5 √(2 ln(π² 500 / 0.6)), computed independently
        assert!((beta(&cfg, 1, 500, 0.1).unwrap() - 2.123_074_833_100_212).abs() < 1e-9);
    }

    #[test]
    fn beta_increases_in_iterations() {
        for mode in [BetaMode::Empirical { a: 0.5 }, BetaMode::Theoretical { epsilon: 0.01 }] {
            let cfg = UcbConfig { mode, ..Default::default() };
            let values: Vec<f64> = (1..=100).map(|l| beta(&cfg, l, 500, 0.1).unwrap()).collect();
            assert!(values.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn theoretical_dominates_empirical() {
        let th = UcbConfig { mode: BetaMode::Theoretical { epsilon: 0.02 }, ..Default::default() };
        for a in [0.2, 0.5, 1.0] {
            let em = UcbConfig { mode: BetaMode::Empirical { a }, ..Default::default() };
            for l in 1..=50 {
                assert!(beta(&th, l, 300, 0.1).unwrap() >= beta(&em, l, 300, 0.1).unwrap());
            }
        }
    }

    #[test]
    fn zero_noise_rejected_with_misspecification_budget() {
        let cfg = UcbConfig { mode: BetaMode::Theoretical { epsilon: 0.1 }, ..Default::default() };
        assert!(matches!(beta(&cfg, 2, 100, 0.0), Err(Error::Argument(_))));
        assert!(beta(&cfg, 0, 100, 0.1).is_err());
        let bad = UcbConfig { delta: 1.0, ..Default::default() };
        assert!(beta(&bad, 1, 100, 0.1).is_err());
    }

    #[test]
    fn zero_weight_selects_mean_argmax() {
        let m = model();
        let post = PosteriorState::condition(&m, &[3, 30], &[1.0, -1.0], 0.1).unwrap();
        let sel = select_next(&post, 0.0, &[false; 60], None).unwrap();
        let argmax = (0..60).max_by(|&a, &b| post.means()[a].total_cmp(&post.means()[b])).unwrap();
        assert_eq!(sel.index, argmax);
    }

    #[test]
    fn only_remaining_point_is_selected() {
        let m = model();
        let post = PosteriorState::condition(&m, &[3], &[1.0], 0.1).unwrap();
        let mut excluded = vec![true; 60];
        excluded[41] = false;
        assert_eq!(select_next(&post, 2.0, &excluded, None).unwrap().index, 41);
        assert!(matches!(select_next(&post, 2.0, &[true; 60], None), Err(Error::Exhausted(60))));
    }

    #[test]
    fn constant_acquisition_breaks_ties_low() {
        // one exactly constant mode: identical score everywhere
        let ones = nalgebra::DMatrix::from_element(20, 1, 1.0);
        let m = CovarianceModel::from_eigenpairs(KernelSpec::matern(1.0, 2.0, 1, 1), &[0.0], &ones).unwrap();
        let post = PosteriorState::condition(&m, &[], &[], 0.1).unwrap();
        assert_eq!(select_next(&post, 1.0, &[false; 20], None).unwrap().index, 0);
        let mut excluded = [false; 20];
        excluded[0] = true;
        assert_eq!(select_next(&post, 1.0, &excluded, None).unwrap().index, 1);
    }

    #[test]
    fn runs_are_deterministic_and_distinct() {
        let m = model();
        let truth = m.sample_prior(3);
        let f = |z: usize| truth[z];
        let cfg = UcbConfig::default();
        let a = run_ucb(&mut FixedSurrogate(&m), &f, 0.05, 25, &cfg, 9, None).unwrap();
        let b = run_ucb(&mut FixedSurrogate(&m), &f, 0.05, 25, &cfg, 9, None).unwrap();
        assert_eq!(a, b);
        let mut q = a.queries.clone();
        q.sort_unstable();
        q.dedup();
        assert_eq!(q.len(), 25);
        assert!(a.best_so_far().windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(a.betas.len(), 25);
    }

    #[test]
    fn single_iteration_run() {
        let m = model();
        let f = |z: usize| z as f64;
        let rec = run_ucb(&mut FixedSurrogate(&m), &f, 0.0, 1, &UcbConfig::default(), 2, None).unwrap();
        assert_eq!(rec.len(), 1);
        assert!(rec.final_selection.is_some());
        assert_ne!(rec.final_selection, Some(rec.queries[0]));
    }

    #[test]
    fn exhaustion_when_budget_covers_cloud() {
        let m = model();
        let f = |_: usize| 0.0;
        assert!(matches!(
            run_ucb(&mut FixedSurrogate(&m), &f, 0.1, 60, &UcbConfig::default(), 1, None),
            Err(Error::Exhausted(60))
        ));
    }

    #[test]
    fn subsampled_acquisition_runs() {
        let m = model();
        let truth = m.sample_prior(1);
        let f = |z: usize| truth[z];
        let cfg = UcbConfig { acquisition_subsample: Some(15), ..Default::default() };
        let rec = run_ucb(&mut FixedSurrogate(&m), &f, 0.05, 20, &cfg, 4, None).unwrap();
        assert_eq!(rec.len(), 20);
    }

    #[test]
    fn random_search_is_distinct_and_seeded() {
        let f = |z: usize| -(z as f64);
        let a = random_search_baseline(&f, 50, 20, 3).unwrap();
        assert_eq!(a, random_search_baseline(&f, 50, 20, 3).unwrap());
        let mut q = a.queries.clone();
        q.sort_unstable();
        q.dedup();
        assert_eq!(q.len(), 20);
        assert!(random_search_baseline(&f, 50, 51, 3).is_err());
    }

    #[test]
    fn csv_round_trip_keeps_queries() {
        let f = |z: usize| (z as f64).sin();
        let rec = random_search_baseline(&f, 30, 10, 1).unwrap();
        let back = RunRecord::from_csv(&rec.to_csv()).unwrap();
        assert_eq!(back.queries, rec.queries);
        assert_eq!(back.observations, rec.observations);
        assert_eq!(back.recommendation, rec.recommendation);
    }
}
