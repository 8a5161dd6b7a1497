//! The Bayesian-optimisation loops.
//!
//! Both loops share the same skeleton: a Latin-hypercube initial design,
//! then train-model / maximise-acquisition / evaluate / append until the
//! evaluation budget is spent. The mono-surrogate loop models scalarised
//! values with one GP and uses the closed-form expected improvement. The
//! multi-surrogate loop trains one GP per objective and scores candidates
//! through the max-of-Gaussians distribution of the ASF, either by fitting
//! a Gumbel to its samples and estimating EI by Monte Carlo, or through the
//! Laplace approximation and the closed form.
//!
//! Decision variables are normalised to the unit cube for the surrogates
//! and the acquisition optimiser; evaluations happen in problem units.

use crate::acquisition::{
    expected_improvement, expected_improvement_laplace, expected_improvement_mc_crn,
    gumbel_base_draws, Incumbent,
};
use crate::asf_dist::{Gumbel, MaxOfGaussians};
use crate::ga::{self, GaConfig, GaError};
use crate::gp::TrainedGp;
use crate::par;
use crate::problems::{lhs_design, Problem, ProblemError};
use crate::scalarize::PreferenceSpec;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriverError {
    #[error("budget ({budget}) must exceed the initial design size ({initial})")]
    BudgetTooSmall { budget: usize, initial: usize },
    #[error("initial design needs at least 2 points, got {0}")]
    InitialTooSmall(usize),
    #[error("method {got} not valid here, expected {expected}")]
    MethodMismatch { expected: &'static str, got: String },
    #[error("augmented ASF (rho > 0) is incompatible with the max-of-Gaussians density")]
    AugmentationUnsupported,
    #[error("preference has {pref} objectives but problem has {problem}")]
    ObjectiveMismatch { pref: usize, problem: usize },
    #[error("unknown method '{0}'")]
    UnknownMethod(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Ga(#[from] GaError),
    #[error("dataset is empty")]
    EmptyDataset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Mono,
    MultiGumbel,
    MultiLaplace,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Mono => "mono",
            Self::MultiGumbel => "multi-gumbel",
            Self::MultiLaplace => "multi-laplace",
        }
    }

    pub fn is_multi(&self) -> bool {
        !matches!(self, Self::Mono)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = DriverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mono" => Ok(Self::Mono),
            "multi-gumbel" | "multi_gumbel" => Ok(Self::MultiGumbel),
            "multi-laplace" | "multi_laplace" => Ok(Self::MultiLaplace),
            other => Err(DriverError::UnknownMethod(other.to_string())),
        }
    }
}

/// Evaluated decision vectors paired with their objective vectors; the
/// loop's accumulating state. Entries are never modified after insertion.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    decisions: Vec<Vec<f64>>,
    objectives: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: Vec<f64>, f: Vec<f64>) {
        self.decisions.push(x);
        self.objectives.push(f);
    }

    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    pub fn decisions(&self) -> &[Vec<f64>] {
        &self.decisions
    }

    pub fn objectives(&self) -> &[Vec<f64>] {
        &self.objectives
    }
}

/// Componentwise extremes of the observed objectives, for problems without
/// analytic bounds. A degenerate range is widened by 1e-6.
pub fn running_bounds(dataset: &Dataset) -> Result<(Vec<f64>, Vec<f64>), DriverError> {
    let first = dataset.objectives.first().ok_or(DriverError::EmptyDataset)?;
    let m = first.len();
    let mut ideal = vec![f64::INFINITY; m];
    let mut nadir = vec![f64::NEG_INFINITY; m];
    for f in &dataset.objectives {
        for i in 0..m {
            ideal[i] = ideal[i].min(f[i]);
            nadir[i] = nadir[i].max(f[i]);
        }
    }
    for i in 0..m {
        if nadir[i] <= ideal[i] {
            nadir[i] = ideal[i] + 1e-6;
        }
    }
    Ok((ideal, nadir))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Init,
    Bo,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Init => "init",
            Self::Bo => "bo",
        })
    }
}

/// One evaluation in a run. Distances to the reference solution are NaN
/// when no front sample is available.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub eval_index: usize,
    pub x: Vec<f64>,
    pub objectives: Vec<f64>,
    pub asf: f64,
    pub min_asf: f64,
    pub asf_distance: f64,
    pub min_asf_distance: f64,
    pub wall_clock_s: f64,
    pub phase: Phase,
}

/// Full per-evaluation trace of one run. `failure` carries the diagnostic
/// when model training aborted the loop early.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<EvalRecord>,
    pub failure: Option<String>,
}

impl RunTrace {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    pub initial_size: usize,
    pub budget: usize,
    pub seed: u64,
    pub gp_restarts: usize,
    pub n_mc: usize,
    pub n_gumbel_fit: usize,
    pub ga: GaConfig,
}

impl RunConfig {
    /// Experiment defaults: 10n initial points, 30n total evaluations,
    /// 10 likelihood restarts, 1000 density samples per candidate, 1000
    /// Monte-Carlo draws for the EI.
    pub fn with_defaults(method: Method, decision_dim: usize, seed: u64) -> Self {
        Self {
            method,
            initial_size: 10 * decision_dim,
            budget: 30 * decision_dim,
            seed,
            gp_restarts: 10,
            n_mc: 1000,
            n_gumbel_fit: 1000,
            ga: GaConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), DriverError> {
        if self.initial_size < 2 {
            return Err(DriverError::InitialTooSmall(self.initial_size));
        }
        if self.budget <= self.initial_size {
            return Err(DriverError::BudgetTooSmall {
                budget: self.budget,
                initial: self.initial_size,
            });
        }
        self.ga.validate()?;
        Ok(())
    }
}

/// Dispatch on `cfg.method`.
pub fn run(
    problem: &dyn Problem,
    pref: &PreferenceSpec,
    cfg: &RunConfig,
    ref_asf: Option<f64>,
) -> Result<RunTrace, DriverError> {
    match cfg.method {
        Method::Mono => run_mono(problem, pref, cfg, ref_asf),
        _ => run_multi(problem, pref, cfg, ref_asf),
    }
}

struct LoopState<'a> {
    problem: &'a dyn Problem,
    pref: &'a PreferenceSpec,
    ref_asf: Option<f64>,
    start: Instant,
    dataset: Dataset,
    unit_points: Vec<Vec<f64>>,
    incumbent: Incumbent,
    min_distance: f64,
    records: Vec<EvalRecord>,
}

impl<'a> LoopState<'a> {
    fn new(problem: &'a dyn Problem, pref: &'a PreferenceSpec, ref_asf: Option<f64>) -> Self {
        Self {
            problem,
            pref,
            ref_asf,
            start: Instant::now(),
            dataset: Dataset::new(),
            unit_points: Vec::new(),
            incumbent: Incumbent::new(),
            min_distance: f64::INFINITY,
            records: Vec::new(),
        }
    }

    fn denormalize(&self, unit: &[f64]) -> Vec<f64> {
        self.problem
            .bounds()
            .iter()
            .zip(unit)
            .map(|(&(lo, hi), &u)| lo + (hi - lo) * u)
            .collect()
    }

    fn evaluate_and_record(&mut self, unit: Vec<f64>, phase: Phase) -> Result<(), DriverError> {
        let x = self.denormalize(&unit);
        let f = self.problem.evaluate(&x)?;
        let asf = self.pref.asf(&f);
        self.incumbent.observe(asf);
        let distance = match self.ref_asf {
            Some(g) => (asf - g).abs(),
            None => f64::NAN,
        };
        if distance < self.min_distance {
            self.min_distance = distance;
        }
        let min_distance = if self.ref_asf.is_some() { self.min_distance } else { f64::NAN };
        self.records.push(EvalRecord {
            eval_index: self.records.len() + 1,
            x: x.clone(),
            objectives: f.clone(),
            asf,
            min_asf: self.incumbent.value(),
            asf_distance: distance,
            min_asf_distance: min_distance,
            wall_clock_s: self.start.elapsed().as_secs_f64(),
            phase,
        });
        self.unit_points.push(unit);
        self.dataset.push(x, f);
        Ok(())
    }

    fn initial_design(&mut self, size: usize, rng: &mut ChaCha8Rng) -> Result<(), DriverError> {
        let n = self.problem.decision_dim();
        for unit in lhs_design(n, size, rng) {
            self.evaluate_and_record(unit, Phase::Init)?;
        }
        Ok(())
    }

    fn finish(self, failure: Option<String>) -> RunTrace {
        RunTrace { records: self.records, failure }
    }
}

fn check_common(
    problem: &dyn Problem,
    pref: &PreferenceSpec,
    cfg: &RunConfig,
) -> Result<(), DriverError> {
    cfg.validate()?;
    if pref.objective_dim() != problem.objective_dim() {
        return Err(DriverError::ObjectiveMismatch {
            pref: pref.objective_dim(),
            problem: problem.objective_dim(),
        });
    }
    Ok(())
}

/// Mono-surrogate loop: one GP on ASF values, closed-form EI.
pub fn run_mono(
    problem: &dyn Problem,
    pref: &PreferenceSpec,
    cfg: &RunConfig,
    ref_asf: Option<f64>,
) -> Result<RunTrace, DriverError> {
    check_common(problem, pref, cfg)?;
    if cfg.method != Method::Mono {
        return Err(DriverError::MethodMismatch {
            expected: "mono",
            got: cfg.method.to_string(),
        });
    }
    let n = problem.decision_dim();
    let unit_bounds = vec![(0.0, 1.0); n];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = LoopState::new(problem, pref, ref_asf);
    state.initial_design(cfg.initial_size, &mut rng)?;

    while state.dataset.len() < cfg.budget {
        let gp_seed = rng.next_u64();
        let ga_seed = rng.next_u64();
        let asf_values: Vec<f64> =
            state.dataset.objectives().iter().map(|f| pref.asf(f)).collect();
        let mut gp_rng = ChaCha8Rng::seed_from_u64(gp_seed);
        let model = match TrainedGp::train(
            &state.unit_points,
            &asf_values,
            cfg.gp_restarts,
            &mut gp_rng,
        ) {
            Ok(m) => m,
            Err(e) => return Ok(state.finish(Some(e.to_string()))),
        };
        let best = state.incumbent.value();
        let acq = |u: &[f64]| {
            model
                .predict(u)
                .map(|p| expected_improvement(p.mean, p.std, best))
                .unwrap_or(0.0)
        };
        let ga_cfg = GaConfig { seed: ga_seed, ..cfg.ga.clone() };
        let (unit_star, _) = ga::maximize(&acq, &unit_bounds, &ga_cfg)?;
        state.evaluate_and_record(unit_star, Phase::Bo)?;
    }
    Ok(state.finish(None))
}

/// Multi-surrogate loop: independent GPs per objective; candidates scored
/// through the max-of-Gaussians ASF distribution (Gumbel + Monte-Carlo EI,
/// or Laplace + closed-form EI).
pub fn run_multi(
    problem: &dyn Problem,
    pref: &PreferenceSpec,
    cfg: &RunConfig,
    ref_asf: Option<f64>,
) -> Result<RunTrace, DriverError> {
    check_common(problem, pref, cfg)?;
    if !cfg.method.is_multi() {
        return Err(DriverError::MethodMismatch {
            expected: "multi-gumbel or multi-laplace",
            got: cfg.method.to_string(),
        });
    }
    if pref.augmentation() > 0.0 {
        return Err(DriverError::AugmentationUnsupported);
    }
    let n = problem.decision_dim();
    let m = problem.objective_dim();
    let unit_bounds = vec![(0.0, 1.0); n];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = LoopState::new(problem, pref, ref_asf);
    state.initial_design(cfg.initial_size, &mut rng)?;

    while state.dataset.len() < cfg.budget {
        let gp_seeds: Vec<u64> = (0..m).map(|_| rng.next_u64()).collect();
        let ga_seed = rng.next_u64();
        // common random numbers for this iteration's acquisition surface
        let crn_normals: Vec<f64> = if cfg.method == Method::MultiGumbel {
            (0..cfg.n_gumbel_fit * m).map(|_| rng.sample(StandardNormal)).collect()
        } else {
            Vec::new()
        };
        let crn_gumbel_base: Vec<f64> = if cfg.method == Method::MultiGumbel {
            gumbel_base_draws(cfg.n_mc, &mut rng)
        } else {
            Vec::new()
        };

        let targets: Vec<Vec<f64>> = (0..m)
            .map(|j| state.dataset.objectives().iter().map(|f| f[j]).collect())
            .collect();
        let trained: Vec<Result<TrainedGp, _>> = par::map_indexed(m, |j| {
            let mut gp_rng = ChaCha8Rng::seed_from_u64(gp_seeds[j]);
            TrainedGp::train(&state.unit_points, &targets[j], cfg.gp_restarts, &mut gp_rng)
        });
        let mut models = Vec::with_capacity(m);
        for result in trained {
            match result {
                Ok(model) => models.push(model),
                Err(e) => return Ok(state.finish(Some(e.to_string()))),
            }
        }

        let best = state.incumbent.value();
        let method = cfg.method;
        let acq = |u: &[f64]| -> f64 {
            let mut means = Vec::with_capacity(m);
            let mut stds = Vec::with_capacity(m);
            for model in &models {
                match model.predict(u) {
                    Ok(p) => {
                        means.push(p.mean);
                        stds.push(p.std);
                    }
                    Err(_) => return 0.0,
                }
            }
            let Ok(dist) = MaxOfGaussians::from_posterior(&means, &stds, pref) else {
                return 0.0;
            };
            match method {
                Method::MultiGumbel => {
                    let samples = dist.sample_with_normals(&crn_normals);
                    match Gumbel::fit(&samples) {
                        Ok(q) => expected_improvement_mc_crn(&q, best, &crn_gumbel_base),
                        Err(e) => {
                            log::debug!("Gumbel fit failed at candidate: {e}");
                            0.0
                        }
                    }
                }
                Method::MultiLaplace => match dist.laplace_fit() {
                    Ok(fit) => expected_improvement_laplace(&fit, best),
                    Err(e) => {
                        log::debug!("Laplace fit failed at candidate: {e}");
                        0.0
                    }
                },
                Method::Mono => unreachable!(),
            }
        };
        let ga_cfg = GaConfig { seed: ga_seed, ..cfg.ga.clone() };
        let (unit_star, _) = ga::maximize(&acq, &unit_bounds, &ga_cfg)?;
        state.evaluate_and_record(unit_star, Phase::Bo)?;
    }
    Ok(state.finish(None))
}
