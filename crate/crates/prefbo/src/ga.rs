//! Real-coded genetic algorithm for maximising a black-box acquisition over
//! a box-constrained decision space.
//!
//! Tournament selection (size 2), simulated binary crossover, polynomial
//! mutation, single-individual elitism. All random draws happen on a single
//! seeded stream before fitness evaluations fan out, so runs are
//! bit-reproducible regardless of thread count.

use crate::par;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaError {
    #[error("population size must be even and >= 4, got {0}")]
    BadPopulation(usize),
    #[error("need at least one generation")]
    NoGenerations,
    #[error("probability out of [0,1]: {0}")]
    BadProbability(f64),
    #[error("distribution index must be positive, got {0}")]
    BadEta(f64),
    #[error("dimension {0}: lower bound must be below upper bound")]
    BadBounds(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    /// Per-variable mutation probability; `None` means `1/n`.
    pub mutation_prob: Option<f64>,
    pub sbx_eta: f64,
    pub pm_eta: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            generations: 100,
            crossover_prob: 0.9,
            mutation_prob: None,
            sbx_eta: 15.0,
            pm_eta: 20.0,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), GaError> {
        if self.population_size < 4 || self.population_size % 2 != 0 {
            return Err(GaError::BadPopulation(self.population_size));
        }
        if self.generations == 0 {
            return Err(GaError::NoGenerations);
        }
        for p in [self.crossover_prob, self.mutation_prob.unwrap_or(0.5)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(GaError::BadProbability(p));
            }
        }
        for eta in [self.sbx_eta, self.pm_eta] {
            if !(eta > 0.0) {
                return Err(GaError::BadEta(eta));
            }
        }
        Ok(())
    }
}

/// Maximise `objective` over the box; returns the best evaluated point.
///
/// Total objective evaluations: `population_size * generations` (the initial
/// population counts as the first generation).
pub fn maximize<F>(
    objective: &F,
    bounds: &[(f64, f64)],
    cfg: &GaConfig,
) -> Result<(Vec<f64>, f64), GaError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let (x, v, _) = maximize_traced(objective, bounds, cfg)?;
    Ok((x, v))
}

/// As [`maximize`], additionally returning the best-so-far value after each
/// generation.
pub fn maximize_traced<F>(
    objective: &F,
    bounds: &[(f64, f64)],
    cfg: &GaConfig,
) -> Result<(Vec<f64>, f64, Vec<f64>), GaError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    let dim = bounds.len();
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo < hi) {
            return Err(GaError::BadBounds(i));
        }
    }
    let mutation_prob = cfg.mutation_prob.unwrap_or(1.0 / dim as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pop = cfg.population_size;

    let mut population: Vec<Vec<f64>> = (0..pop)
        .map(|_| bounds.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect())
        .collect();
    let mut fitness = evaluate_all(objective, &population);

    let mut best_idx = argmax(&fitness);
    let mut best_x = population[best_idx].clone();
    let mut best_value = fitness[best_idx];
    let mut trace = vec![best_value];

    for _ in 1..cfg.generations {
        let mut children: Vec<Vec<f64>> = Vec::with_capacity(pop);
        while children.len() < pop {
            let p1 = tournament(&fitness, &mut rng);
            let p2 = tournament(&fitness, &mut rng);
            let (mut c1, mut c2) = (population[p1].clone(), population[p2].clone());
            if rng.random::<f64>() < cfg.crossover_prob {
                sbx_crossover(&mut c1, &mut c2, bounds, cfg.sbx_eta, &mut rng);
            }
            polynomial_mutation(&mut c1, bounds, mutation_prob, cfg.pm_eta, &mut rng);
            polynomial_mutation(&mut c2, bounds, mutation_prob, cfg.pm_eta, &mut rng);
            children.push(c1);
            children.push(c2);
        }
        let mut child_fitness = evaluate_all(objective, &children);

        // elitism: carry the best-ever individual over the worst child
        let worst = argmin(&child_fitness);
        children[worst] = best_x.clone();
        child_fitness[worst] = best_value;

        population = children;
        fitness = child_fitness;
        best_idx = argmax(&fitness);
        if fitness[best_idx] > best_value {
            best_value = fitness[best_idx];
            best_x = population[best_idx].clone();
        }
        trace.push(best_value);
    }

    Ok((best_x, best_value, trace))
}

fn evaluate_all<F>(objective: &F, population: &[Vec<f64>]) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    par::map_slice(population, |x| objective(x))
}

fn argmax(values: &[f64]) -> usize {
    let mut idx = 0;
    for i in 1..values.len() {
        if values[i] > values[idx] {
            idx = i;
        }
    }
    idx
}

fn argmin(values: &[f64]) -> usize {
    let mut idx = 0;
    for i in 1..values.len() {
        if values[i] < values[idx] {
            idx = i;
        }
    }
    idx
}

fn tournament<R: Rng>(fitness: &[f64], rng: &mut R) -> usize {
    let a = rng.random_range(0..fitness.len());
    let b = rng.random_range(0..fitness.len());
    if fitness[b] > fitness[a] {
        b
    } else {
        a
    }
}

fn sbx_crossover<R: Rng>(
    a: &mut [f64],
    b: &mut [f64],
    bounds: &[(f64, f64)],
    eta: f64,
    rng: &mut R,
) {
    for j in 0..a.len() {
        // each variable crossed with probability 0.5, else passed through
        if rng.random::<f64>() >= 0.5 {
            continue;
        }
        if (a[j] - b[j]).abs() < 1e-14 {
            continue;
        }
        let u: f64 = rng.random();
        let beta = if u <= 0.5 {
            (2.0 * u).powf(1.0 / (eta + 1.0))
        } else {
            (1.0 / (2.0 * (1.0 - u))).powf(1.0 / (eta + 1.0))
        };
        let (p, q) = (a[j], b[j]);
        let (lo, hi) = bounds[j];
        a[j] = (0.5 * ((1.0 + beta) * p + (1.0 - beta) * q)).clamp(lo, hi);
        b[j] = (0.5 * ((1.0 - beta) * p + (1.0 + beta) * q)).clamp(lo, hi);
    }
}

fn polynomial_mutation<R: Rng>(
    x: &mut [f64],
    bounds: &[(f64, f64)],
    prob: f64,
    eta: f64,
    rng: &mut R,
) {
    for j in 0..x.len() {
        if rng.random::<f64>() >= prob {
            continue;
        }
        let u: f64 = rng.random();
        let delta = if u < 0.5 {
            (2.0 * u).powf(1.0 / (eta + 1.0)) - 1.0
        } else {
            1.0 - (2.0 * (1.0 - u)).powf(1.0 / (eta + 1.0))
        };
        let (lo, hi) = bounds[j];
        x[j] = (x[j] + delta * (hi - lo)).clamp(lo, hi);
    }
}
