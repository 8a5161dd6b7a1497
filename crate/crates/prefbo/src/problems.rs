//! DTLZ benchmark objectives, analytic bounds, Pareto-front samplers,
//! Latin-hypercube initial designs and reference-point grids.
//!
//! Decision variables live in the unit cube; the first `m - 1` control the
//! position on the front, the remaining `k = n - m + 1` the distance to it.

use crate::metrics::nondominated_filter;
use rand::seq::SliceRandom;
use rand::Rng;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("unknown problem name '{0}'")]
    UnknownName(String),
    #[error("objective count must be 2 or 3, got {0}")]
    BadObjectiveCount(usize),
    #[error("need decision dim >= objective count, got {n} < {m}")]
    BadDecisionDim { n: usize, m: usize },
    #[error("decision vector has wrong dimension: expected {expected}, got {got}")]
    WrongDimension { expected: usize, got: usize },
    #[error("variable {index} = {value} outside [0, 1]")]
    OutOfBounds { index: usize, value: f64 },
    #[error("front sample needs at least 100 points, got {0}")]
    FrontTooSmall(usize),
    #[error("grid bounds invalid at objective {0}: lower must be below upper")]
    BadGridBounds(usize),
}

/// A box-constrained multi-objective minimisation problem.
pub trait Problem: Sync {
    fn decision_dim(&self) -> usize;
    fn objective_dim(&self) -> usize;
    fn bounds(&self) -> &[(f64, f64)];
    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, ProblemError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Benchmark {
    Dtlz2,
    Dtlz5,
    Dtlz7,
}

impl FromStr for Benchmark {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dtlz2" => Ok(Self::Dtlz2),
            "dtlz5" => Ok(Self::Dtlz5),
            "dtlz7" => Ok(Self::Dtlz7),
            other => Err(ProblemError::UnknownName(other.to_string())),
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Dtlz2 => write!(f, "dtlz2"),
            Self::Dtlz5 => write!(f, "dtlz5"),
            Self::Dtlz7 => write!(f, "dtlz7"),
        }
    }
}

/// Points sampled on the true Pareto front.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontSample {
    pub points: Vec<Vec<f64>>,
}

/// A DTLZ instance with its analytic objective bounds.
///
/// For DTLZ2/5 the ideal is the origin and the nadir inflates the front
/// extreme (1 per objective) by the worst distance-function value
/// `0.25 k`, so early off-front points stay inside the normalisation range.
/// DTLZ7 bounds come from the extremes of a dense front sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    benchmark: Benchmark,
    n: usize,
    m: usize,
    bounds: Vec<(f64, f64)>,
    ideal: Vec<f64>,
    nadir: Vec<f64>,
    front_extremes: Vec<f64>,
}

impl ProblemSpec {
    pub fn new(benchmark: Benchmark, n: usize, m: usize) -> Result<Self, ProblemError> {
        if !(2..=3).contains(&m) {
            return Err(ProblemError::BadObjectiveCount(m));
        }
        if n < m {
            return Err(ProblemError::BadDecisionDim { n, m });
        }
        let k = (n - m + 1) as f64;
        let mut spec = Self {
            benchmark,
            n,
            m,
            bounds: vec![(0.0, 1.0); n],
            ideal: vec![0.0; m],
            nadir: vec![1.0 + 0.25 * k; m],
            front_extremes: vec![1.0; m],
        };
        if benchmark == Benchmark::Dtlz7 {
            let front = spec.sample_front(if m == 2 { 10_001 } else { 10_000 })?;
            let mut lo = vec![f64::INFINITY; m];
            let mut hi = vec![f64::NEG_INFINITY; m];
            for p in &front.points {
                for i in 0..m {
                    lo[i] = lo[i].min(p[i]);
                    hi[i] = hi[i].max(p[i]);
                }
            }
            spec.ideal = lo;
            spec.nadir = hi.clone();
            spec.front_extremes = hi;
        }
        Ok(spec)
    }

    pub fn benchmark(&self) -> Benchmark {
        self.benchmark
    }

    pub fn ideal(&self) -> &[f64] {
        &self.ideal
    }

    pub fn nadir(&self) -> &[f64] {
        &self.nadir
    }

    /// Componentwise maxima over the true front; the default upper bounds of
    /// the reference-point grid.
    pub fn front_extremes(&self) -> &[f64] {
        &self.front_extremes
    }

    fn check_input(&self, x: &[f64]) -> Result<(), ProblemError> {
        if x.len() != self.n {
            return Err(ProblemError::WrongDimension { expected: self.n, got: x.len() });
        }
        for (index, &value) in x.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(ProblemError::OutOfBounds { index, value });
            }
        }
        Ok(())
    }

    fn eval_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let m = self.m;
        match self.benchmark {
            Benchmark::Dtlz2 | Benchmark::Dtlz5 => {
                let g: f64 = x[m - 1..].iter().map(|&v| (v - 0.5) * (v - 0.5)).sum();
                let thetas: Vec<f64> = match self.benchmark {
                    Benchmark::Dtlz2 => {
                        (0..m - 1).map(|j| x[j] * PI / 2.0).collect()
                    }
                    _ => {
                        // DTLZ5 bends every angle after the first towards pi/4
                        let mut t = vec![x[0] * PI / 2.0];
                        for j in 1..m - 1 {
                            t.push(PI / (4.0 * (1.0 + g)) * (1.0 + 2.0 * g * x[j]));
                        }
                        t
                    }
                };
                spherical_objectives(&thetas, g, m)
            }
            Benchmark::Dtlz7 => {
                let k = (self.n - m + 1) as f64;
                let g = 1.0 + 9.0 / k * x[m - 1..].iter().sum::<f64>();
                let mut f: Vec<f64> = x[..m - 1].to_vec();
                let h = m as f64
                    - f.iter()
                        .map(|&fi| fi / (1.0 + g) * (1.0 + (3.0 * PI * fi).sin()))
                        .sum::<f64>();
                f.push((1.0 + g) * h);
                f
            }
        }
    }

    /// Sample the true Pareto front on a uniform position grid: distance
    /// variables at 0.5 (g = 0) for DTLZ2/5, at 0 (g = 1) plus a
    /// nondominated filter for the disconnected DTLZ7 front.
    pub fn sample_front(&self, count: usize) -> Result<FrontSample, ProblemError> {
        if count < 100 {
            return Err(ProblemError::FrontTooSmall(count));
        }
        let distance_value = match self.benchmark {
            Benchmark::Dtlz7 => 0.0,
            _ => 0.5,
        };
        let positions = position_grid(self.m - 1, count);
        let points: Vec<Vec<f64>> = positions
            .into_iter()
            .map(|pos| {
                let mut x = pos;
                x.resize(self.n, distance_value);
                self.eval_unchecked(&x)
            })
            .collect();
        let points = match self.benchmark {
            Benchmark::Dtlz7 => nondominated_filter(&points),
            _ => points,
        };
        Ok(FrontSample { points })
    }
}

impl Problem for ProblemSpec {
    fn decision_dim(&self) -> usize {
        self.n
    }

    fn objective_dim(&self) -> usize {
        self.m
    }

    fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, ProblemError> {
        self.check_input(x)?;
        Ok(self.eval_unchecked(x))
    }
}

/// `f_i = (1+g) * prod_{j<m-1-i} cos(theta_j) * [sin(theta_{m-1-i}) if i>0]`
fn spherical_objectives(thetas: &[f64], g: f64, m: usize) -> Vec<f64> {
    let scale = 1.0 + g;
    (0..m)
        .map(|i| {
            let mut v = scale;
            let cos_count = m - 1 - i;
            for theta in &thetas[..cos_count] {
                v *= theta.cos();
            }
            if i > 0 {
                v *= thetas[cos_count].sin();
            }
            v
        })
        .collect()
}

/// Uniform grid over the position variables with at least `count` nodes for
/// one position variable, or `ceil(sqrt(count))^2` nodes for two.
fn position_grid(dims: usize, count: usize) -> Vec<Vec<f64>> {
    match dims {
        1 => (0..count).map(|i| vec![i as f64 / (count - 1) as f64]).collect(),
        2 => {
            let side = (count as f64).sqrt().ceil() as usize;
            let step = 1.0 / (side - 1) as f64;
            let mut out = Vec::with_capacity(side * side);
            for i in 0..side {
                for j in 0..side {
                    out.push(vec![i as f64 * step, j as f64 * step]);
                }
            }
            out
        }
        _ => unreachable!("objective count validated to 2 or 3"),
    }
}

/// Latin hypercube design on the unit cube: per dimension exactly one point
/// per stratum `[k/N, (k+1)/N)`, strata permuted independently, positions
/// uniform within each stratum.
pub fn lhs_design<R: Rng + ?Sized>(dim: usize, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
    assert!(count >= 1 && dim >= 1);
    let mut points = vec![vec![0.0; dim]; count];
    let nf = count as f64;
    for j in 0..dim {
        let mut strata: Vec<usize> = (0..count).collect();
        strata.shuffle(rng);
        for (i, &stratum) in strata.iter().enumerate() {
            let u: f64 = rng.random();
            points[i][j] = (stratum as f64 + u) / nf;
        }
    }
    points
}

/// The 25-point reference grid: a 5x5 lattice for two objectives, the 25
/// lexicographically-first nodes of a 3x3x3 lattice for three.
pub fn refpoint_grid(lower: &[f64], upper: &[f64]) -> Result<Vec<Vec<f64>>, ProblemError> {
    let m = lower.len();
    if upper.len() != m {
        return Err(ProblemError::WrongDimension { expected: m, got: upper.len() });
    }
    if !(2..=3).contains(&m) {
        return Err(ProblemError::BadObjectiveCount(m));
    }
    for i in 0..m {
        if !(lower[i] < upper[i]) {
            return Err(ProblemError::BadGridBounds(i));
        }
    }
    let node = |i: usize, steps: usize, d: usize| -> f64 {
        lower[d] + (upper[d] - lower[d]) * i as f64 / (steps - 1) as f64
    };
    let mut out = Vec::with_capacity(25);
    if m == 2 {
        for i in 0..5 {
            for j in 0..5 {
                out.push(vec![node(i, 5, 0), node(j, 5, 1)]);
            }
        }
    } else {
        'outer: for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    out.push(vec![node(i, 3, 0), node(j, 3, 1), node(k, 3, 2)]);
                    if out.len() == 25 {
                        break 'outer;
                    }
                }
            }
        }
    }
    Ok(out)
}
