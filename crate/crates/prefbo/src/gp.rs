//! Gaussian-process regression with a squared-exponential ARD kernel.
//!
//! `kappa(x, x') = sigma_f^2 exp(-1/2 sum_j |x_j - x'_j|^2 / l_j^2)
//!                 + sigma_n^2 [same index]`
//!
//! Training maximises the log marginal likelihood over log-hyperparameters
//! with BFGS from several random starts; predictions use the cached Cholesky
//! factor. Targets are standardised internally (the zero-mean prior is exact
//! in standardised space) and predictions are mapped back, so the stored
//! hyperparameters refer to standardised targets.

use crate::opt::bfgs_box_maximize;
use crate::par;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("signal std must be positive, got {0}")]
    NonPositiveSignal(f64),
    #[error("lengthscale {index} must be positive, got {value}")]
    NonPositiveLengthscale { index: usize, value: f64 },
    #[error("noise std must be nonnegative, got {0}")]
    NegativeNoise(f64),
    #[error("hyperparameters must be finite")]
    NonFinite,
    #[error("need at least {need} data points, got {got}")]
    TooFewPoints { got: usize, need: usize },
    #[error("inputs/targets length mismatch: {inputs} vs {targets}")]
    LengthMismatch { inputs: usize, targets: usize },
    #[error("Cholesky factorisation failed after jitter escalation up to {max_jitter:e}")]
    NumericFailure { max_jitter: f64 },
    #[error("all {restarts} restarts failed: {diagnostic}")]
    TrainingFailure { restarts: usize, diagnostic: String },
}

/// Kernel hyperparameters: signal std, one lengthscale per input dimension,
/// noise std.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparameters {
    signal_std: f64,
    lengthscales: Vec<f64>,
    noise_std: f64,
}

impl Hyperparameters {
    pub fn new(
        signal_std: f64,
        lengthscales: Vec<f64>,
        noise_std: f64,
    ) -> Result<Self, GpError> {
        if !signal_std.is_finite()
            || !noise_std.is_finite()
            || lengthscales.iter().any(|l| !l.is_finite())
        {
            return Err(GpError::NonFinite);
        }
        if signal_std <= 0.0 {
            return Err(GpError::NonPositiveSignal(signal_std));
        }
        for (index, &value) in lengthscales.iter().enumerate() {
            if value <= 0.0 {
                return Err(GpError::NonPositiveLengthscale { index, value });
            }
        }
        if noise_std < 0.0 {
            return Err(GpError::NegativeNoise(noise_std));
        }
        Ok(Self { signal_std, lengthscales, noise_std })
    }

    pub fn signal_std(&self) -> f64 {
        self.signal_std
    }

    pub fn lengthscales(&self) -> &[f64] {
        &self.lengthscales
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    pub fn input_dim(&self) -> usize {
        self.lengthscales.len()
    }
}

/// Kernel evaluation. The noise term is added only when `same_index` marks
/// two views of the same data row, never for merely equal coordinates.
pub fn kernel(
    x: &[f64],
    y: &[f64],
    theta: &Hyperparameters,
    same_index: bool,
) -> Result<f64, GpError> {
    let dim = theta.input_dim();
    if x.len() != dim {
        return Err(GpError::DimensionMismatch { expected: dim, got: x.len() });
    }
    if y.len() != dim {
        return Err(GpError::DimensionMismatch { expected: dim, got: y.len() });
    }
    let mut q = 0.0;
    for j in 0..dim {
        let d = x[j] - y[j];
        let l = theta.lengthscales[j];
        q += (d * d) / (l * l);
    }
    let sf2 = theta.signal_std * theta.signal_std;
    let noise = if same_index { theta.noise_std * theta.noise_std } else { 0.0 };
    Ok(sf2 * (-0.5 * q).exp() + noise)
}

/// Posterior predictive moments at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub std: f64,
}

const LN_2PI: f64 = 1.837_877_066_409_345_4;

/// Log marginal likelihood and its gradient with respect to
/// `[ln sigma_f, ln l_1, ..., ln l_n, ln sigma_n]`.
///
/// `value = -1/2 f^T K^-1 f - 1/2 ln|K| - N/2 ln(2 pi)`. Targets are used
/// as given (no standardisation here).
pub fn log_marginal_likelihood(
    inputs: &[Vec<f64>],
    targets: &[f64],
    theta: &Hyperparameters,
) -> Result<(f64, Vec<f64>), GpError> {
    check_data(inputs, targets, theta.input_dim(), 1)?;
    let dist2 = pairwise_dist2(inputs, theta.input_dim());
    let f = DVector::from_column_slice(targets);
    let e = corr_matrix(&dist2, &theta.lengthscales);
    let fact = factorize(&e, theta, &f)?;
    let grad = lml_grad(&e, &dist2, theta, &fact);
    Ok((fact.log_marginal, grad))
}

/// A fitted GP: hyperparameters plus cached factorisation for O(N) mean /
/// O(N^2) variance queries.
#[derive(Debug, Clone)]
pub struct TrainedGp {
    inputs: Vec<Vec<f64>>,
    theta: Hyperparameters,
    l_factor: DMatrix<f64>,
    alpha: DVector<f64>,
    log_marginal: f64,
    jitter: f64,
    target_mean: f64,
    target_std: f64,
}

impl TrainedGp {
    /// Condition on data with fixed hyperparameters (no optimisation).
    /// `theta` refers to standardised targets.
    pub fn fit(
        inputs: &[Vec<f64>],
        targets: &[f64],
        theta: &Hyperparameters,
    ) -> Result<Self, GpError> {
        Self::fit_impl(inputs, targets, theta, None)
    }

    /// As [`TrainedGp::fit`] with an explicit diagonal jitter instead of the
    /// escalation ladder.
    pub fn fit_with_jitter(
        inputs: &[Vec<f64>],
        targets: &[f64],
        theta: &Hyperparameters,
        jitter: f64,
    ) -> Result<Self, GpError> {
        Self::fit_impl(inputs, targets, theta, Some(jitter))
    }

    fn fit_impl(
        inputs: &[Vec<f64>],
        targets: &[f64],
        theta: &Hyperparameters,
        jitter: Option<f64>,
    ) -> Result<Self, GpError> {
        check_data(inputs, targets, theta.input_dim(), 1)?;
        let (std_targets, target_mean, target_std) = standardize(targets);
        let dist2 = pairwise_dist2(inputs, theta.input_dim());
        let e = corr_matrix(&dist2, &theta.lengthscales);
        let fact = match jitter {
            Some(j) => factorize_at(&e, theta, &std_targets, j)
                .ok_or(GpError::NumericFailure { max_jitter: j })?,
            None => factorize(&e, theta, &std_targets)?,
        };
        Ok(Self {
            inputs: inputs.to_vec(),
            theta: theta.clone(),
            l_factor: fact.chol.l(),
            alpha: fact.alpha,
            log_marginal: fact.log_marginal,
            jitter: fact.jitter,
            target_mean,
            target_std,
        })
    }

    /// Maximise the marginal likelihood over log-hyperparameters with BFGS
    /// from `restarts` uniform starts in the search box, keeping the best
    /// (ties broken by restart index). Deterministic for a given `rng`
    /// state; restarts run concurrently.
    pub fn train<R: Rng + ?Sized>(
        inputs: &[Vec<f64>],
        targets: &[f64],
        restarts: usize,
        rng: &mut R,
    ) -> Result<Self, GpError> {
        let dim = inputs.first().map_or(0, Vec::len);
        check_data(inputs, targets, dim, 2)?;
        assert!(restarts >= 1, "need at least one restart");
        let (std_targets, target_mean, target_std) = standardize(targets);
        let dist2 = pairwise_dist2(inputs, dim);

        // box in natural-log space; the noise floor is the lower bound
        let mut lo = vec![-5.0; dim + 2];
        let mut hi = vec![5.0; dim + 2];
        lo[dim + 1] = (1e-6f64).ln();
        hi[dim + 1] = 1.0;

        let starts: Vec<Vec<f64>> = (0..restarts)
            .map(|_| (0..dim + 2).map(|i| rng.random_range(lo[i]..hi[i])).collect())
            .collect();

        let objective_value = |log_theta: &[f64]| -> Option<f64> {
            let theta = theta_from_log(log_theta, dim);
            let e = corr_matrix(&dist2, &theta.lengthscales);
            factorize(&e, &theta, &std_targets).ok().map(|f| f.log_marginal)
        };
        let objective_grad = |log_theta: &[f64]| -> Option<(f64, Vec<f64>)> {
            let theta = theta_from_log(log_theta, dim);
            let e = corr_matrix(&dist2, &theta.lengthscales);
            let fact = factorize(&e, &theta, &std_targets).ok()?;
            let grad = lml_grad(&e, &dist2, &theta, &fact);
            Some((fact.log_marginal, grad))
        };

        let results = par::map_indexed(restarts, |r| {
            bfgs_box_maximize(&objective_value, &objective_grad, &starts[r], &lo, &hi, 80, 1e-5)
        });

        let mut best: Option<(Vec<f64>, f64)> = None;
        for candidate in results.into_iter().flatten() {
            if best.as_ref().is_none_or(|(_, v)| candidate.1 > *v) {
                best = Some(candidate);
            }
        }
        let Some((best_log_theta, _)) = best else {
            let last_theta = theta_from_log(&starts[restarts - 1], dim);
            let diagnostic =
                match factorize(&corr_matrix(&dist2, &last_theta.lengthscales), &last_theta, &std_targets) {
                    Ok(_) => "line search failed from every start".to_string(),
                    Err(e) => e.to_string(),
                };
            return Err(GpError::TrainingFailure { restarts, diagnostic });
        };

        let theta = theta_from_log(&best_log_theta, dim);
        let e = corr_matrix(&dist2, &theta.lengthscales);
        let fact = factorize(&e, &theta, &std_targets)?;
        Ok(Self {
            inputs: inputs.to_vec(),
            theta,
            l_factor: fact.chol.l(),
            alpha: fact.alpha,
            log_marginal: fact.log_marginal,
            jitter: fact.jitter,
            target_mean,
            target_std,
        })
    }

    /// Posterior predictive mean and std at `x`.
    ///
    /// `mu = kappa(x, X) alpha`; `sigma^2 = kappa(x,x) - ||L^-1 k||^2`,
    /// clamped at zero before the square root, then mapped back to the
    /// original target units.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction, GpError> {
        let dim = self.theta.input_dim();
        if x.len() != dim {
            return Err(GpError::DimensionMismatch { expected: dim, got: x.len() });
        }
        let n = self.inputs.len();
        let sf2 = self.theta.signal_std * self.theta.signal_std;
        let mut k = DVector::zeros(n);
        for (i, xi) in self.inputs.iter().enumerate() {
            let mut q = 0.0;
            for j in 0..dim {
                let d = x[j] - xi[j];
                let l = self.theta.lengthscales[j];
                q += (d * d) / (l * l);
            }
            k[i] = sf2 * (-0.5 * q).exp();
        }
        let mean_std_space = k.dot(&self.alpha);
        let v = self
            .l_factor
            .solve_lower_triangular(&k)
            .ok_or(GpError::NumericFailure { max_jitter: self.jitter })?;
        let var = (sf2 - v.dot(&v)).max(0.0);
        Ok(Prediction {
            mean: self.target_mean + self.target_std * mean_std_space,
            std: self.target_std * var.sqrt(),
        })
    }

    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.theta
    }

    pub fn log_marginal(&self) -> f64 {
        self.log_marginal
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn num_points(&self) -> usize {
        self.inputs.len()
    }

    pub fn target_mean(&self) -> f64 {
        self.target_mean
    }

    pub fn target_std(&self) -> f64 {
        self.target_std
    }

    /// Learned noise std in original target units.
    pub fn noise_std_output(&self) -> f64 {
        self.theta.noise_std * self.target_std
    }
}

fn check_data(
    inputs: &[Vec<f64>],
    targets: &[f64],
    dim: usize,
    min_points: usize,
) -> Result<(), GpError> {
    if inputs.len() < min_points {
        return Err(GpError::TooFewPoints { got: inputs.len(), need: min_points });
    }
    if inputs.len() != targets.len() {
        return Err(GpError::LengthMismatch { inputs: inputs.len(), targets: targets.len() });
    }
    for row in inputs {
        if row.len() != dim {
            return Err(GpError::DimensionMismatch { expected: dim, got: row.len() });
        }
    }
    Ok(())
}

fn standardize(targets: &[f64]) -> (DVector<f64>, f64, f64) {
    let n = targets.len() as f64;
    let mean = targets.iter().sum::<f64>() / n;
    let var = targets.iter().map(|&t| (t - mean) * (t - mean)).sum::<f64>() / n;
    let std = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
    let standardized = DVector::from_iterator(targets.len(), targets.iter().map(|&t| (t - mean) / std));
    (standardized, mean, std)
}

fn theta_from_log(log_theta: &[f64], dim: usize) -> Hyperparameters {
    Hyperparameters {
        signal_std: log_theta[0].exp(),
        lengthscales: log_theta[1..=dim].iter().map(|&v| v.exp()).collect(),
        noise_std: log_theta[dim + 1].exp(),
    }
}

/// Per-dimension squared-distance matrices.
fn pairwise_dist2(inputs: &[Vec<f64>], dim: usize) -> Vec<DMatrix<f64>> {
    let n = inputs.len();
    (0..dim)
        .map(|j| {
            DMatrix::from_fn(n, n, |r, c| {
                let d = inputs[r][j] - inputs[c][j];
                d * d
            })
        })
        .collect()
}

/// Correlation part `exp(-1/2 sum_j D_j / l_j^2)`; symmetric, unit diagonal.
fn corr_matrix(dist2: &[DMatrix<f64>], lengthscales: &[f64]) -> DMatrix<f64> {
    let n = dist2[0].nrows();
    let inv2: Vec<f64> = lengthscales.iter().map(|&l| 1.0 / (l * l)).collect();
    let mut e = DMatrix::zeros(n, n);
    for r in 0..n {
        e[(r, r)] = 1.0;
        for c in 0..r {
            let mut q = 0.0;
            for (j, m) in dist2.iter().enumerate() {
                q += m[(r, c)] * inv2[j];
            }
            let v = (-0.5 * q).exp();
            e[(r, c)] = v;
            e[(c, r)] = v;
        }
    }
    e
}

struct Factorized {
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    log_marginal: f64,
    jitter: f64,
}

/// Cholesky of `sigma_f^2 E + sigma_n^2 I (+ jitter I)`. The first attempt
/// uses no jitter; on failure the jitter starts at `1e-10 tr(K)/N` and
/// escalates tenfold up to `1e-4 tr(K)/N`.
fn factorize(
    e: &DMatrix<f64>,
    theta: &Hyperparameters,
    targets: &DVector<f64>,
) -> Result<Factorized, GpError> {
    let sf2 = theta.signal_std * theta.signal_std;
    let sn2 = theta.noise_std * theta.noise_std;
    let trace_scale = sf2 + sn2; // tr(K)/N: the correlation part has unit diagonal
    let mut jitter = 0.0;
    loop {
        if let Some(fact) = factorize_at(e, theta, targets, jitter) {
            return Ok(fact);
        }
        jitter = if jitter == 0.0 { 1e-10 * trace_scale } else { jitter * 10.0 };
        if jitter > 1e-4 * trace_scale {
            return Err(GpError::NumericFailure { max_jitter: 1e-4 * trace_scale });
        }
    }
}

fn factorize_at(
    e: &DMatrix<f64>,
    theta: &Hyperparameters,
    targets: &DVector<f64>,
    jitter: f64,
) -> Option<Factorized> {
    let n = e.nrows();
    let sf2 = theta.signal_std * theta.signal_std;
    let diag_add = theta.noise_std * theta.noise_std + jitter;
    let mut k = e * sf2;
    for i in 0..n {
        k[(i, i)] += diag_add;
    }
    let chol = Cholesky::new(k)?;
    let mut log_det_half = 0.0;
    for i in 0..n {
        let l_ii = chol.l_dirty()[(i, i)];
        if !(l_ii > 0.0) || !l_ii.is_finite() {
            return None;
        }
        log_det_half += l_ii.ln();
    }
    let alpha = chol.solve(targets);
    let quad = targets.dot(&alpha);
    let log_marginal = -0.5 * quad - log_det_half - 0.5 * n as f64 * LN_2PI;
    if !log_marginal.is_finite() {
        return None;
    }
    Some(Factorized { chol, alpha, log_marginal, jitter })
}

/// Gradient of the log marginal likelihood over log-hyperparameters:
/// `dL/dtheta = 1/2 tr((alpha alpha^T - K^-1) dK/dtheta)` with
/// `dK/dln sigma_f = 2 sigma_f^2 E`, `dK/dln l_j = sigma_f^2 E . D_j / l_j^2`,
/// `dK/dln sigma_n = 2 sigma_n^2 I`.
fn lml_grad(
    e: &DMatrix<f64>,
    dist2: &[DMatrix<f64>],
    theta: &Hyperparameters,
    fact: &Factorized,
) -> Vec<f64> {
    let n = e.nrows();
    let dim = dist2.len();
    let k_inv = fact.chol.inverse();
    let sf2 = theta.signal_std * theta.signal_std;
    let sn2 = theta.noise_std * theta.noise_std;

    let mut acc_sf = 0.0;
    let mut acc_l = vec![0.0; dim];
    let mut trace_b = 0.0;
    for r in 0..n {
        for c in 0..n {
            let b = fact.alpha[r] * fact.alpha[c] - k_inv[(r, c)];
            let be = b * e[(r, c)];
            acc_sf += be;
            for (j, m) in dist2.iter().enumerate() {
                acc_l[j] += be * m[(r, c)];
            }
            if r == c {
                trace_b += b;
            }
        }
    }

    let mut grad = Vec::with_capacity(dim + 2);
    grad.push(sf2 * acc_sf);
    for j in 0..dim {
        let l = theta.lengthscales[j];
        grad.push(0.5 * sf2 * acc_l[j] / (l * l));
    }
    grad.push(sn2 * trace_b);
    grad
}
