//! Distribution of the scalarised objective under independent Gaussian
//! posteriors.
//!
//! With one Gaussian posterior per objective, the ASF value at a candidate
//! point is the maximum of m shifted/scaled Gaussians `N(m_i, s_i^2)` with
//! `m_i = w_i (mu_i - z*_i)` and `s_i = w_i sigma_i`. That maximum is not
//! Gaussian; its exact density is
//!
//! `p(g) = [ sum_i phi(t_i) / (s_i Phi(t_i)) ] * prod_i Phi(t_i)`,
//! `t_i = (g - m_i) / s_i`,
//!
//! and its CDF is `prod_i Phi(t_i)`. This module evaluates that density in
//! log space, draws from it, fits a max-oriented Gumbel to samples by
//! maximum likelihood, and fits a Gaussian at the mode (Laplace
//! approximation) via safeguarded Newton iterations.

use crate::scalarize::PreferenceSpec;
use crate::stats::{norm_log_cdf, norm_log_pdf};
use rand::Rng;
use rand_distr::{Distribution, Open01, StandardNormal};
use thiserror::Error;

/// Floor applied to posterior standard deviations before scaling, so the
/// per-component scales stay strictly positive at evaluated training points.
pub const STD_FLOOR: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("component list is empty")]
    Empty,
    #[error("component {index} has non-positive scale {value}")]
    NonPositiveScale { index: usize, value: f64 },
    #[error("means/stds length mismatch: {means} vs {stds}")]
    LengthMismatch { means: usize, stds: usize },
    #[error("parameters must be finite")]
    NonFinite,
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { got: usize, need: usize },
    #[error("samples have zero variance")]
    DegenerateSamples,
    #[error("Gumbel fixed point did not converge (residual {residual:e})")]
    GumbelNoConvergence { residual: f64 },
    #[error("Laplace mode search did not converge")]
    LaplaceNoConvergence,
    #[error("invalid Gumbel parameters: location {location}, scale {scale}")]
    InvalidGumbel { location: f64, scale: f64 },
}

/// Parameters of a max of independent Gaussians: `max_i N(m_i, s_i^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxOfGaussians {
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl MaxOfGaussians {
    pub fn new(means: Vec<f64>, stds: Vec<f64>) -> Result<Self, DistError> {
        if means.is_empty() {
            return Err(DistError::Empty);
        }
        if means.len() != stds.len() {
            return Err(DistError::LengthMismatch { means: means.len(), stds: stds.len() });
        }
        if means.iter().chain(stds.iter()).any(|v| !v.is_finite()) {
            return Err(DistError::NonFinite);
        }
        for (index, &s) in stds.iter().enumerate() {
            if s <= 0.0 {
                return Err(DistError::NonPositiveScale { index, value: s });
            }
        }
        Ok(Self { means, stds })
    }

    /// Shift and scale per-objective posterior moments into the scalarised
    /// space of `pref`: `m_i = w_i (mu_i - z*_i)`, `s_i = w_i max(sigma_i, floor)`.
    pub fn from_posterior(
        means: &[f64],
        stds: &[f64],
        pref: &PreferenceSpec,
    ) -> Result<Self, DistError> {
        if means.len() != pref.objective_dim() || stds.len() != means.len() {
            return Err(DistError::LengthMismatch { means: means.len(), stds: stds.len() });
        }
        let w = pref.weights();
        let z = pref.reference_point();
        let shifted: Vec<f64> = (0..means.len()).map(|i| w[i] * (means[i] - z[i])).collect();
        let scaled: Vec<f64> = (0..stds.len()).map(|i| w[i] * stds[i].max(STD_FLOOR)).collect();
        Self::new(shifted, scaled)
    }

    pub fn num_components(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    /// ln p(g), evaluated as
    /// `logsumexp_i(ln phi(t_i) - ln Phi(t_i) - ln s_i) + sum_i ln Phi(t_i)`.
    pub fn log_pdf(&self, g: f64) -> f64 {
        let mut log_cdf_sum = 0.0;
        let mut max_term = f64::NEG_INFINITY;
        let m = self.means.len();
        let mut terms = Vec::with_capacity(m);
        for i in 0..m {
            let t = (g - self.means[i]) / self.stds[i];
            let lcdf = norm_log_cdf(t);
            let term = norm_log_pdf(t) - lcdf - self.stds[i].ln();
            log_cdf_sum += lcdf;
            if term > max_term {
                max_term = term;
            }
            terms.push(term);
        }
        if !max_term.is_finite() {
            return f64::NEG_INFINITY;
        }
        let sum: f64 = terms.iter().map(|&t| (t - max_term).exp()).sum();
        max_term + sum.ln() + log_cdf_sum
    }

    /// p(g); underflows to 0 in the far tails.
    pub fn pdf(&self, g: f64) -> f64 {
        self.log_pdf(g).exp()
    }

    /// Exact CDF `prod_i Phi(t_i)`.
    pub fn cdf(&self, g: f64) -> f64 {
        let log_cdf: f64 = self
            .means
            .iter()
            .zip(&self.stds)
            .map(|(&m, &s)| norm_log_cdf((g - m) / s))
            .sum();
        log_cdf.exp()
    }

    /// Draw `count` realisations of the maximum.
    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<f64> {
        (0..count)
            .map(|_| {
                self.means
                    .iter()
                    .zip(&self.stds)
                    .map(|(&m, &s)| m + s * rng.sample::<f64, _>(StandardNormal))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }

    /// Evaluate the maximum on pre-drawn standard normals, one row of
    /// `num_components` values per draw. Used for common-random-number
    /// acquisition surfaces: the same base draws make the result a pure
    /// function of the parameters.
    pub fn sample_with_normals(&self, normals: &[f64]) -> Vec<f64> {
        let m = self.means.len();
        assert!(
            !normals.is_empty() && normals.len() % m == 0,
            "base normal count must be a positive multiple of the component count"
        );
        normals
            .chunks_exact(m)
            .map(|row| {
                let mut best = f64::NEG_INFINITY;
                for i in 0..m {
                    let v = self.means[i] + self.stds[i] * row[i];
                    if v > best {
                        best = v;
                    }
                }
                best
            })
            .collect()
    }

    /// First and second derivatives of `ln p` at `g`.
    ///
    /// With `h_i = phi(t_i)/(s_i Phi(t_i))` (the derivative of `ln Phi(t_i)`):
    /// `(ln p)'  = S1/S0 + S0` and `(ln p)'' = S2/S0 - (S1/S0)^2 + S1`,
    /// where `S0 = sum h_i`, `S1 = sum h_i'`, `S2 = sum h_i''`, and
    /// `h_i' = -h_i (t_i/s_i + h_i)`. The sums are normalised through
    /// log-sum-exp so the ratios survive when every `h_i` underflows.
    pub fn log_pdf_derivs(&self, g: f64) -> (f64, f64) {
        let m = self.means.len();
        let mut log_h = Vec::with_capacity(m);
        let mut t_over_s = Vec::with_capacity(m);
        let mut inv_s2 = Vec::with_capacity(m);
        let mut max_log_h = f64::NEG_INFINITY;
        for i in 0..m {
            let s = self.stds[i];
            let t = (g - self.means[i]) / s;
            let lh = norm_log_pdf(t) - norm_log_cdf(t) - s.ln();
            if lh > max_log_h {
                max_log_h = lh;
            }
            log_h.push(lh);
            t_over_s.push(t / s);
            inv_s2.push(1.0 / (s * s));
        }
        let weight_sum: f64 = log_h.iter().map(|&lh| (lh - max_log_h).exp()).sum();
        let log_s0 = max_log_h + weight_sum.ln();
        let s0 = log_s0.exp();
        let mut mean_r = 0.0; // S1/S0
        let mut mean_q = 0.0; // S2/S0
        for i in 0..m {
            let nu = (log_h[i] - log_s0).exp();
            let h = log_h[i].exp();
            let r = -(t_over_s[i] + h);
            mean_r += nu * r;
            mean_q += nu * (r * r - inv_s2[i] - h * r);
        }
        let d1 = mean_r + s0;
        let d2 = mean_q - mean_r * mean_r + s0 * mean_r;
        (d1, d2)
    }

    /// Gaussian approximation at the mode: `N(g0, 1/A)` with
    /// `A = -(ln p)''(g0)`.
    ///
    /// Newton iterations bracketed by bisection inside
    /// `[min m_i - 6 max s_i, max m_i + 6 max s_i]`, started from every
    /// component mean; the density can be multimodal when a narrow component
    /// sits below a broad one, so the best stationary point by density wins.
    pub fn laplace_fit(&self) -> Result<LaplaceFit, DistError> {
        let max_s = self.stds.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = self.means.iter().cloned().fold(f64::INFINITY, f64::min) - 6.0 * max_s;
        let hi = self.means.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 6.0 * max_s;
        let mut best: Option<(f64, LaplaceFit)> = None;
        for &start in &self.means {
            if let Some((mode, d2)) = self.newton_mode(start, lo, hi) {
                let fit = LaplaceFit { mode, curvature: -d2 };
                let value = self.log_pdf(mode);
                if best.as_ref().is_none_or(|(v, _)| value > *v) {
                    best = Some((value, fit));
                }
            }
        }
        best.map(|(_, fit)| fit).ok_or(DistError::LaplaceNoConvergence)
    }

    fn newton_mode(&self, start: f64, mut lo: f64, mut hi: f64) -> Option<(f64, f64)> {
        let mut g = start.clamp(lo, hi);
        for _ in 0..100 {
            let (d1, d2) = self.log_pdf_derivs(g);
            if !d1.is_finite() || !d2.is_finite() {
                return None;
            }
            if d1.abs() < 1e-10 {
                return (d2 < 0.0).then_some((g, d2));
            }
            // d1 > 0 left of a local max, < 0 right of it
            if d1 > 0.0 {
                lo = g;
            } else {
                hi = g;
            }
            let newton = g - d1 / d2;
            g = if d2 < 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= f64::EPSILON * g.abs().max(1.0) {
                // bracket exhausted at floating-point resolution
                let (_, d2_final) = self.log_pdf_derivs(g);
                return (d2_final < 0.0).then_some((g, d2_final));
            }
        }
        None
    }
}

/// Max-oriented Gumbel distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gumbel {
    pub location: f64,
    pub scale: f64,
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SQRT6_OVER_PI: f64 = 0.779_696_801_233_676_1;

impl Gumbel {
    pub fn new(location: f64, scale: f64) -> Result<Self, DistError> {
        if !(scale > 0.0) || !scale.is_finite() || !location.is_finite() {
            return Err(DistError::InvalidGumbel { location, scale });
        }
        Ok(Self { location, scale })
    }

    /// Maximum-likelihood fit. The scale solves the stationarity condition
    ///
    /// `beta = mean(g) - sum_i g_i e^{-g_i/beta} / sum_i e^{-g_i/beta}`
    ///
    /// by damped fixed-point iteration (exponentials shifted by the sample
    /// minimum), falling back to bisection on the residual; then
    /// `alpha = -beta ln( mean_i e^{-g_i/beta} )`.
    pub fn fit(samples: &[f64]) -> Result<Self, DistError> {
        let n = samples.len();
        if n < 10 {
            return Err(DistError::TooFewSamples { got: n, need: 10 });
        }
        let nf = n as f64;
        let mean = samples.iter().sum::<f64>() / nf;
        let var = samples.iter().map(|&g| (g - mean) * (g - mean)).sum::<f64>() / nf;
        let std = var.sqrt();
        if !(std > 0.0) || !std.is_finite() || !mean.is_finite() {
            return Err(DistError::DegenerateSamples);
        }
        let shift = samples.iter().cloned().fold(f64::INFINITY, f64::min);
        let fixed_point = |beta: f64| -> f64 {
            let mut wsum = 0.0;
            let mut wgsum = 0.0;
            for &g in samples {
                let w = (-(g - shift) / beta).exp();
                wsum += w;
                wgsum += w * g;
            }
            mean - wgsum / wsum
        };

        // method-of-moments start
        let mut beta = std * SQRT6_OVER_PI;
        let mut damping = 1.0;
        let mut prev_step = f64::INFINITY;
        let mut converged = false;
        let mut residual = f64::INFINITY;
        for _ in 0..200 {
            let target = fixed_point(beta);
            let step = target - beta;
            residual = step.abs();
            if residual < 1e-8 * beta.abs().max(1.0) {
                beta = target;
                converged = true;
                break;
            }
            if residual >= prev_step {
                damping *= 0.5;
            }
            prev_step = residual;
            let mut next = beta + damping * step;
            while next <= 0.0 && damping > 1e-12 {
                damping *= 0.5;
                next = beta + damping * step;
            }
            if next <= 0.0 {
                break;
            }
            beta = next;
        }
        if !converged {
            beta = bisect_scale(&fixed_point, std)
                .ok_or(DistError::GumbelNoConvergence { residual })?;
        }

        let weight_mean =
            samples.iter().map(|&g| (-(g - shift) / beta).exp()).sum::<f64>() / nf;
        let location = shift - beta * weight_mean.ln();
        Self::new(location, beta)
    }

    /// Density `(1/beta) e^{-(t + e^{-t})}`, `t = (g - location)/scale`.
    pub fn pdf(&self, g: f64) -> f64 {
        let t = (g - self.location) / self.scale;
        (-(t + (-t).exp())).exp() / self.scale
    }

    /// CDF `e^{-e^{-t}}`.
    pub fn cdf(&self, g: f64) -> f64 {
        let t = (g - self.location) / self.scale;
        (-(-t).exp()).exp()
    }

    /// Inverse CDF: `location - scale * ln(-ln u)` for `u` in (0,1).
    pub fn quantile(&self, u: f64) -> f64 {
        self.location - self.scale * (-u.ln()).ln()
    }

    /// Inverse-CDF sampling on Uniform(0,1) draws.
    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<f64> {
        (0..count).map(|_| self.quantile(Open01.sample(rng))).collect()
    }

    pub fn mean(&self) -> f64 {
        self.location + EULER_GAMMA * self.scale
    }
}

fn bisect_scale(residual: &impl Fn(f64) -> f64, scale_hint: f64) -> Option<f64> {
    let r = |b: f64| residual(b) - b;
    let grid: Vec<f64> = (0..=48)
        .map(|i| scale_hint * 10f64.powf(-6.0 + 0.25 * i as f64))
        .collect();
    let mut bracket = None;
    for pair in grid.windows(2) {
        if r(pair[0]) > 0.0 && r(pair[1]) <= 0.0 {
            bracket = Some((pair[0], pair[1]));
            break;
        }
    }
    let (mut lo, mut hi) = bracket?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if r(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Gaussian approximation `N(mode, 1/curvature)` of a log-density at its mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceFit {
    pub mode: f64,
    pub curvature: f64,
}

impl LaplaceFit {
    pub fn std(&self) -> f64 {
        1.0 / self.curvature.sqrt()
    }
}
