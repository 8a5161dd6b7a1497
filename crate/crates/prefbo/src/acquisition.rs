//! Expected-improvement acquisition functions.
//!
//! Three flavours over a minimisation incumbent: the closed form under a
//! Gaussian posterior, a Monte-Carlo estimate under a fitted Gumbel, and the
//! closed form applied to a Laplace-Gaussianised density.

use crate::asf_dist::{Gumbel, LaplaceFit};
use crate::stats::{norm_cdf, norm_pdf};
use rand::Rng;

/// Best (minimum) scalarised value among evaluated points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incumbent {
    best: f64,
}

impl Incumbent {
    pub fn new() -> Self {
        Self { best: f64::INFINITY }
    }

    pub fn from_values<I: IntoIterator<Item = f64>>(values: I) -> Self {
        let mut inc = Self::new();
        for v in values {
            inc.observe(v);
        }
        inc
    }

    pub fn observe(&mut self, value: f64) {
        if value < self.best {
            self.best = value;
        }
    }

    pub fn value(&self) -> f64 {
        self.best
    }
}

impl Default for Incumbent {
    fn default() -> Self {
        Self::new()
    }
}

/// Closed-form EI for a Gaussian posterior, minimisation:
/// `(best - mu) Phi(u) + sigma phi(u)`, `u = (best - mu)/sigma`.
/// Degenerates to `max(0, best - mu)` at `sigma = 0`.
pub fn expected_improvement(mean: f64, std: f64, best: f64) -> f64 {
    debug_assert!(std >= 0.0, "negative predictive std");
    if std > 0.0 {
        let u = (best - mean) / std;
        ((best - mean) * norm_cdf(u) + std * norm_pdf(u)).max(0.0)
    } else {
        (best - mean).max(0.0)
    }
}

/// Monte-Carlo EI under a Gumbel: `mean_j max(0, best - g_j)`.
pub fn expected_improvement_mc<R: Rng + ?Sized>(
    dist: &Gumbel,
    best: f64,
    n_mc: usize,
    rng: &mut R,
) -> f64 {
    assert!(n_mc >= 1);
    let sum: f64 = dist
        .sample(n_mc, rng)
        .into_iter()
        .map(|g| (best - g).max(0.0))
        .sum();
    sum / n_mc as f64
}

/// Monte-Carlo EI on fixed standard-Gumbel base draws (`-ln(-ln u)`).
///
/// Reusing one base across every candidate of an inner optimisation makes
/// the acquisition surface a deterministic function of the fitted
/// parameters (common random numbers).
pub fn expected_improvement_mc_crn(dist: &Gumbel, best: f64, base: &[f64]) -> f64 {
    assert!(!base.is_empty());
    let sum: f64 = base
        .iter()
        .map(|&e| (best - (dist.location + dist.scale * e)).max(0.0))
        .sum();
    sum / base.len() as f64
}

/// Standard-Gumbel base draws for [`expected_improvement_mc_crn`].
pub fn gumbel_base_draws<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<f64> {
    Gumbel { location: 0.0, scale: 1.0 }.sample(count, rng)
}

/// Closed-form EI of the Laplace approximation `N(mode, 1/curvature)`.
pub fn expected_improvement_laplace(fit: &LaplaceFit, best: f64) -> f64 {
    expected_improvement(fit.mode, fit.std(), best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asf_dist::MaxOfGaussians;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn closed_form_at_incumbent_equals_sigma_phi_zero() {
        assert!((expected_improvement(0.0, 1.0, 0.0) - 0.398_942_280_401_432_7).abs() < 1e-12);
    }

    #[test]
    fn closed_form_deterministic_limits() {
        assert_eq!(expected_improvement(-1.0, 0.0, 0.0), 1.0);
        assert_eq!(expected_improvement(1.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn closed_form_increasing_in_std_at_incumbent() {
        let mut prev = expected_improvement(0.3, 1e-6, 0.3);
        for &s in &[0.1, 0.5, 1.0, 2.0, 10.0] {
            let v = expected_improvement(0.3, s, 0.3);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn mc_is_zero_when_no_mass_below_incumbent() {
        let q = Gumbel::new(0.0, 1.0).unwrap();
        let base = {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            gumbel_base_draws(10_000, &mut rng)
        };
        let best = q.location - 50.0 * q.scale;
        assert!(expected_improvement_mc_crn(&q, best, &base) <= 1e-12);
    }

    #[test]
    fn mc_monotone_in_incumbent_with_fixed_base() {
        let q = Gumbel::new(0.4, 1.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let base = gumbel_base_draws(2_000, &mut rng);
        let mut prev = 0.0;
        let mut best = -3.0;
        while best <= 3.0 {
            let v = expected_improvement_mc_crn(&q, best, &base);
            assert!(v >= prev);
            prev = v;
            best += 0.25;
        }
    }

    #[test]
    fn mc_with_rng_matches_crn_path_in_expectation() {
        let q = Gumbel::new(0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let direct = expected_improvement_mc(&q, 0.5, 200_000, &mut rng);
        let mut rng2 = ChaCha8Rng::seed_from_u64(4);
        let base = gumbel_base_draws(200_000, &mut rng2);
        let crn = expected_improvement_mc_crn(&q, 0.5, &base);
        assert!((direct - crn).abs() < 0.02, "{direct} vs {crn}");
    }

    #[test]
    fn laplace_ei_on_single_gaussian_equals_closed_form() {
        let p = MaxOfGaussians::new(vec![0.4], vec![0.7]).unwrap();
        let fit = p.laplace_fit().unwrap();
        for &best in &[-1.0, 0.0, 0.4, 2.5] {
            let lhs = expected_improvement_laplace(&fit, best);
            let rhs = expected_improvement(0.4, 0.7, best);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn laplace_ei_point_mass_limit() {
        let fit = LaplaceFit { mode: 0.2, curvature: 1e18 };
        let v = expected_improvement_laplace(&fit, 1.2);
        assert!((v - 1.0).abs() < 1e-6);
    }

    #[test]
    fn all_variants_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let base = gumbel_base_draws(500, &mut rng);
        for _ in 0..200 {
            let mean = rng.random_range(-5.0..5.0);
            let std = rng.random_range(0.0..3.0);
            let best = rng.random_range(-5.0..5.0);
            assert!(expected_improvement(mean, std, best) >= 0.0);
            let q = Gumbel::new(mean, std.max(0.05)).unwrap();
            assert!(expected_improvement_mc_crn(&q, best, &base) >= 0.0);
            let fit = LaplaceFit { mode: mean, curvature: 1.0 / std.max(0.05).powi(2) };
            assert!(expected_improvement_laplace(&fit, best) >= 0.0);
        }
    }

    #[test]
    fn incumbent_tracks_minimum() {
        let inc = Incumbent::from_values([3.0, 1.0, 2.0]);
        assert_eq!(inc.value(), 1.0);
    }
}
