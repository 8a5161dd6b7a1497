//! Scalar standard-normal helpers shared by the surrogate and distribution code.
//!
//! The only non-trivial piece is `norm_log_cdf`, which switches to the
//! asymptotic Mills-ratio expansion once the direct `ln(Φ(t))` route would
//! lose accuracy in the lower tail.

use statrs::function::erf::erfc;

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_5;
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Standard normal density φ(t).
#[inline]
pub fn norm_pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / SQRT_2PI
}

/// ln φ(t).
#[inline]
pub fn norm_log_pdf(t: f64) -> f64 {
    -0.5 * t * t - LN_SQRT_2PI
}

/// Standard normal CDF Φ(t).
#[inline]
pub fn norm_cdf(t: f64) -> f64 {
    0.5 * erfc(-t / SQRT_2)
}

/// ln Φ(t), safe for arbitrarily negative t.
///
/// Below t = -8 the complementary-error-function route is replaced by the
/// Mills-ratio series ln Φ(t) = ln φ(t) - ln(-t) + ln(1 - 1/t² + 3/t⁴ - ...),
/// truncated where the terms stop improving for |t| ≥ 8.
pub fn norm_log_cdf(t: f64) -> f64 {
    if t >= -8.0 {
        norm_cdf(t).ln()
    } else {
        let r = 1.0 / (t * t);
        let series = 1.0
            + r * (-1.0 + r * (3.0 + r * (-15.0 + r * (105.0 + r * (-945.0 + r * 10395.0)))));
        norm_log_pdf(t) - (-t).ln() + series.ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pdf_at_zero_is_inverse_sqrt_2pi() {
        assert!((norm_pdf(0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
    }

    #[test]
    fn cdf_symmetry_and_midpoint() {
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-15);
        for &t in &[0.3, 1.0, 2.5, 4.0] {
            assert!((norm_cdf(t) + norm_cdf(-t) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn log_cdf_matches_direct_route_above_switch() {
        for &t in &[-7.9, -5.0, -2.0, 0.0, 1.5, 6.0] {
            assert!((norm_log_cdf(t) - norm_cdf(t).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn log_cdf_continuous_at_switch() {
        let lo = norm_log_cdf(-8.0 - 1e-9);
        let hi = norm_log_cdf(-8.0 + 1e-9);
        assert!((lo - hi).abs() < 1e-6, "seam jump: {lo} vs {hi}");
    }

    #[test]
    fn log_cdf_deep_tail_is_finite_and_ordered() {
        let mut prev = norm_log_cdf(-8.0);
        for &t in &[-10.0, -15.0, -25.0, -40.0, -100.0, -1e4] {
            let v = norm_log_cdf(t);
            assert!(v.is_finite());
            assert!(v < prev, "log CDF must decrease towards -inf");
            prev = v;
        }
        // reference value: ln Φ(-10) = -53.23128515051247 (high-precision quadrature)
        assert!((norm_log_cdf(-10.0) - (-53.231_285_150_512_47)).abs() < 1e-8);
    }
}
