//! Achievement scalarising function (ASF) with reference-point preferences.
//!
//! The ASF maps an objective vector to `max_i w_i (f_i - z*_i)` where `z*` is
//! the decision-maker's desirable objective vector and the weights normalise
//! each objective by its ideal-nadir range. With `z* = ideal` this is the
//! weighted Tchebycheff function; an optional augmentation term
//! `rho * sum_i w_i (f_i - z*_i)` turns it into the augmented form.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalarizeError {
    #[error("objective {index}: nadir ({nadir}) must exceed ideal ({ideal})")]
    DegenerateBounds { index: usize, ideal: f64, nadir: f64 },
    #[error("need at least 2 objectives, got {0}")]
    TooFewObjectives(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("augmentation must be finite and nonnegative, got {0}")]
    InvalidAugmentation(f64),
}

/// Normalisation weights `w_i = 1 / (nadir_i - ideal_i)`.
pub fn weights_from_bounds(ideal: &[f64], nadir: &[f64]) -> Result<Vec<f64>, ScalarizeError> {
    if ideal.len() != nadir.len() {
        return Err(ScalarizeError::DimensionMismatch(ideal.len(), nadir.len()));
    }
    ideal
        .iter()
        .zip(nadir)
        .enumerate()
        .map(|(index, (&lo, &hi))| {
            if hi > lo {
                Ok(1.0 / (hi - lo))
            } else {
                Err(ScalarizeError::DegenerateBounds { index, ideal: lo, nadir: hi })
            }
        })
        .collect()
}

/// A reference point together with the objective bounds that normalise it.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceSpec {
    reference_point: Vec<f64>,
    ideal: Vec<f64>,
    nadir: Vec<f64>,
    weights: Vec<f64>,
    augmentation: f64,
}

impl PreferenceSpec {
    /// Build a preference from a reference point and ideal/nadir bounds.
    /// Weights are derived from the bounds; augmentation defaults to 0.
    pub fn new(
        reference_point: Vec<f64>,
        ideal: Vec<f64>,
        nadir: Vec<f64>,
    ) -> Result<Self, ScalarizeError> {
        let m = reference_point.len();
        if m < 2 {
            return Err(ScalarizeError::TooFewObjectives(m));
        }
        if ideal.len() != m || nadir.len() != m {
            return Err(ScalarizeError::DimensionMismatch(ideal.len().min(nadir.len()), m));
        }
        let weights = weights_from_bounds(&ideal, &nadir)?;
        Ok(Self { reference_point, ideal, nadir, weights, augmentation: 0.0 })
    }

    pub fn with_augmentation(mut self, rho: f64) -> Result<Self, ScalarizeError> {
        if !rho.is_finite() || rho < 0.0 {
            return Err(ScalarizeError::InvalidAugmentation(rho));
        }
        self.augmentation = rho;
        Ok(self)
    }

    pub fn objective_dim(&self) -> usize {
        self.reference_point.len()
    }

    pub fn reference_point(&self) -> &[f64] {
        &self.reference_point
    }

    pub fn ideal(&self) -> &[f64] {
        &self.ideal
    }

    pub fn nadir(&self) -> &[f64] {
        &self.nadir
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn augmentation(&self) -> f64 {
        self.augmentation
    }

    /// ASF value `max_i w_i (f_i - z*_i) [+ rho * sum_i w_i (f_i - z*_i)]`.
    ///
    /// The reference point may lie anywhere in objective space; no clipping.
    pub fn asf(&self, objectives: &[f64]) -> f64 {
        assert_eq!(
            objectives.len(),
            self.reference_point.len(),
            "objective vector dimension mismatch"
        );
        let mut max_term = f64::NEG_INFINITY;
        for i in 0..objectives.len() {
            let term = self.weights[i] * (objectives[i] - self.reference_point[i]);
            if term > max_term {
                max_term = term;
            }
        }
        if self.augmentation == 0.0 {
            return max_term;
        }
        let sum: f64 = (0..objectives.len())
            .map(|i| self.weights[i] * (objectives[i] - self.reference_point[i]))
            .sum();
        max_term + self.augmentation * sum
    }
}
