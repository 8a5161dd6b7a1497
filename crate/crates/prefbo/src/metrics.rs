//! Performance reporting: the front point nearest a reference point in ASF
//! terms, ASF distances to it, and nondominated filtering.

use crate::problems::FrontSample;
use crate::scalarize::PreferenceSpec;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("front sample is empty")]
    EmptyFront,
    #[error("objective dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// The front point minimising the ASF for a given preference; the
/// convergence target of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RefSolution {
    pub objectives: Vec<f64>,
    pub asf: f64,
}

/// Exhaustive ASF argmin over a front sample, ties broken by lowest index.
pub fn ref_solution(
    front: &FrontSample,
    pref: &PreferenceSpec,
) -> Result<RefSolution, MetricsError> {
    let mut best: Option<(usize, f64)> = None;
    for (i, point) in front.points.iter().enumerate() {
        if point.len() != pref.objective_dim() {
            return Err(MetricsError::DimensionMismatch(point.len(), pref.objective_dim()));
        }
        let g = pref.asf(point);
        if best.is_none_or(|(_, b)| g < b) {
            best = Some((i, g));
        }
    }
    let (idx, asf) = best.ok_or(MetricsError::EmptyFront)?;
    Ok(RefSolution { objectives: front.points[idx].clone(), asf })
}

/// `|asf(f) - asf(ref solution)|`, the per-evaluation performance indicator.
pub fn asf_distance(objectives: &[f64], reference: &RefSolution, pref: &PreferenceSpec) -> f64 {
    (pref.asf(objectives) - reference.asf).abs()
}

/// Keep exactly the points not dominated by any other (minimisation;
/// dominance is <= everywhere and < somewhere). Stable order, duplicates
/// retained.
pub fn nondominated_filter(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    nondominated_indices(points).into_iter().map(|i| points[i].clone()).collect()
}

/// Indices of the nondominated points, in input order.
pub fn nondominated_indices(points: &[Vec<f64>]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| {
            !points.iter().enumerate().any(|(j, other)| {
                j != i
                    && other.iter().zip(&points[i]).all(|(a, b)| a <= b)
                    && other.iter().zip(&points[i]).any(|(a, b)| a < b)
            })
        })
        .collect()
}
