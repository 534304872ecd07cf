//! Threshold PPS: include item `i` with probability `min(1, tau * w_i)`,
//! where `tau` solves `n = sum_i min(1, tau * w_i)`.
//!
//! This is the usual fixed-size scheme. It always yields `min(n, N)` items in
//! expectation, but heavy items clip at probability one and the ratio
//! `p_i / p_j` no longer equals `w_i / w_j`. Offline only: `tau` needs every
//! weight.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdSolution {
    pub tau: f64,
    pub weights: Vec<f64>,
    /// `min(1, tau * w_i)`, aligned with `weights`.
    pub inclusion: Vec<f64>,
}

impl ThresholdSolution {
    pub fn expected_size(&self) -> f64 {
        self.inclusion.iter().sum()
    }

    /// Number of items whose probability clipped to one while `tau * w_i > 1`
    /// strictly, i.e. the items that break exact proportionality.
    pub fn clipped(&self) -> usize {
        self.weights.iter().filter(|&&w| self.tau * w > 1.0).count()
    }
}

/// Solves for `tau` by scanning the breakpoints of the piecewise-linear map
/// `tau -> sum_i min(1, tau * w_i)` from the heaviest weight down.
pub fn solve_tau(weights: &[f64], n: usize) -> Result<ThresholdSolution> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    if weights.is_empty() {
        return Err(Error::InvalidParameter("no weights".into()));
    }
    if let Some(&w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidWeight(w));
    }

    let tau = if weights.len() <= n {
        let min = weights.iter().copied().fold(f64::INFINITY, f64::min);
        1.0 / min
    } else {
        let mut sorted = weights.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        // suffix[k] = sum of sorted[k..]
        let mut suffix = vec![0.0; sorted.len() + 1];
        for k in (0..sorted.len()).rev() {
            suffix[k] = suffix[k + 1] + sorted[k];
        }
        // With the k heaviest items clipped, tau = (n - k) / suffix[k]. It is
        // consistent when the heaviest unclipped item stays at or below one.
        let mut tau = None;
        for k in 0..n {
            let candidate = (n - k) as f64 / suffix[k];
            let heaviest_unclipped_ok = candidate * sorted[k] <= 1.0;
            let lightest_clipped_ok = k == 0 || candidate * sorted[k - 1] >= 1.0;
            if heaviest_unclipped_ok && lightest_clipped_ok {
                tau = Some(candidate);
                break;
            }
        }
        tau.expect("a breakpoint with fewer than n clipped items always exists when N > n")
    };

    let inclusion = weights.iter().map(|&w| (tau * w).min(1.0)).collect();
    Ok(ThresholdSolution {
        tau,
        weights: weights.to_vec(),
        inclusion,
    })
}

/// `max_{i,j} |(p_i / p_j) (w_j / w_i) - 1|`, which is `r_max / r_min - 1`
/// for `r_i = p_i / w_i`. Zero exactly when the solution is proportional.
pub fn pps_violation(solution: &ThresholdSolution) -> f64 {
    let ratios = solution
        .inclusion
        .iter()
        .zip(&solution.weights)
        .map(|(p, w)| p / w);
    let (lo, hi) = ratios.fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
    if lo.is_infinite() {
        return 0.0;
    }
    (hi / lo - 1.0).max(0.0)
}
