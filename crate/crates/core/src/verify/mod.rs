//! Verification harness.
//!
//! * [`monte_carlo_inclusion`] runs many independent samplers and compares
//!   empirical inclusion frequencies and sample sizes with the closed form
//!   `rho_t * w_i`.
//! * [`oracle`] enumerates every random branch of the algorithms with exact
//!   rational arithmetic.
//! * [`enumerate`] replays the real implementation over every decision path
//!   of a scripted random source.
//! * [`branches`] drives each case of downsampling and union.
//!
//! Statistical checks use a 4-sigma band. Seeds are pinned by the caller, so
//! a given report is reproducible bit for bit.

pub mod branches;
pub mod enumerate;
pub mod oracle;

use std::collections::BTreeMap;
use std::fmt::Display;

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::latent::{check_weight, normalize_size, WeightedItem};
use crate::rng::derive_seed;
use crate::sampler::{Sampler, SamplerConfig};

pub use branches::{branch_coverage_suite, BranchCase, BranchCoverageReport};
pub use oracle::{exhaustive_oracle, OracleResult};

pub const REPORT_VERSION: u32 = 1;

/// Width of the acceptance band in standard errors.
pub const SIGMAS: f64 = 4.0;

/// Absorbs float representation error in closed-form probabilities such as
/// `(1 / w) * w`.
const FLOAT_SLACK: f64 = 1e-12;

/// `SIGMAS * sqrt(p (1 - p) / trials)`.
pub fn binomial_tolerance(p: f64, trials: u64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    SIGMAS * (p * (1.0 - p) / trials as f64).sqrt()
}

/// One compared quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub check: String,
    pub expected: f64,
    pub observed: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Two-sided normal-approximation p-value, for statistical checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
}

impl Check {
    pub fn within(check: impl Into<String>, expected: f64, observed: f64, tolerance: f64) -> Self {
        Self {
            check: check.into(),
            expected,
            observed,
            tolerance,
            pass: (observed - expected).abs() <= tolerance + FLOAT_SLACK,
            p_value: None,
        }
    }

    /// Frequency of a Bernoulli(`p`) event over `trials` runs.
    pub fn frequency(check: impl Into<String>, p: f64, observed: f64, trials: u64) -> Self {
        let tolerance = binomial_tolerance(p, trials);
        let mut c = Self::within(check, p, observed, tolerance);
        let se = tolerance / SIGMAS;
        c.p_value = Some(if se > 0.0 {
            erfc((observed - p).abs() / se / std::f64::consts::SQRT_2)
        } else if c.pass {
            1.0
        } else {
            0.0
        });
        c
    }

    /// Exact condition; `expected` and `observed` are reported as given.
    pub fn exact(check: impl Into<String>, expected: f64, observed: f64, pass: bool) -> Self {
        Self {
            check: check.into(),
            expected,
            observed,
            tolerance: 0.0,
            pass,
            p_value: None,
        }
    }
}

/// Observed sizes and their counts, as parallel arrays.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SizeHistogram {
    pub sizes: Vec<usize>,
    pub counts: Vec<u64>,
}

impl SizeHistogram {
    fn from_map(map: &BTreeMap<usize, u64>) -> Self {
        Self {
            sizes: map.keys().copied().collect(),
            counts: map.values().copied().collect(),
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub version: u32,
    pub bound: usize,
    pub trials: u64,
    /// Prefix length `t` the report describes.
    pub items: usize,
    pub ids: Vec<String>,
    pub weights: Vec<f64>,
    pub per_item_frequency: Vec<f64>,
    pub expected_probability: Vec<f64>,
    pub size_histogram: SizeHistogram,
    pub mean_size: f64,
    pub expected_size: f64,
    pub max_size: usize,
    pub discard_total: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// `rho_t = min(1 / max w, n / sum w)` over `weights`; zero when empty.
pub fn closed_form_rho(weights: &[f64], n: usize) -> f64 {
    if weights.is_empty() {
        return 0.0;
    }
    let max = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = weights.iter().sum();
    (1.0 / max).min(n as f64 / total)
}

#[derive(Debug, Clone)]
struct Tally {
    counts: Vec<u64>,
    sizes: BTreeMap<usize, u64>,
    size_sum: u64,
    max_size: usize,
    discards: u64,
    discard_violations: u64,
}

impl Tally {
    fn new(items: usize) -> Self {
        Self {
            counts: vec![0; items],
            sizes: BTreeMap::new(),
            size_sum: 0,
            max_size: 0,
            discards: 0,
            discard_violations: 0,
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        for (k, v) in other.sizes {
            *self.sizes.entry(k).or_default() += v;
        }
        self.size_sum += other.size_sum;
        self.max_size = self.max_size.max(other.max_size);
        self.discards += other.discards;
        self.discard_violations += other.discard_violations;
        self
    }
}

/// Runs `trials` independent samplers over `stream` and reports at the end
/// of the stream.
pub fn monte_carlo_inclusion<I: Display>(
    stream: &[WeightedItem<I>],
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<VerificationReport> {
    let mut reports = monte_carlo_checkpoints(stream, n, trials, seed, &[stream.len()])?;
    Ok(reports.remove(0))
}

/// Like [`monte_carlo_inclusion`], extracting once per run after each prefix
/// length in `checkpoints`. Extraction draws from a separate random stream,
/// so the checkpoints do not influence each other.
///
/// Trial `k` seeds its sampler with `derive_seed(seed, k)`; trials run in
/// parallel and the tally is order-independent.
pub fn monte_carlo_checkpoints<I: Display>(
    stream: &[WeightedItem<I>],
    n: usize,
    trials: u64,
    seed: u64,
    checkpoints: &[usize],
) -> Result<Vec<VerificationReport>> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    SamplerConfig::new(n, seed)?;
    for item in stream {
        check_weight(item.weight)?;
    }
    let mut checkpoints = checkpoints.to_vec();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    if let Some(&t) = checkpoints.iter().find(|&&t| t > stream.len()) {
        return Err(Error::InvalidParameter(format!(
            "checkpoint {t} beyond stream of length {}",
            stream.len()
        )));
    }
    let weights: Vec<f64> = stream.iter().map(|x| x.weight).collect();

    let fresh = || checkpoints.iter().map(|&t| Tally::new(t)).collect::<Vec<_>>();
    let tallies = (0..trials)
        .into_par_iter()
        .fold(fresh, |mut tallies, trial| {
            let mut sampler: Sampler<usize> = Sampler::new(SamplerConfig {
                bound: n,
                seed: derive_seed(seed, trial),
            });
            let mut processed = 0;
            for (tally, &t) in tallies.iter_mut().zip(&checkpoints) {
                while processed < t {
                    sampler
                        .process(WeightedItem {
                            id: processed,
                            weight: weights[processed],
                        })
                        .expect("weights validated");
                    processed += 1;
                }
                let sample = sampler.extract();
                for item in sample.iter() {
                    tally.counts[item.id] += 1;
                }
                *tally.sizes.entry(sample.len()).or_default() += 1;
                tally.size_sum += sample.len() as u64;
                tally.max_size = tally.max_size.max(sample.len());
                let counter = sampler.counter();
                tally.discards += counter.total_discards();
                if !counter.is_consistent() {
                    tally.discard_violations += 1;
                }
            }
            tallies
        })
        .reduce(fresh, |a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect());

    Ok(checkpoints
        .iter()
        .zip(tallies)
        .map(|(&t, tally)| build_report(stream, &weights[..t], n, trials, tally))
        .collect())
}

fn build_report<I: Display>(
    stream: &[WeightedItem<I>],
    weights: &[f64],
    n: usize,
    trials: u64,
    tally: Tally,
) -> VerificationReport {
    let t = weights.len();
    let rho = closed_form_rho(weights, n);
    let expected_probability: Vec<f64> = weights.iter().map(|w| rho * w).collect();
    let per_item_frequency: Vec<f64> = tally.counts.iter().map(|&c| c as f64 / trials as f64).collect();
    let expected_size = normalize_size(rho * weights.iter().sum::<f64>());
    let mean_size = tally.size_sum as f64 / trials as f64;

    let mut checks = Vec::with_capacity(t + 4);
    for (i, (&p, &f)) in expected_probability.iter().zip(&per_item_frequency).enumerate() {
        checks.push(Check::frequency(format!("inclusion[{i}]"), p, f, trials));
    }
    checks.push(Check::exact(
        "size_bound",
        n as f64,
        tally.max_size as f64,
        tally.max_size <= n,
    ));
    let (lo, hi) = (expected_size.floor() as usize, expected_size.ceil() as usize);
    let support_ok = tally.sizes.keys().all(|&k| k == lo || k == hi);
    checks.push(Check::exact(
        "size_support",
        (hi - lo + 1) as f64,
        tally.sizes.len() as f64,
        support_ok,
    ));
    let fraction = expected_size - expected_size.floor();
    let mean_tol = binomial_tolerance(fraction, trials);
    let mut mean_check = Check::within("mean_size", expected_size, mean_size, mean_tol);
    mean_check.p_value = Check::frequency("", fraction, mean_size - expected_size.floor(), trials).p_value;
    checks.push(mean_check);
    let discard_cap = trials * t as u64;
    checks.push(Check::exact(
        "discard_law",
        discard_cap as f64,
        tally.discards as f64,
        tally.discards <= discard_cap && tally.discard_violations == 0,
    ));

    let pass = checks.iter().all(|c| c.pass);
    VerificationReport {
        version: REPORT_VERSION,
        bound: n,
        trials,
        items: t,
        ids: stream[..t].iter().map(|x| x.id.to_string()).collect(),
        weights: weights.to_vec(),
        per_item_frequency,
        expected_probability,
        size_histogram: SizeHistogram::from_map(&tally.sizes),
        mean_size,
        expected_size,
        max_size: tally.max_size,
        discard_total: tally.discards,
        checks,
        pass,
    }
}
