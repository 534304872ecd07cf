//! Synthetic workloads and the throughput/discard benchmark.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::latent::WeightedItem;
use crate::sampler::Sampler;

/// Weight generator for synthetic streams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Workload {
    /// Every weight is 1.
    Uniform,
    /// Weights drawn from a Zipf law with this exponent over `1..=count`.
    Zipf { exponent: f64 },
    /// Unit weights, except every `period`-th item which weighs `ratio`.
    Spike { period: u64, ratio: f64 },
}

impl fmt::Display for Workload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Workload::Uniform => write!(f, "uniform"),
            Workload::Zipf { exponent } => write!(f, "zipf:{exponent}"),
            Workload::Spike { period, ratio } => write!(f, "spike:{period}:{ratio}"),
        }
    }
}

impl FromStr for Workload {
    type Err = Error;

    /// Accepts `uniform`, `zipf:S` and `spike:K:RATIO`; parentheses with
    /// commas (`zipf(S)`, `spike(K,RATIO)`) work too.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown distribution {s:?}"));
        let normalized = s.trim().replace(['(', ','], ":").replace(')', "");
        let parts: Vec<&str> = normalized.split(':').map(str::trim).collect();
        match parts.as_slice() {
            ["uniform"] => Ok(Workload::Uniform),
            ["zipf", s] => {
                let exponent: f64 = s.parse().map_err(|_| bad())?;
                if !(exponent > 0.0 && exponent.is_finite()) {
                    return Err(bad());
                }
                Ok(Workload::Zipf { exponent })
            }
            ["spike", k, ratio] => {
                let period: u64 = k.parse().map_err(|_| bad())?;
                let ratio: f64 = ratio.parse().map_err(|_| bad())?;
                if period == 0 || !(ratio > 0.0 && ratio.is_finite()) {
                    return Err(bad());
                }
                Ok(Workload::Spike { period, ratio })
            }
            _ => Err(bad()),
        }
    }
}

/// Deterministic stream of `count` weights.
pub fn weights(workload: Workload, count: u64, seed: u64) -> Result<Box<dyn Iterator<Item = f64>>> {
    Ok(match workload {
        Workload::Uniform => Box::new(std::iter::repeat_n(1.0, count as usize)),
        Workload::Zipf { exponent } => {
            let zipf = rand_distr::Zipf::new((count.max(2)) as f64, exponent)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5A5A_5A5A);
            Box::new((0..count).map(move |_| zipf.sample(&mut rng)))
        }
        Workload::Spike { period, ratio } => {
            // Offset the spikes so the stream starts with unit weights.
            let offset = ChaCha8Rng::seed_from_u64(seed).random_range(0..period);
            Box::new((0..count).map(move |i| if i % period == offset { ratio } else { 1.0 }))
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub version: u32,
    pub distribution: String,
    pub count: u64,
    pub bound: usize,
    pub seed: u64,
    pub elapsed_secs: f64,
    pub items_per_sec: f64,
    pub total_discards: u64,
    pub discard_ratio: f64,
    /// Largest number of discards charged to a single item.
    pub max_item_discards: u64,
    /// Slowest single item, when per-item timing was requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_item_nanos: Option<u64>,
    pub latent_size: f64,
    pub rho: f64,
    /// `total_discards <= count`, checked after every item.
    pub discards_bounded: bool,
}

/// Streams `count` synthetic items through a sampler with bound `n`.
pub fn run_bench(workload: Workload, count: u64, n: usize, seed: u64, item_timing: bool) -> Result<BenchReport> {
    let mut sampler: Sampler<u64> = Sampler::with_bound(n, seed)?;
    let mut max_item_discards = 0;
    let mut max_item_nanos = 0;
    let mut discards_bounded = true;
    let stream = weights(workload, count, seed)?;
    let start = Instant::now();
    for (id, weight) in (0u64..).zip(stream) {
        let before = sampler.counter().total_discards();
        let item = WeightedItem { id, weight };
        if item_timing {
            let t0 = Instant::now();
            sampler.process(item)?;
            max_item_nanos = max_item_nanos.max(t0.elapsed().as_nanos() as u64);
        } else {
            sampler.process(item)?;
        }
        let counter = sampler.counter();
        max_item_discards = max_item_discards.max(counter.total_discards() - before);
        discards_bounded &= counter.is_consistent();
    }
    let elapsed = start.elapsed().as_secs_f64();
    let counter = sampler.counter();
    assert!(discards_bounded, "discards exceeded insertions");
    Ok(BenchReport {
        version: crate::verify::REPORT_VERSION,
        distribution: workload.to_string(),
        count,
        bound: n,
        seed,
        elapsed_secs: elapsed,
        items_per_sec: if elapsed > 0.0 { count as f64 / elapsed } else { f64::INFINITY },
        total_discards: counter.total_discards(),
        discard_ratio: if count > 0 {
            counter.total_discards() as f64 / count as f64
        } else {
            0.0
        },
        max_item_discards,
        max_item_nanos: item_timing.then_some(max_item_nanos),
        latent_size: sampler.latent().latent_size(),
        rho: sampler.rho(),
        discards_bounded,
    })
}
