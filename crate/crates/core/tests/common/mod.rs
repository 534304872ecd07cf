#![allow(dead_code)]

use std::collections::BTreeMap;

use ebpps::verify::enumerate::enumerate_paths;
use ebpps::{Sampler, WeightedItem};

/// Every stream of length `1..=max_len` over `alphabet`.
pub fn all_streams(alphabet: &[u32], max_len: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<u32>> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|s| {
                alphabet.iter().map(move |&w| {
                    let mut next = s.clone();
                    next.push(w);
                    next
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// Outcome of replaying the real sampler over every random decision path.
pub struct Replay {
    pub paths: usize,
    pub inclusion: Vec<f64>,
    pub sizes: BTreeMap<usize, f64>,
    pub max_size: usize,
    pub total_probability: f64,
}

/// Runs the production sampler plus one extraction along every decision
/// path and aggregates the exact path probabilities.
pub fn replay_sampler(weights: &[u32], n: usize) -> Replay {
    let paths = enumerate_paths(1_000_000, |rng| {
        let mut sampler: Sampler<usize> = Sampler::with_bound(n, 0).unwrap();
        for (i, &w) in weights.iter().enumerate() {
            sampler.process_with(WeightedItem::new(i, f64::from(w)).unwrap(), rng).unwrap();
        }
        let mut ids: Vec<usize> = sampler.extract_with(rng).iter().map(|x| x.id).collect();
        ids.sort_unstable();
        ids
    })
    .unwrap();

    let mut inclusion = vec![0.0; weights.len()];
    let mut sizes = BTreeMap::new();
    let mut max_size = 0;
    let mut total_probability = 0.0;
    for (p, ids) in &paths {
        total_probability += p;
        for &id in ids {
            inclusion[id] += p;
        }
        *sizes.entry(ids.len()).or_insert(0.0) += p;
        max_size = max_size.max(ids.len());
    }
    Replay {
        paths: paths.len(),
        inclusion,
        sizes,
        max_size,
        total_probability,
    }
}

/// Checks that a histogram is supported on one integer or two adjacent ones.
pub fn adjacent_support<K: Copy + Into<u64>>(sizes: impl IntoIterator<Item = K>) -> bool {
    let keys: Vec<u64> = sizes.into_iter().map(Into::into).collect();
    match (keys.iter().min(), keys.iter().max()) {
        (Some(lo), Some(hi)) => hi - lo <= 1,
        _ => true,
    }
}

/// Deterministic stream of `len` weights, log-uniform on `[lo, hi]`.
pub fn log_uniform_weights(len: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (lo.ln(), hi.ln());
    (0..len).map(|_| rng.random_range(a..=b).exp()).collect()
}

pub fn items(weights: &[f64]) -> Vec<WeightedItem<usize>> {
    weights
        .iter()
        .enumerate()
        .map(|(i, &w)| WeightedItem::new(i, w).unwrap())
        .collect()
}

pub fn golden_weights() -> Vec<f64> {
    let mut w = vec![1.0; 6];
    w.extend([4.0; 6]);
    w
}
