//! One-pass EB-PPS sampler.
//!
//! After `t` items with weights `w_1..w_t`, an extracted sample contains item
//! `i` with probability `rho_t * w_i`, where
//! `rho_t = min(1 / max w, n / sum w)`, and never holds more than `n` items.
//! When `n / sum w` is the binding term the sample has exactly `n` items;
//! otherwise its size is `floor(C)` or `ceil(C)` for `C = sum w / max w`.
//!
//! For an unbounded stream whose total weight grows while the maximum weight
//! stays fixed, `rho_t` tends to zero and the sample keeps turning over. Every
//! inclusion probability stays exact; items whose probability drops below
//! [`SIZE_EPSILON`](crate::latent::SIZE_EPSILON) on arrival are not stored.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latent::{check_weight, normalize_size, DiscardCounter, LatentSample, Sample, WeightedItem};
use crate::rng::{RandomSource, RngState, SeededRng};

pub const SNAPSHOT_VERSION: u32 = 1;

/// Random stream used for maintenance; extraction draws from its own stream so
/// that materializing a sample never changes how later items are processed.
const PROCESS_STREAM: u64 = 0;
const OUTPUT_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Sample-size bound `n`.
    pub bound: usize,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(bound: usize, seed: u64) -> Result<Self> {
        if bound == 0 {
            return Err(Error::InvalidParameter("sample-size bound must be at least 1".into()));
        }
        Ok(Self { bound, seed })
    }
}

#[derive(Debug, Clone)]
pub struct Sampler<I> {
    config: SamplerConfig,
    total_weight: f64,
    max_weight: f64,
    rho: f64,
    latent: LatentSample<WeightedItem<I>>,
    counter: DiscardCounter,
    rng: SeededRng,
    output_rng: SeededRng,
}

impl<I> Sampler<I> {
    pub fn new(config: SamplerConfig) -> Self {
        Self {
            config,
            total_weight: 0.0,
            max_weight: f64::NEG_INFINITY,
            rho: 0.0,
            latent: LatentSample::with_capacity(config.bound),
            counter: DiscardCounter::new(),
            rng: SeededRng::with_stream(config.seed, PROCESS_STREAM),
            output_rng: SeededRng::with_stream(config.seed, OUTPUT_STREAM),
        }
    }

    pub fn with_bound(bound: usize, seed: u64) -> Result<Self> {
        Ok(Self::new(SamplerConfig::new(bound, seed)?))
    }

    pub fn config(&self) -> SamplerConfig {
        self.config
    }

    pub fn bound(&self) -> usize {
        self.config.bound
    }

    /// `W`, the sum of processed weights.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Largest processed weight; `-inf` before the first item.
    pub fn max_weight(&self) -> f64 {
        self.max_weight
    }

    /// Current proportionality constant; `0` before the first item.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn items_seen(&self) -> u64 {
        self.counter.items_seen()
    }

    pub fn counter(&self) -> DiscardCounter {
        self.counter
    }

    pub fn latent(&self) -> &LatentSample<WeightedItem<I>> {
        &self.latent
    }

    /// Feeds one item. On error the sampler is left unchanged.
    pub fn process(&mut self, item: WeightedItem<I>) -> Result<()> {
        let step = self.plan(item.weight)?;
        advance(&mut self.latent, &mut self.counter, self.total_weight, step, item, &mut self.rng)?;
        self.commit(step);
        Ok(())
    }

    /// Like [`Sampler::process`] but draws maintenance randomness from `rng`.
    /// Mixing this with `process` on one sampler gives up seeded
    /// reproducibility, not correctness.
    pub fn process_with<R: RandomSource>(&mut self, item: WeightedItem<I>, rng: &mut R) -> Result<()> {
        let step = self.plan(item.weight)?;
        advance(&mut self.latent, &mut self.counter, self.total_weight, step, item, rng)?;
        self.commit(step);
        Ok(())
    }

    fn plan(&self, weight: f64) -> Result<Step> {
        check_weight(weight)?;
        let max_weight = self.max_weight.max(weight);
        let total_weight = self.total_weight + weight;
        if !total_weight.is_finite() {
            return Err(Error::InvalidParameter("total weight overflowed".into()));
        }
        let rho = (1.0 / max_weight).min(self.config.bound as f64 / total_weight);
        Ok(Step {
            max_weight,
            total_weight,
            rho,
        })
    }

    fn commit(&mut self, step: Step) {
        self.total_weight = step.total_weight;
        self.max_weight = step.max_weight;
        self.rho = step.rho;
        self.counter.record_insert();
        debug_assert!(self.latent.latent_size() <= self.config.bound as f64);
        debug_assert!(self.counter.is_consistent());
    }

    pub fn process_all<It>(&mut self, items: It) -> Result<()>
    where
        It: IntoIterator<Item = WeightedItem<I>>,
    {
        items.into_iter().try_for_each(|item| self.process(item))
    }

    /// `C_t = rho_t * W_t = min(W_t / max w, n)`.
    pub fn expected_sample_size(&self) -> f64 {
        if self.items_seen() == 0 {
            0.0
        } else {
            (self.total_weight / self.max_weight).min(self.config.bound as f64)
        }
    }

    /// `rho_t * weight`, the inclusion probability of an item of this weight.
    /// Weights above the current maximum are accepted as hypothetical queries.
    pub fn inclusion_probability(&self, weight: f64) -> Result<f64> {
        if self.items_seen() == 0 {
            return Err(Error::Precondition("no items processed".into()));
        }
        if weight.is_nan() || weight < 0.0 || weight.is_infinite() {
            return Err(Error::InvalidWeight(weight));
        }
        Ok(self.rho * weight)
    }

    /// Materializes a sample using the sampler's output stream. The latent
    /// sample is untouched.
    pub fn extract(&mut self) -> Sample<WeightedItem<I>>
    where
        I: Clone,
    {
        self.latent.output(&mut self.output_rng)
    }

    /// Materializes a sample using a caller-supplied source.
    pub fn extract_with<R: RandomSource>(&self, rng: &mut R) -> Sample<WeightedItem<I>>
    where
        I: Clone,
    {
        self.latent.output(rng)
    }

    pub fn snapshot(&self) -> Snapshot<I>
    where
        I: Clone,
    {
        let started = self.items_seen() > 0;
        Snapshot {
            version: SNAPSHOT_VERSION,
            bound: self.config.bound as u64,
            seed: self.config.seed,
            rng: self.rng.state(),
            output_rng: self.output_rng.state(),
            total_weight: self.total_weight,
            max_weight: started.then_some(self.max_weight),
            rho: started.then_some(self.rho),
            items_seen: self.counter.items_seen(),
            total_discards: self.counter.total_discards(),
            full: self.latent.full_items().to_vec(),
            partial: self.latent.partial_item().cloned(),
            latent_size: self.latent.latent_size(),
        }
    }

    pub fn from_snapshot(snapshot: Snapshot<I>) -> Result<Self> {
        let bad = |msg: String| Error::Snapshot(msg);
        if snapshot.version != SNAPSHOT_VERSION {
            return Err(bad(format!("unsupported snapshot version {}", snapshot.version)));
        }
        let bound = usize::try_from(snapshot.bound).map_err(|_| bad("bound out of range".into()))?;
        let config = SamplerConfig::new(bound, snapshot.seed)?;
        let started = snapshot.items_seen > 0;
        if started != snapshot.max_weight.is_some() || started != snapshot.rho.is_some() {
            return Err(bad("max weight and rho must be present exactly when items were seen".into()));
        }
        if snapshot.total_discards > snapshot.items_seen {
            return Err(bad("more discards than items seen".into()));
        }
        if normalize_size(snapshot.latent_size) > bound as f64 {
            return Err(bad("latent size exceeds the bound".into()));
        }
        for item in snapshot.full.iter().chain(snapshot.partial.iter()) {
            check_weight(item.weight)?;
        }
        let mut full = snapshot.full;
        full.reserve(bound.saturating_sub(full.len()));
        let latent = LatentSample::from_parts(full, snapshot.partial, snapshot.latent_size)
            .map_err(|e| bad(e.to_string()))?;
        Ok(Self {
            config,
            total_weight: snapshot.total_weight,
            max_weight: snapshot.max_weight.unwrap_or(f64::NEG_INFINITY),
            rho: snapshot.rho.unwrap_or(0.0),
            latent,
            counter: DiscardCounter::from_parts(snapshot.total_discards, snapshot.items_seen),
            rng: SeededRng::from_state(&snapshot.rng).map_err(bad)?,
            output_rng: SeededRng::from_state(&snapshot.output_rng).map_err(bad)?,
        })
    }

    pub fn snapshot_json(&self) -> String
    where
        I: Clone + Serialize,
    {
        serde_json::to_string(&self.snapshot()).expect("snapshot serializes")
    }

    pub fn restore_json(json: &str) -> Result<Self>
    where
        I: DeserializeOwned,
    {
        let snapshot: Snapshot<I> = serde_json::from_str(json).map_err(|e| Error::Snapshot(e.to_string()))?;
        Self::from_snapshot(snapshot)
    }
}

#[derive(Debug, Clone, Copy)]
struct Step {
    max_weight: f64,
    total_weight: f64,
    rho: f64,
}

fn advance<I, R: RandomSource>(
    latent: &mut LatentSample<WeightedItem<I>>,
    counter: &mut DiscardCounter,
    old_total: f64,
    step: Step,
    item: WeightedItem<I>,
    rng: &mut R,
) -> Result<()> {
    if old_total > 0.0 {
        // Target size rho' * W computed directly; theta = rho'/rho is implied.
        let target = (step.rho * old_total).min(latent.latent_size());
        latent.downsample_to(target, rng, counter)?;
    }
    let scaled = (step.rho * item.weight).min(1.0);
    latent.absorb_item(item, scaled, rng)?;
    Ok(())
}

/// Portable sampler checkpoint. Floats round-trip bit-exactly through JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot<I> {
    pub version: u32,
    pub bound: u64,
    pub seed: u64,
    pub rng: RngState,
    pub output_rng: RngState,
    pub total_weight: f64,
    pub max_weight: Option<f64>,
    pub rho: Option<f64>,
    pub items_seen: u64,
    pub total_discards: u64,
    pub full: Vec<WeightedItem<I>>,
    pub partial: Option<WeightedItem<I>>,
    pub latent_size: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn items(weights: &[f64]) -> Vec<WeightedItem<usize>> {
        weights
            .iter()
            .enumerate()
            .map(|(i, &w)| WeightedItem::new(i, w).unwrap())
            .collect()
    }

    fn golden() -> Vec<WeightedItem<usize>> {
        let mut w = vec![1.0; 6];
        w.extend([4.0; 6]);
        items(&w)
    }

    #[test]
    fn rejects_zero_bound() {
        assert!(Sampler::<usize>::with_bound(0, 1).is_err());
    }

    #[test]
    fn first_item_is_always_kept() {
        let mut s = Sampler::with_bound(3, 1).unwrap();
        s.process(WeightedItem::new(0usize, 5.0).unwrap()).unwrap();
        assert_eq!(s.rho(), 0.2);
        assert_eq!(s.latent().latent_size(), 1.0);
        assert_eq!(s.inclusion_probability(5.0).unwrap(), 1.0);
        assert_eq!(s.expected_sample_size(), 1.0);
        assert_eq!(s.extract().len(), 1);
    }

    #[test]
    fn rejects_bad_weights_without_changing_state() {
        let mut s = Sampler::with_bound(3, 1).unwrap();
        s.process(WeightedItem::new(0usize, 2.0).unwrap()).unwrap();
        let before = s.snapshot();
        for w in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            let err = s.process(WeightedItem { id: 9, weight: w }).unwrap_err();
            assert!(matches!(err, Error::InvalidWeight(_)));
        }
        assert_eq!(s.snapshot(), before);
    }

    #[test]
    fn golden_stream_closed_form() {
        let mut s = Sampler::with_bound(10, 7).unwrap();
        s.process_all(golden()).unwrap();
        assert_eq!(s.rho(), 0.25);
        assert_eq!(s.expected_sample_size(), 7.5);
        assert_eq!(s.latent().latent_size(), 7.5);
        assert_eq!(s.inclusion_probability(1.0).unwrap(), 0.25);
        assert_eq!(s.inclusion_probability(4.0).unwrap(), 1.0);
        let mut eights = 0;
        for _ in 0..100_000 {
            let sample = s.extract();
            let heavy = sample.iter().filter(|x| x.weight == 4.0).count();
            assert_eq!(heavy, 6);
            match sample.len() {
                7 => {}
                8 => eights += 1,
                k => panic!("size {k}"),
            }
        }
        assert!((eights as f64 / 1e5 - 0.5).abs() < 0.01);
    }

    #[test]
    fn uniform_weights_fill_the_bound() {
        let mut s = Sampler::with_bound(10, 3).unwrap();
        s.process_all(items(&[1.0; 12])).unwrap();
        assert!((s.rho() - 10.0 / 12.0).abs() < 1e-15);
        assert_eq!(s.latent().latent_size(), 10.0);
        for _ in 0..1000 {
            assert_eq!(s.extract().len(), 10);
        }
    }

    #[test]
    fn equal_weights_under_tight_bound() {
        let mut s = Sampler::with_bound(2, 3).unwrap();
        s.process_all(items(&[2.0; 4])).unwrap();
        assert_eq!(s.rho(), 0.25);
        assert_eq!(s.inclusion_probability(2.0).unwrap(), 0.5);
        assert_eq!(s.expected_sample_size(), 2.0);
    }

    #[test]
    fn inclusion_probability_errors() {
        let s = Sampler::<usize>::with_bound(2, 3).unwrap();
        assert!(s.inclusion_probability(1.0).is_err());
        let mut s = Sampler::with_bound(2, 3).unwrap();
        s.process(WeightedItem::new(0usize, 1.0).unwrap()).unwrap();
        assert!(s.inclusion_probability(-1.0).is_err());
        assert_eq!(s.inclusion_probability(3.0).unwrap(), 3.0);
    }

    #[test]
    fn empty_sampler_extracts_nothing() {
        let mut s = Sampler::<usize>::with_bound(4, 0).unwrap();
        assert!(s.extract().is_empty());
        assert_eq!(s.expected_sample_size(), 0.0);
    }

    #[test]
    fn extraction_does_not_perturb_processing() {
        let stream = items(&[1.0, 3.0, 0.5, 2.0, 2.0, 7.0, 1.0, 1.5]);
        let mut a = Sampler::with_bound(3, 99).unwrap();
        let mut b = Sampler::with_bound(3, 99).unwrap();
        for item in stream {
            a.process(item.clone()).unwrap();
            a.extract();
            b.process(item).unwrap();
        }
        assert_eq!(a.latent(), b.latent());
    }

    #[test]
    fn snapshot_round_trip_is_exact() {
        let stream = items(&[0.3, 1.7, 2.2, 9.1, 0.01, 4.4, 3.3, 5.5, 1.0]);
        let mut full = Sampler::with_bound(4, 5).unwrap();
        let mut half = Sampler::with_bound(4, 5).unwrap();
        for item in &stream[..4] {
            full.process(item.clone()).unwrap();
            half.process(item.clone()).unwrap();
        }
        let json = half.snapshot_json();
        let mut resumed = Sampler::<usize>::restore_json(&json).unwrap();
        assert_eq!(resumed.snapshot(), half.snapshot());
        for item in &stream[4..] {
            full.process(item.clone()).unwrap();
            resumed.process(item.clone()).unwrap();
        }
        assert_eq!(full.snapshot(), resumed.snapshot());
        assert_eq!(full.extract(), resumed.extract());
    }

    #[test]
    fn snapshot_of_fresh_sampler_round_trips() {
        let s = Sampler::<String>::with_bound(4, 5).unwrap();
        let r = Sampler::<String>::restore_json(&s.snapshot_json()).unwrap();
        assert_eq!(r.max_weight(), f64::NEG_INFINITY);
        assert_eq!(r.snapshot(), s.snapshot());
    }

    #[test]
    fn restore_rejects_corrupt_snapshots() {
        let mut s = Sampler::with_bound(4, 5).unwrap();
        s.process_all(items(&[1.0, 2.0, 3.0])).unwrap();
        let mut snap = s.snapshot();
        snap.version = 2;
        assert!(Sampler::from_snapshot(snap).is_err());
        let mut snap = s.snapshot();
        snap.latent_size += 1.0;
        assert!(Sampler::from_snapshot(snap).is_err());
        let mut snap = s.snapshot();
        snap.total_discards = 10;
        assert!(Sampler::from_snapshot(snap).is_err());
        assert!(Sampler::<usize>::restore_json("{").is_err());
    }

    #[test]
    fn rho_is_non_increasing_and_size_is_closed_form() {
        let weights = [0.5, 2.0, 1.0, 8.0, 0.1, 3.0, 3.0, 20.0, 1.0, 1.0, 1.0];
        let mut s = Sampler::with_bound(3, 1).unwrap();
        let mut prev = f64::INFINITY;
        for item in items(&weights) {
            s.process(item).unwrap();
            assert!(s.rho() <= prev);
            prev = s.rho();
            let c = s.latent().latent_size();
            assert!((c - s.expected_sample_size()).abs() < 1e-9);
            assert!(c <= 3.0);
            assert!(s.counter().is_consistent());
        }
    }

    #[test]
    fn tiny_inclusion_probabilities_are_not_stored() {
        let mut s = Sampler::with_bound(1, 1).unwrap();
        s.process(WeightedItem::new(0usize, 1e12).unwrap()).unwrap();
        s.process(WeightedItem::new(1usize, 1e-3).unwrap()).unwrap();
        assert_eq!(s.latent().stored(), 1);
        assert_eq!(s.latent().latent_size(), 1.0);
    }
}
