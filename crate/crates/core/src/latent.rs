//! Latent samples: a set of full items, at most one partial item, and a
//! real-valued latent size `C`.
//!
//! A latent sample holds exactly `floor(C)` full items. A partial item is
//! present exactly when `C` has a nonzero fractional part, and it appears in
//! an extracted sample with probability `frc(C) = C - floor(C)`.
//!
//! The three operations preserve inclusion probabilities:
//!
//! * [`LatentSample::output`] materializes a sample of size `floor(C)` or
//!   `ceil(C)` with expected size `C`.
//! * [`LatentSample::downsample`] scales every inclusion probability by
//!   `theta` and the latent size to `theta * C`.
//! * [`LatentSample::union`] merges two disjoint latent samples, keeping every
//!   inclusion probability and adding the latent sizes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// Latent sizes within this distance of an integer are snapped to it.
pub const SIZE_EPSILON: f64 = 1e-9;

/// Snaps `c` to the nearest integer when float drift leaves it within
/// [`SIZE_EPSILON`] of one.
pub fn normalize_size(c: f64) -> f64 {
    let r = c.round();
    if (c - r).abs() < SIZE_EPSILON {
        r
    } else {
        c
    }
}

/// Fractional part `c - floor(c)`.
pub fn frc(c: f64) -> f64 {
    c - c.floor()
}

/// An item payload with a positive, finite weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedItem<I> {
    pub id: I,
    pub weight: f64,
}

impl<I> WeightedItem<I> {
    pub fn new(id: I, weight: f64) -> Result<Self> {
        check_weight(weight)?;
        Ok(Self { id, weight })
    }
}

pub(crate) fn check_weight(weight: f64) -> Result<()> {
    if weight > 0.0 && weight.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidWeight(weight))
    }
}

/// Counts items ejected from a latent sample against items inserted into it.
///
/// Every item enters at most once and leaves at most once, so
/// `total_discards <= items_seen` always holds; the per-item maintenance cost
/// is proportional to the discards.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscardCounter {
    total_discards: u64,
    items_seen: u64,
}

impl DiscardCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn total_discards(&self) -> u64 {
        self.total_discards
    }

    pub fn items_seen(&self) -> u64 {
        self.items_seen
    }

    pub fn record_insert(&mut self) {
        self.items_seen += 1;
    }

    pub fn record_discards(&mut self, count: usize) {
        self.total_discards += count as u64;
    }

    /// `total_discards <= items_seen`.
    pub fn is_consistent(&self) -> bool {
        self.total_discards <= self.items_seen
    }

    pub(crate) fn from_parts(total_discards: u64, items_seen: u64) -> Self {
        Self {
            total_discards,
            items_seen,
        }
    }
}

/// A materialized sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample<T> {
    pub items: Vec<T>,
}

impl<T> Sample<T> {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.items.iter()
    }

    pub fn into_vec(self) -> Vec<T> {
        self.items
    }
}

impl<T: PartialEq> Sample<T> {
    pub fn contains(&self, item: &T) -> bool {
        self.items.contains(item)
    }
}

/// Which case of the downsampling procedure handled a call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DownsampleBranch {
    /// `theta = 1`: returned unchanged.
    Identity,
    /// `floor(C') = 0`.
    NoFullRetained,
    /// `0 < floor(C') = floor(C)`.
    NoneDeleted,
    /// `0 < floor(C') < floor(C)`.
    ItemsDeleted,
}

impl DownsampleBranch {
    /// Branch taken when shrinking latent size `current` to `target`.
    pub fn classify(current: f64, target: f64) -> Self {
        if target >= current {
            DownsampleBranch::Identity
        } else if target.floor() == 0.0 {
            DownsampleBranch::NoFullRetained
        } else if target.floor() == current.floor() {
            DownsampleBranch::NoneDeleted
        } else {
            DownsampleBranch::ItemsDeleted
        }
    }
}

/// Which case of the union procedure handled a call, by the fractional parts
/// of the two operands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnionCase {
    /// Both latent sizes are integers.
    BothWhole,
    /// `frc(C1) + frc(C2) < 1`: one partial item survives.
    FractionBelowOne,
    /// `frc(C1) + frc(C2) = 1`: one partial item becomes full.
    FractionEqualsOne,
    /// `frc(C1) + frc(C2) > 1`: one becomes full, the other stays partial.
    FractionAboveOne,
}

impl UnionCase {
    pub fn classify(c1: f64, c2: f64) -> Self {
        let (f1, f2) = (frc(c1), frc(c2));
        if f1 == 0.0 && f2 == 0.0 {
            UnionCase::BothWhole
        } else if ((f1 + f2) - 1.0).abs() < SIZE_EPSILON {
            UnionCase::FractionEqualsOne
        } else if f1 + f2 < 1.0 {
            UnionCase::FractionBelowOne
        } else {
            UnionCase::FractionAboveOne
        }
    }
}

/// Latent sample `(A, pi, C)`.
///
/// `full` is allocated once with the capacity of the owning sampler's bound;
/// downsampling compacts it in place.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentSample<T> {
    full: Vec<T>,
    partial: Option<T>,
    size: f64,
}

impl<T> Default for LatentSample<T> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<T> LatentSample<T> {
    /// `(∅, ∅, 0)`.
    pub fn empty() -> Self {
        Self {
            full: Vec::new(),
            partial: None,
            size: 0.0,
        }
    }

    /// Empty latent sample whose full-item storage holds `capacity` items
    /// without reallocating.
    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            full: Vec::with_capacity(capacity),
            partial: None,
            size: 0.0,
        }
    }

    /// `({item}, ∅, 1)`.
    pub fn singleton(item: T) -> Self {
        Self {
            full: vec![item],
            partial: None,
            size: 1.0,
        }
    }

    /// Builds a latent sample from its parts, checking the structural
    /// invariants. `size` is normalized first.
    pub fn from_parts(full: Vec<T>, partial: Option<T>, size: f64) -> Result<Self> {
        let sample = Self {
            full,
            partial,
            size: normalize_size(size),
        };
        sample.check_structure()?;
        Ok(sample)
    }

    pub fn into_parts(self) -> (Vec<T>, Option<T>, f64) {
        (self.full, self.partial, self.size)
    }

    pub fn full_items(&self) -> &[T] {
        &self.full
    }

    pub fn partial_item(&self) -> Option<&T> {
        self.partial.as_ref()
    }

    /// Latent size `C`.
    pub fn latent_size(&self) -> f64 {
        self.size
    }

    /// Number of stored items, full plus partial.
    pub fn stored(&self) -> usize {
        self.full.len() + usize::from(self.partial.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.stored() == 0
    }

    /// Iterates over every stored item.
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.full.iter().chain(self.partial.iter())
    }

    /// Probability that the partial item, if any, appears in an extracted
    /// sample.
    pub fn inclusion_of_partial(&self) -> f64 {
        if self.partial.is_some() {
            frc(self.size)
        } else {
            0.0
        }
    }

    pub fn check_structure(&self) -> Result<()> {
        let c = self.size;
        if !c.is_finite() || c < 0.0 {
            return Err(Error::Malformed(format!("latent size {c} is not a finite non-negative real")));
        }
        if normalize_size(c) != c {
            return Err(Error::Malformed(format!("latent size {c} is within epsilon of an integer")));
        }
        if self.full.len() as f64 != c.floor() {
            return Err(Error::Malformed(format!(
                "{} full items for latent size {c}",
                self.full.len()
            )));
        }
        if self.partial.is_some() != (frc(c) > 0.0) {
            return Err(Error::Malformed(format!(
                "partial item {} for latent size {c}",
                if self.partial.is_some() { "present" } else { "absent" }
            )));
        }
        Ok(())
    }

    /// Items of an extracted sample: every full item, plus the partial item
    /// with probability `frc(C)`. Does not modify the latent sample.
    pub fn output_iter<R: RandomSource>(&self, rng: &mut R) -> impl Iterator<Item = &T> {
        let partial = match &self.partial {
            Some(p) if rng.chance(frc(self.size)) => Some(p),
            _ => None,
        };
        self.full.iter().chain(partial)
    }

    pub fn output<R: RandomSource>(&self, rng: &mut R) -> Sample<T>
    where
        T: Clone,
    {
        Sample {
            items: self.output_iter(rng).cloned().collect(),
        }
    }

    /// Scales every inclusion probability by `theta`, leaving latent size
    /// `theta * C`.
    pub fn downsample<R: RandomSource>(
        &mut self,
        theta: f64,
        rng: &mut R,
        counter: &mut DiscardCounter,
    ) -> Result<DownsampleBranch> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidParameter(format!(
                "downsampling factor must lie in [0, 1], got {theta}"
            )));
        }
        if self.size <= 0.0 {
            return Err(Error::Precondition("cannot downsample an empty latent sample".into()));
        }
        if theta == 1.0 {
            return Ok(DownsampleBranch::Identity);
        }
        let target = normalize_size(theta * self.size);
        Ok(self.shrink(theta, target, rng, counter))
    }

    /// Downsamples to latent size `target`, with `theta = target / C`.
    ///
    /// Callers that know the exact target size use this instead of
    /// [`downsample`](Self::downsample) so that `C` never accumulates
    /// multiplicative drift. Targets within [`SIZE_EPSILON`] above `C` are
    /// treated as `theta = 1`.
    pub fn downsample_to<R: RandomSource>(
        &mut self,
        target: f64,
        rng: &mut R,
        counter: &mut DiscardCounter,
    ) -> Result<DownsampleBranch> {
        if !(target >= 0.0 && target.is_finite()) {
            return Err(Error::InvalidParameter(format!("target latent size {target} is not finite and non-negative")));
        }
        if self.size <= 0.0 {
            return Err(Error::Precondition("cannot downsample an empty latent sample".into()));
        }
        if target > self.size + SIZE_EPSILON {
            return Err(Error::InvalidParameter(format!(
                "target latent size {target} exceeds current size {}",
                self.size
            )));
        }
        let target = normalize_size(target.min(self.size));
        if target >= self.size {
            return Ok(DownsampleBranch::Identity);
        }
        let theta = target / self.size;
        Ok(self.shrink(theta, target, rng, counter))
    }

    fn shrink<R: RandomSource>(
        &mut self,
        theta: f64,
        target: f64,
        rng: &mut R,
        counter: &mut DiscardCounter,
    ) -> DownsampleBranch {
        let c = self.size;
        let fc = frc(c);
        let target_floor = target.floor() as usize;
        let branch = DownsampleBranch::classify(c, target);
        match branch {
            DownsampleBranch::Identity => return branch,
            DownsampleBranch::NoFullRetained => {
                // The partial item survives with probability frc(C)/C; otherwise a
                // random full item takes its place.
                if !self.full.is_empty() && rng.chance(1.0 - fc / c) {
                    swap_or_move(&mut self.full, &mut self.partial, rng);
                }
                counter.record_discards(self.full.len());
                self.full.clear();
            }
            DownsampleBranch::NoneDeleted => {
                // The pseudocode threshold uses theta * frc(C); the correctness
                // argument writes (C'/C) * frc(C). They are equal since theta = C'/C.
                let keep = (1.0 - theta * fc) / (1.0 - frc(target));
                if self.partial.is_some() && rng.chance(1.0 - keep) {
                    swap1_unchecked(&mut self.full, &mut self.partial, rng);
                }
            }
            DownsampleBranch::ItemsDeleted => {
                if rng.chance(theta * fc) {
                    partial_shuffle_keep(&mut self.full, target_floor, rng, counter);
                    swap1_unchecked(&mut self.full, &mut self.partial, rng);
                } else {
                    partial_shuffle_keep(&mut self.full, target_floor + 1, rng, counter);
                    if move1_unchecked(&mut self.full, &mut self.partial, rng).is_some() {
                        counter.record_discards(1);
                    }
                }
            }
        }
        if frc(target) == 0.0 && self.partial.take().is_some() {
            counter.record_discards(1);
        }
        self.size = target;
        debug_assert!(self.check_structure().is_ok(), "{:?}", self.check_structure());
        branch
    }

    /// Merges `other` into `self`. The operands must be disjoint; this is not
    /// checked (see [`union_checked`](Self::union_checked)).
    pub fn absorb<R: RandomSource>(&mut self, other: LatentSample<T>, rng: &mut R) -> UnionCase {
        let LatentSample {
            full: mut other_full,
            partial: other_partial,
            size: other_size,
        } = other;
        self.merge(other_size, other_partial, rng, |full| full.append(&mut other_full))
    }

    /// Merges the singleton `({item}, ∅, 1)` downsampled to latent size
    /// `size` without materializing it.
    ///
    /// Downsampling a singleton is deterministic: `size = 1` keeps the item
    /// full, any smaller size turns it into the partial item. A size that
    /// normalizes to zero leaves `self` unchanged and returns `None`.
    pub fn absorb_item<R: RandomSource>(&mut self, item: T, size: f64, rng: &mut R) -> Result<Option<UnionCase>> {
        if !(0.0..=1.0 + SIZE_EPSILON).contains(&size) {
            return Err(Error::InvalidParameter(format!("singleton latent size {size} outside [0, 1]")));
        }
        let size = normalize_size(size);
        Ok(if size == 0.0 {
            None
        } else if size == 1.0 {
            Some(self.merge(1.0, None, rng, |full| full.push(item)))
        } else {
            Some(self.merge(size, Some(item), rng, |_| {}))
        })
    }

    fn merge<R: RandomSource>(
        &mut self,
        other_size: f64,
        other_partial: Option<T>,
        rng: &mut R,
        take_full: impl FnOnce(&mut Vec<T>),
    ) -> UnionCase {
        let (c1, c2) = (self.size, other_size);
        let (f1, f2) = (frc(c1), frc(c2));
        let case = UnionCase::classify(c1, c2);
        take_full(&mut self.full);
        let whole = c1.floor() + c2.floor();
        self.size = match case {
            UnionCase::BothWhole => whole,
            UnionCase::FractionBelowOne => {
                let keep_own = f2 == 0.0 || (f1 > 0.0 && rng.chance(f1 / (f1 + f2)));
                if !keep_own {
                    self.partial = other_partial;
                }
                whole + f1 + f2
            }
            UnionCase::FractionEqualsOne => {
                let own = self.partial.take();
                let promoted = if rng.chance(f1) { own } else { other_partial };
                self.full.extend(promoted);
                whole + 1.0
            }
            UnionCase::FractionAboveOne => {
                let (g1, g2) = (1.0 - f1, 1.0 - f2);
                if rng.chance(g1 / (g1 + g2)) {
                    self.full.extend(other_partial);
                } else {
                    let own = std::mem::replace(&mut self.partial, other_partial);
                    self.full.extend(own);
                }
                whole + 1.0 + (f1 + f2 - 1.0)
            }
        };
        self.size = normalize_size(self.size);
        debug_assert!(self.check_structure().is_ok(), "{:?}", self.check_structure());
        case
    }

    pub fn union<R: RandomSource>(mut self, other: LatentSample<T>, rng: &mut R) -> Self {
        self.absorb(other, rng);
        self
    }
}

impl<T: PartialEq> LatentSample<T> {
    /// True when no stored item appears twice.
    pub fn is_distinct(&self) -> bool {
        let items: Vec<&T> = self.iter().collect();
        items
            .iter()
            .enumerate()
            .all(|(i, a)| items[i + 1..].iter().all(|b| a != b))
    }

    pub fn is_disjoint_from(&self, other: &LatentSample<T>) -> bool {
        self.iter().all(|a| other.iter().all(|b| a != b))
    }

    /// [`union`](Self::union) after an `O(|L1| |L2|)` disjointness check.
    pub fn union_checked<R: RandomSource>(self, other: LatentSample<T>, rng: &mut R) -> Result<Self> {
        if !self.is_disjoint_from(&other) {
            return Err(Error::Precondition("union operands share an item".into()));
        }
        Ok(self.union(other, rng))
    }
}

/// Exchanges a uniformly chosen full item with the partial item.
pub fn swap1<T, R: RandomSource>(full: &mut [T], partial: &mut Option<T>, rng: &mut R) -> Result<()> {
    if full.is_empty() {
        return Err(Error::Precondition("swap1 needs a non-empty full set".into()));
    }
    if partial.is_none() {
        return Err(Error::Precondition("swap1 needs a partial item".into()));
    }
    swap1_unchecked(full, partial, rng);
    Ok(())
}

/// Moves a uniformly chosen full item into the partial slot, returning the
/// displaced previous occupant.
pub fn move1<T, R: RandomSource>(
    full: &mut Vec<T>,
    partial: &mut Option<T>,
    rng: &mut R,
) -> Result<Option<T>> {
    if full.is_empty() {
        return Err(Error::Precondition("move1 needs a non-empty full set".into()));
    }
    Ok(move1_unchecked(full, partial, rng))
}

/// Keeps `keep` items of `items` chosen uniformly without replacement.
///
/// A partial Fisher-Yates pass moves the `d = len - keep` discarded items to
/// the tail with exactly `d` swaps and truncates them; `counter` is charged
/// `d` discards.
pub fn sample_without_replacement<T, R: RandomSource>(
    items: &mut Vec<T>,
    keep: usize,
    rng: &mut R,
    counter: &mut DiscardCounter,
) -> Result<()> {
    if keep > items.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot keep {keep} of {} items",
            items.len()
        )));
    }
    partial_shuffle_keep(items, keep, rng, counter);
    Ok(())
}

fn swap1_unchecked<T, R: RandomSource>(full: &mut [T], partial: &mut Option<T>, rng: &mut R) {
    let slot = partial.as_mut().expect("partial item present");
    let idx = rng.below(full.len());
    std::mem::swap(&mut full[idx], slot);
}

fn move1_unchecked<T, R: RandomSource>(full: &mut Vec<T>, partial: &mut Option<T>, rng: &mut R) -> Option<T> {
    let idx = rng.below(full.len());
    let item = full.swap_remove(idx);
    partial.replace(item)
}

/// Swap1 when a partial item exists, Move1 into the empty slot otherwise.
fn swap_or_move<T, R: RandomSource>(full: &mut Vec<T>, partial: &mut Option<T>, rng: &mut R) {
    if partial.is_some() {
        swap1_unchecked(full, partial, rng);
    } else {
        move1_unchecked(full, partial, rng);
    }
}

fn partial_shuffle_keep<T, R: RandomSource>(
    items: &mut Vec<T>,
    keep: usize,
    rng: &mut R,
    counter: &mut DiscardCounter,
) {
    let len = items.len();
    let discards = len - keep;
    for i in 0..discards {
        let end = len - i;
        let j = rng.below(end);
        items.swap(j, end - 1);
    }
    items.truncate(keep);
    counter.record_discards(discards);
}
