//! Exact enumeration of the sampling algorithms over rationals.
//!
//! This is a separate, deliberately naive restatement of downsampling, union
//! and the streaming loop. Each uniform comparison becomes a pair of branches
//! weighted by the exact threshold; each uniform choice (Swap1, Move1, subset
//! sampling) becomes an equal-weight fan. The result is a probability
//! distribution over latent samples with no sampling error, so inclusion
//! probabilities can be compared with `rho_t * w_i` for equality.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Longest stream the oracle accepts.
pub const MAX_STREAM: usize = 8;

/// Largest number of distinct latent states tracked at once.
pub const MAX_STATES: usize = 250_000;

fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn frc(c: &Rational) -> Rational {
    c - c.floor()
}

fn floor_usize(c: &Rational) -> usize {
    let f = c.floor().to_integer();
    usize::try_from(f).expect("latent sizes are small non-negative integers")
}

/// A latent sample over item indices, with exact latent size.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactLatent {
    pub full: BTreeSet<usize>,
    pub partial: Option<usize>,
    pub size: Rational,
}

/// Probability distribution over latent samples.
pub type Distribution = BTreeMap<ExactLatent, Rational>;

impl ExactLatent {
    pub fn empty() -> Self {
        Self {
            full: BTreeSet::new(),
            partial: None,
            size: Rational::zero(),
        }
    }

    pub fn new(full: &[usize], partial: Option<usize>, size: Rational) -> Self {
        let l = Self {
            full: full.iter().copied().collect(),
            partial,
            size,
        };
        debug_assert!(l.is_well_formed());
        l
    }

    pub fn is_well_formed(&self) -> bool {
        !self.size.is_negative()
            && self.full.len() == floor_usize(&self.size)
            && self.partial.is_some() == !frc(&self.size).is_zero()
            && self.partial.is_none_or(|p| !self.full.contains(&p))
    }

    /// Exact appearance probability of each stored item in an extracted
    /// sample.
    pub fn inclusion(&self) -> BTreeMap<usize, Rational> {
        let mut m: BTreeMap<usize, Rational> = self.full.iter().map(|&x| (x, Rational::one())).collect();
        if let Some(p) = self.partial {
            m.insert(p, frc(&self.size));
        }
        m
    }

    fn with(full: BTreeSet<usize>, partial: Option<usize>, size: Rational) -> Self {
        Self { full, partial, size }
    }

    /// Every outcome of downsampling by `theta`, with its probability.
    pub fn downsample(&self, theta: &Rational) -> Vec<(Rational, ExactLatent)> {
        assert!(!theta.is_negative() && *theta <= Rational::one());
        assert!(self.size.is_positive());
        if theta.is_one() {
            return vec![(Rational::one(), self.clone())];
        }
        let c = &self.size;
        let target = theta * c;
        let fc = frc(c);
        let (floor_old, floor_new) = (floor_usize(c), floor_usize(&target));
        let full: Vec<usize> = self.full.iter().copied().collect();
        let mut out = Vec::new();

        if floor_new == 0 {
            let keep = &fc / c;
            if keep.is_positive() {
                out.push((keep.clone(), Self::with(BTreeSet::new(), self.partial, target.clone())));
            }
            let swap = Rational::one() - keep;
            if swap.is_positive() {
                let each = swap / q(full.len() as i64);
                for &a in &full {
                    out.push((each.clone(), Self::with(BTreeSet::new(), Some(a), target.clone())));
                }
            }
        } else if floor_new == floor_old {
            let keep = (Rational::one() - theta * &fc) / (Rational::one() - frc(&target));
            if keep.is_positive() {
                out.push((keep.clone(), Self::with(self.full.clone(), self.partial, target.clone())));
            }
            let swap = Rational::one() - keep;
            if swap.is_positive() {
                let p = self.partial.expect("swap branch needs a partial item");
                let each = swap / q(full.len() as i64);
                for &a in &full {
                    let mut f = self.full.clone();
                    f.remove(&a);
                    f.insert(p);
                    out.push((each.clone(), Self::with(f, Some(a), target.clone())));
                }
            }
        } else {
            let promote = theta * &fc;
            if promote.is_positive() {
                let p = self.partial.expect("promotion needs a partial item");
                let subsets = combinations(&full, floor_new);
                let each = &promote / q((subsets.len() * floor_new) as i64);
                for kept in &subsets {
                    for &a in kept {
                        let mut f: BTreeSet<usize> = kept.iter().copied().collect();
                        f.remove(&a);
                        f.insert(p);
                        out.push((each.clone(), Self::with(f, Some(a), target.clone())));
                    }
                }
            }
            let evict = Rational::one() - promote;
            if evict.is_positive() {
                let subsets = combinations(&full, floor_new + 1);
                let each = &evict / q((subsets.len() * (floor_new + 1)) as i64);
                for kept in &subsets {
                    for &a in kept {
                        let mut f: BTreeSet<usize> = kept.iter().copied().collect();
                        f.remove(&a);
                        out.push((each.clone(), Self::with(f, Some(a), target.clone())));
                    }
                }
            }
        }

        if frc(&target).is_zero() {
            for (_, l) in &mut out {
                l.partial = None;
            }
        }
        out
    }

    /// Every outcome of the union with a disjoint `other`.
    pub fn union(&self, other: &ExactLatent) -> Vec<(Rational, ExactLatent)> {
        let size = &self.size + &other.size;
        let (f1, f2) = (frc(&self.size), frc(&other.size));
        let both: BTreeSet<usize> = self.full.union(&other.full).copied().collect();
        let one = Rational::one();
        let with_extra = |extra: Option<usize>, partial: Option<usize>| {
            let mut f = both.clone();
            f.extend(extra);
            Self::with(f, partial, size.clone())
        };
        let mut out = Vec::new();
        let mut branch = |p: Rational, l: ExactLatent| {
            if p.is_positive() {
                out.push((p, l));
            }
        };
        let sum = &f1 + &f2;
        if f1.is_zero() && f2.is_zero() {
            branch(one.clone(), with_extra(None, None));
        } else if sum < one {
            let first = &f1 / &sum;
            branch(first.clone(), with_extra(None, self.partial));
            branch(&one - first, with_extra(None, other.partial));
        } else if sum == one {
            branch(f1.clone(), with_extra(self.partial, None));
            branch(&one - &f1, with_extra(other.partial, None));
        } else {
            let (g1, g2) = (&one - &f1, &one - &f2);
            let first = &g1 / (&g1 + &g2);
            branch(first.clone(), with_extra(other.partial, self.partial));
            branch(&one - first, with_extra(self.partial, other.partial));
        }
        out
    }
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            go(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Inclusion probability of each item under a distribution of latent samples.
pub fn inclusion_under(dist: &Distribution, items: usize) -> Vec<Rational> {
    let mut incl = vec![Rational::zero(); items];
    for (l, p) in dist {
        for (x, px) in l.inclusion() {
            incl[x] += p * px;
        }
    }
    incl
}

fn accumulate(dist: &mut Distribution, p: Rational, l: ExactLatent) {
    *dist.entry(l).or_insert_with(Rational::zero) += p;
}

/// Exact results for one stream.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub weights: Vec<u32>,
    pub bound: usize,
    /// `min(1 / max w, n / sum w)`.
    pub rho: Rational,
    /// Enumerated inclusion probability of each item.
    pub inclusion: Vec<Rational>,
    /// `rho * w_i`.
    pub expected: Vec<Rational>,
    /// Exact distribution of the extracted sample size.
    pub size_distribution: BTreeMap<usize, Rational>,
    /// Distinct latent states at the end of the stream.
    pub states: usize,
}

impl OracleResult {
    pub fn matches_closed_form(&self) -> bool {
        self.inclusion == self.expected
    }
}

/// Enumerates every random branch of the streaming sampler on `weights` with
/// bound `n`.
pub fn exhaustive_oracle(weights: &[u32], n: usize) -> Result<OracleResult> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample-size bound must be at least 1".into()));
    }
    if weights.len() > MAX_STREAM {
        return Err(Error::TooLarge(format!(
            "stream of {} items exceeds the oracle limit of {MAX_STREAM}",
            weights.len()
        )));
    }
    if weights.contains(&0) {
        return Err(Error::InvalidWeight(0.0));
    }

    let bound = q(n as i64);
    let mut dist: Distribution = BTreeMap::new();
    dist.insert(ExactLatent::empty(), Rational::one());
    let mut total = Rational::zero();
    let mut max = Rational::zero();
    let mut rho = Rational::zero();

    for (t, &w) in weights.iter().enumerate() {
        let w = q(i64::from(w));
        let new_max = if w > max { w.clone() } else { max.clone() };
        let new_total = &total + &w;
        let a = new_max.recip();
        let b = &bound / &new_total;
        let new_rho = if a < b { a } else { b };

        let arrival = ExactLatent::new(&[t], None, Rational::one()).downsample(&(&new_rho * &w));
        let mut next: Distribution = BTreeMap::new();
        for (latent, p) in &dist {
            let shrunk = if total.is_positive() {
                latent.downsample(&(&new_rho / &rho))
            } else {
                vec![(Rational::one(), latent.clone())]
            };
            for (p1, l1) in &shrunk {
                for (p2, l2) in &arrival {
                    for (p3, l) in l1.union(l2) {
                        accumulate(&mut next, p * p1 * p2 * p3, l);
                    }
                }
            }
            if next.len() > MAX_STATES {
                return Err(Error::TooLarge(format!("more than {MAX_STATES} latent states")));
            }
        }
        dist = next;
        total = new_total;
        max = new_max;
        rho = new_rho;
    }

    let inclusion = inclusion_under(&dist, weights.len());
    let expected = weights.iter().map(|&w| &rho * q(i64::from(w))).collect();
    let mut size_distribution: BTreeMap<usize, Rational> = BTreeMap::new();
    for (l, p) in &dist {
        let f = frc(&l.size);
        let lo = floor_usize(&l.size);
        if f < Rational::one() {
            let stay = p * (Rational::one() - &f);
            if stay.is_positive() {
                *size_distribution.entry(lo).or_insert_with(Rational::zero) += stay;
            }
        }
        if f.is_positive() {
            *size_distribution.entry(lo + 1).or_insert_with(Rational::zero) += p * &f;
        }
    }

    Ok(OracleResult {
        weights: weights.to_vec(),
        bound: n,
        rho,
        inclusion,
        expected,
        size_distribution,
        states: dist.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn single_item() {
        let res = exhaustive_oracle(&[1], 1).unwrap();
        assert_eq!(res.inclusion, vec![q(1)]);
        assert!(res.matches_closed_form());
    }

    #[test]
    fn two_unit_items_bound_one() {
        let res = exhaustive_oracle(&[1, 1], 1).unwrap();
        assert_eq!(res.rho, r(1, 2));
        assert_eq!(res.inclusion, vec![r(1, 2), r(1, 2)]);
        assert_eq!(res.size_distribution, BTreeMap::from([(1, q(1))]));
    }

    #[test]
    fn light_then_heavy() {
        let res = exhaustive_oracle(&[1, 3], 2).unwrap();
        assert_eq!(res.rho, r(1, 3));
        assert_eq!(res.inclusion, vec![r(1, 3), q(1)]);
        // C = 4/3: size 2 w.p. 1/3, size 1 w.p. 2/3.
        assert_eq!(res.size_distribution, BTreeMap::from([(1, r(2, 3)), (2, r(1, 3))]));
    }

    #[test]
    fn rejects_oversized_inputs() {
        assert!(matches!(exhaustive_oracle(&[1; 9], 2), Err(Error::TooLarge(_))));
        assert!(exhaustive_oracle(&[1, 0], 2).is_err());
        assert!(exhaustive_oracle(&[1], 0).is_err());
    }

    #[test]
    fn downsample_scales_every_item_exactly() {
        // C = 3.5 down to several targets, covering every branch.
        let l = ExactLatent::new(&[0, 1, 2], Some(3), r(7, 2));
        let before = l.inclusion();
        for theta in [r(1, 10), r(9, 10), r(4, 7), r(1, 2), r(5, 7), q(0)] {
            let mut dist = Distribution::new();
            for (p, out) in l.downsample(&theta) {
                assert!(out.is_well_formed());
                assert_eq!(out.size, &theta * r(7, 2));
                accumulate(&mut dist, p, out);
            }
            let total: Rational = dist.values().sum();
            assert_eq!(total, q(1));
            let after = inclusion_under(&dist, 4);
            for (x, p) in &before {
                assert_eq!(after[*x], &theta * p, "theta {theta} item {x}");
            }
        }
    }

    #[test]
    fn union_preserves_every_item_exactly() {
        let cases = [
            (ExactLatent::new(&[0], None, q(1)), ExactLatent::new(&[1, 2], None, q(2))),
            (ExactLatent::new(&[0], Some(1), r(6, 5)), ExactLatent::new(&[2], Some(3), r(13, 10))),
            (ExactLatent::new(&[0], Some(1), r(7, 5)), ExactLatent::new(&[], Some(2), r(3, 5))),
            (ExactLatent::new(&[0], Some(1), r(3, 2)), ExactLatent::new(&[2, 3], Some(4), r(27, 10))),
        ];
        for (a, b) in cases {
            let mut dist = Distribution::new();
            for (p, out) in a.union(&b) {
                assert!(out.is_well_formed());
                assert_eq!(out.size, &a.size + &b.size);
                accumulate(&mut dist, p, out);
            }
            let after = inclusion_under(&dist, 5);
            for (x, p) in a.inclusion().into_iter().chain(b.inclusion()) {
                assert_eq!(after[x], p);
            }
        }
    }
}
