//! Exhaustive replay of randomized code over a scripted random source.
//!
//! [`enumerate_paths`] runs a closure once per decision path. Every
//! `chance(p)` call with `0 < p < 1` is a two-way branch and every
//! `below(k)` with `k > 1` a `k`-way equal fan; the path probability is the
//! product of the branch probabilities. Code under enumeration must not call
//! `uniform()` directly.

use crate::error::{Error, Result};
use crate::rng::RandomSource;

#[derive(Debug)]
pub struct ScriptedSource {
    script: Vec<usize>,
    choices: Vec<usize>,
    arities: Vec<usize>,
    probability: f64,
}

impl ScriptedSource {
    fn new(script: Vec<usize>) -> Self {
        Self {
            script,
            choices: Vec::new(),
            arities: Vec::new(),
            probability: 1.0,
        }
    }

    fn decide(&mut self, arity: usize) -> usize {
        let at = self.choices.len();
        let choice = self.script.get(at).copied().unwrap_or(0);
        self.choices.push(choice);
        self.arities.push(arity);
        choice
    }

    /// Probability of the path taken so far.
    pub fn probability(&self) -> f64 {
        self.probability
    }
}

impl RandomSource for ScriptedSource {
    fn uniform(&mut self) -> f64 {
        panic!("scripted source cannot enumerate a raw uniform draw; use chance()")
    }

    fn below(&mut self, bound: usize) -> usize {
        if bound <= 1 {
            return 0;
        }
        let choice = self.decide(bound);
        self.probability /= bound as f64;
        choice
    }

    fn chance(&mut self, p: f64) -> bool {
        if p <= 0.0 {
            return false;
        }
        if p >= 1.0 {
            return true;
        }
        if self.decide(2) == 0 {
            self.probability *= p;
            true
        } else {
            self.probability *= 1.0 - p;
            false
        }
    }
}

/// Runs `run` over every decision path and returns `(probability, result)`
/// per path. Fails once more than `max_paths` paths have been visited.
pub fn enumerate_paths<T>(max_paths: usize, mut run: impl FnMut(&mut ScriptedSource) -> T) -> Result<Vec<(f64, T)>> {
    let mut out = Vec::new();
    let mut script = Vec::new();
    loop {
        if out.len() >= max_paths {
            return Err(Error::TooLarge(format!("more than {max_paths} decision paths")));
        }
        let mut src = ScriptedSource::new(script);
        let value = run(&mut src);
        out.push((src.probability, value));
        // Odometer step: bump the deepest decision that has options left.
        let ScriptedSource { mut choices, arities, .. } = src;
        match (0..choices.len()).rev().find(|&i| choices[i] + 1 < arities[i]) {
            Some(i) => {
                choices.truncate(i + 1);
                choices[i] += 1;
                script = choices;
            }
            None => return Ok(out),
        }
    }
}
