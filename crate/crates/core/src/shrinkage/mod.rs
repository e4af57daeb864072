//! Truly random `p`-regular restrictions and what they do to read-once
//! formulas: collapse probabilities, sandwiching approximators and
//! shrinkage of the approximators.
//!
//! A restriction is a pair `(t, x)` with `t` drawn `p`-regular (each position
//! free independently with probability `p`) and `x` uniform. Trial `k` of a
//! sampler seeded with `s` uses the ChaCha8 stream `k` of key `s`, so any
//! subset of trials can be replayed or computed in parallel.

mod collapse;
mod experiment;
mod sandwich;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::RestrictionMask;
use crate::error::{Error, Result};

pub use collapse::{
    collapse_estimate, collapse_probability, count_nonconstant, exact_nonconstant_probability,
    lemma_rhs, CollapseEstimate, CollapseReport, AGREEMENT_Z,
};
pub use experiment::{
    shrink_experiment, shrink_threshold, shrink_trial, ShrinkConfig, ShrinkReport, SizeSummary,
    TrialSizes, DEFAULT_THRESHOLD_SCALE,
};
pub use sandwich::{build_sandwich, NodeConditionReport, PruneStats, SandwichPair, GAP_CONSTANT};

/// Independent Bernoulli(`p`) free positions with uniform fixed values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PRegularSampler {
    n: usize,
    p: f64,
    seed: u64,
}

impl PRegularSampler {
    pub fn new(n: usize, p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "p = {p} is not a probability"
            )));
        }
        Ok(PRegularSampler { n, p, seed })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The restriction used by trial `trial`.
    pub fn sample(&self, trial: u64) -> RestrictionMask {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        let mut free = Vec::with_capacity(self.n);
        let mut values = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            free.push(rng.gen_bool(self.p));
            values.push(rng.gen::<bool>());
        }
        RestrictionMask::new(free, values).expect("equal lengths")
    }
}

/// Draws the restriction for `trial` from `s`.
pub fn sample_restriction(s: &PRegularSampler, trial: u64) -> RestrictionMask {
    s.sample(trial)
}
