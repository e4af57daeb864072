use std::ops::Range;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::PRegularSampler;
use crate::circuit::{acceptance_probability, BiasVector, Circuit};
use crate::error::{Error, Result};
use crate::fourier::bounds::mainbound_log_factor;
use crate::fourier::{level_profile_recursive, mainbound_p};
use crate::scalar::{Rational, Scalar};
use crate::stats::{binomial_se, clopper_pearson_interval, wilson_interval, Z95};

/// Confidence of the interval used to compare the Monte-Carlo estimate with
/// the exact value, as a normal half-width: 99.73%. The interval is the
/// exact binomial one, since at admissible `p` only a few trials hit.
pub const AGREEMENT_Z: f64 = 3.0;

/// Largest `n` for which the exact value is cross-checked against the
/// signed level polynomial.
const POLY_CROSSCHECK_MAX_N: usize = 64;

/// Counts the trials in `trials` whose restriction leaves `c` nonconstant.
pub fn count_nonconstant(c: &Circuit, s: &PRegularSampler, trials: Range<u64>) -> Result<u64> {
    let mut hits = 0;
    for t in trials {
        if c.restricted_shape(&s.sample(t))?.constant.is_none() {
            hits += 1;
        }
    }
    Ok(hits)
}

/// Monte-Carlo estimate of `Pr[F|_{t̄←x} is nonconstant]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseEstimate {
    pub p: f64,
    pub seed: u64,
    pub trials: u64,
    pub nonconstant: u64,
    pub estimate: f64,
    pub se: f64,
    pub ci95: [f64; 2],
}

impl CollapseEstimate {
    pub fn from_count(p: f64, seed: u64, trials: u64, nonconstant: u64) -> Self {
        let estimate = if trials == 0 {
            0.0
        } else {
            nonconstant as f64 / trials as f64
        };
        let (lo, hi) = wilson_interval(nonconstant, trials, Z95);
        CollapseEstimate {
            p,
            seed,
            trials,
            nonconstant,
            estimate,
            se: binomial_se(estimate, trials),
            ci95: [lo, hi],
        }
    }
}

/// Plain Monte-Carlo run with no parameter restrictions beyond `p ∈ [0, 1]`.
pub fn collapse_estimate(c: &Circuit, p: f64, trials: u64, seed: u64) -> Result<CollapseEstimate> {
    let s = PRegularSampler::new(c.n(), p, seed)?;
    let hits = count_nonconstant(c, &s, 0..trials)?;
    Ok(CollapseEstimate::from_count(p, seed, trials, hits))
}

/// Exact `Pr[F|_{t̄←x} is nonconstant]`.
///
/// Flipping the fixed value of a negated leaf does not change the law of
/// `x`, so `F` may be replaced by its monotone version `M`. Then
/// `M|_{t̄←x}` is nonconstant iff filling the free positions with ones and
/// with zeros gives different values, and since `M` is monotone the
/// probability is `E_X[M] - E_Y[M]` with `Pr[X_i = 1] = (1 + p)/2` and
/// `Pr[Y_i = 1] = (1 - p)/2`.
pub fn exact_nonconstant_probability(c: &Circuit, p: &Rational) -> Result<Rational> {
    if *p < Rational::zero() || *p > Rational::one() {
        return Err(Error::InvalidParameter(format!(
            "p = {p} is not a probability"
        )));
    }
    let m = c.strip_negations();
    let half = Rational::half();
    let hi = BiasVector::new(vec![half.clone() + half.clone() * p; c.n()])?;
    let lo = BiasVector::new(vec![half.clone() - half * p; c.n()])?;
    Ok(acceptance_probability(&m, &hi)? - acceptance_probability(&m, &lo)?)
}

/// `-2 Σ_{k odd} A^k p^k` for the monotone version of `c`, where `A^k` is
/// the signed level sum; equals [`exact_nonconstant_probability`].
fn odd_level_identity(c: &Circuit, p: &Rational) -> Result<Rational> {
    let profile = level_profile_recursive::<Rational>(&c.strip_negations())?;
    let mut total = Rational::zero();
    let mut power = Rational::one();
    for (k, a) in profile.signed_sum.iter().enumerate() {
        if k > 0 {
            power *= p;
            if k % 2 == 1 {
                total += a * &power;
            }
        }
    }
    Ok(-(total * Rational::from_integer(2.into())))
}

/// `2 p min(F̂[0], 1 - F̂[0]) (9 log(4^D n / eps))^D + 2 eps`.
pub fn lemma_rhs(c: &Circuit, p: f64, eps: f64) -> f64 {
    let depth = c.depth().max(1);
    let mean = c.mean().to_f64();
    2.0 * p * mean.min(1.0 - mean) * mainbound_log_factor(c.n(), eps, depth).powi(depth as i32)
        + 2.0 * eps
}

/// Collapse experiment at admissible `(p, eps)`, with the lemma's bound and
/// the exact probability alongside the estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub n: usize,
    pub depth: usize,
    pub eps: f64,
    pub p_max: f64,
    pub mc: CollapseEstimate,
    pub lemma_rhs: f64,
    /// `estimate <= lemma_rhs + 3 se`.
    pub within_bound: bool,
    pub exact: f64,
    pub exact_rational: String,
    pub exact_in_ci: bool,
    /// Agreement of the exact value with the odd-level polynomial, when
    /// `n` is small enough to run it.
    pub identity_crosscheck: Option<bool>,
}

impl CollapseReport {
    /// Validates `(p, eps)` and assembles the report around an estimate
    /// computed elsewhere (for instance in parallel chunks).
    pub fn new(c: &Circuit, eps: f64, mc: CollapseEstimate) -> Result<Self> {
        let n = c.n();
        if n == 0 {
            return Err(Error::InvalidParameter("circuit has no inputs".into()));
        }
        if !(eps > 0.0 && eps < 1.0 / n as f64) {
            return Err(Error::InvalidParameter(format!(
                "eps = {eps} must lie in (0, 1/n) with n = {n}"
            )));
        }
        let depth = c.depth().max(1);
        let p_max = mainbound_p(n, eps, depth);
        if !(mc.p >= 0.0 && mc.p <= p_max) {
            return Err(Error::InvalidParameter(format!(
                "p = {} exceeds the admissible {p_max:e}",
                mc.p
            )));
        }
        let p_exact = Rational::from_f64(mc.p);
        let exact = exact_nonconstant_probability(c, &p_exact)?;
        let identity_crosscheck = if n <= POLY_CROSSCHECK_MAX_N {
            Some(odd_level_identity(c, &p_exact)? == exact)
        } else {
            None
        };
        let exact_f = exact.to_f64();
        let (lo, hi) = clopper_pearson_interval(mc.nonconstant, mc.trials, AGREEMENT_Z);
        let rhs = lemma_rhs(c, mc.p, eps);
        Ok(CollapseReport {
            n,
            depth: c.depth(),
            eps,
            p_max,
            within_bound: mc.estimate <= rhs + 3.0 * mc.se,
            lemma_rhs: rhs,
            exact: exact_f,
            exact_rational: exact.to_string(),
            exact_in_ci: lo <= exact_f && exact_f <= hi,
            identity_crosscheck,
            mc,
        })
    }

    pub fn pass(&self) -> bool {
        self.within_bound && self.exact_in_ci && self.identity_crosscheck != Some(false)
    }
}

/// Requires `eps < 1/n` and `p <= 1/(9 log₂(4^D n/eps))^D`.
pub fn collapse_probability(
    c: &Circuit,
    p: f64,
    eps: f64,
    trials: u64,
    seed: u64,
) -> Result<CollapseReport> {
    // Validate before spending time on the trials.
    CollapseReport::new(c, eps, CollapseEstimate::from_count(p, seed, 0, 0))?;
    let mc = collapse_estimate(c, p, trials, seed)?;
    CollapseReport::new(c, eps, mc)
}
