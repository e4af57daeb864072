//! Checkers for the Fourier-growth inequalities.
//!
//! All logarithms are base 2. Each check returns a [`BoundReport`] carrying
//! both sides, the slack and the parameters it was evaluated at.

use serde::{Deserialize, Serialize};

use super::{damped_unchecked, level_profile_recursive, wht_bruteforce, LevelProfile};
use crate::circuit::{acceptance_probability, BiasVector, Circuit};
use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// Agreement tolerance for floating cross-checks.
pub const FLOAT_TOLERANCE: f64 = 1e-10;

/// Slack tolerance for inequalities evaluated in floating point.
pub const BOUND_TOLERANCE: f64 = 1e-12;

/// Largest `n` at which the brute-force spectrum joins cross-checks.
pub const CROSSCHECK_MAX_N: usize = 14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub p: Option<f64>,
    pub eps: Option<f64>,
    pub depth: Option<usize>,
    pub n: usize,
    pub log_base: u32,
}

impl BoundParams {
    pub fn new(n: usize) -> Self {
        BoundParams {
            p: None,
            eps: None,
            depth: None,
            n,
            log_base: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub params: BoundParams,
}

impl BoundReport {
    /// `lhs <= rhs` up to `tolerance`, decided in the scalar's own arithmetic
    /// (exactly, for rationals).
    pub fn compare<T: Scalar>(
        check: &str,
        lhs: &T,
        rhs: &T,
        tolerance: f64,
        params: BoundParams,
    ) -> Self {
        let slack = rhs.clone() - lhs.clone();
        let pass = slack >= -T::from_f64(tolerance);
        BoundReport {
            check: check.to_string(),
            lhs: lhs.to_f64(),
            rhs: rhs.to_f64(),
            slack: slack.to_f64(),
            tolerance,
            pass,
            params,
        }
    }
}

/// Both halves of `max_k p^k L^k <= L_p <= n max_k p^k L^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSandwichReport {
    pub lower: BoundReport,
    pub upper: BoundReport,
}

impl LpSandwichReport {
    pub fn pass(&self) -> bool {
        self.lower.pass && self.upper.pass
    }
}

pub fn check_lp_sandwich<T: Scalar>(lp: &LevelProfile<T>, p: &T) -> Result<LpSandwichReport> {
    if *p <= T::zero() || *p > T::one() {
        return Err(Error::InvalidParameter(format!(
            "damping {p:?} outside (0, 1]"
        )));
    }
    let mut power = T::one();
    let mut max_term = T::zero();
    let mut damped = T::zero();
    for v in lp.abs_mass.iter().skip(1) {
        power = power * p.clone();
        let term = power.clone() * v.clone();
        if term > max_term {
            max_term = term.clone();
        }
        damped = damped + term;
    }
    let n_times = max_term.clone() * T::from_f64(lp.n as f64);
    let params = BoundParams {
        p: Some(p.to_f64()),
        ..BoundParams::new(lp.n)
    };
    let tol = if T::EXACT { 0.0 } else { BOUND_TOLERANCE };
    Ok(LpSandwichReport {
        lower: BoundReport::compare("lp_sandwich_lower", &max_term, &damped, tol, params.clone()),
        upper: BoundReport::compare("lp_sandwich_upper", &damped, &n_times, tol, params),
    })
}

/// The largest damping the main bound allows: `1 / (9 log(4^D n / eps))^D`.
pub fn mainbound_p(n: usize, eps: f64, depth: usize) -> f64 {
    1.0 / mainbound_log_factor(n, eps, depth).powi(depth as i32)
}

/// `9 log₂(4^D n / eps)`.
pub(crate) fn mainbound_log_factor(n: usize, eps: f64, depth: usize) -> f64 {
    9.0 * (2.0 * depth as f64 + (n as f64).log2() - eps.log2())
}

/// Evaluates
/// `L_p(F) <= p min(F̂[0], 1 - F̂[0]) (9 log(4^D n/eps))^D + eps`
/// at the largest admissible `p`. A formula of depth 0 is treated as depth 1.
pub fn check_mainbound(c: &Circuit, eps: f64) -> Result<BoundReport> {
    let n = c.n();
    if n == 0 {
        return Err(Error::InvalidParameter("circuit has no inputs".into()));
    }
    if !(eps > 0.0 && eps <= 1.0 / n as f64) {
        return Err(Error::InvalidParameter(format!(
            "eps = {eps} must lie in (0, 1/n] with n = {n}"
        )));
    }
    let depth = c.depth().max(1);
    let p = mainbound_p(n, eps, depth);
    let profile = level_profile_recursive::<f64>(c)?;
    let lhs = damped_unchecked(&profile.abs_mass, &p);
    let mean = c.mean().to_f64();
    let rhs =
        p * mean.min(1.0 - mean) * mainbound_log_factor(n, eps, depth).powi(depth as i32) + eps;
    let params = BoundParams {
        p: Some(p),
        eps: Some(eps),
        depth: Some(depth),
        n,
        log_base: 2,
    };
    Ok(BoundReport::compare(
        "mainbound",
        &lhs,
        &rhs,
        BOUND_TOLERANCE,
        params,
    ))
}

/// Empirical constant in `L^k(F) <= (g log^{D-1} n)^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub n: usize,
    pub depth: usize,
    /// `(L^k)^{1/k}` for `k = 1..=n`.
    pub level_roots: Vec<f64>,
    pub g: f64,
}

pub fn check_growth_corollary(c: &Circuit) -> Result<GrowthReport> {
    let n = c.n();
    if n < 2 {
        return Err(Error::InvalidParameter("growth report needs n >= 2".into()));
    }
    let depth = c.depth().max(1);
    let profile = level_profile_recursive::<f64>(c)?;
    let level_roots: Vec<f64> = profile
        .abs_mass
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &v)| v.powf(1.0 / k as f64))
        .collect();
    let max_root = level_roots.iter().copied().fold(0.0, f64::max);
    let g = max_root / (n as f64).log2().powi(depth as i32 - 1);
    Ok(GrowthReport {
        n,
        depth,
        level_roots,
        g,
    })
}

/// The three routes to `|E_X[F] - E_U[F]|` for a coin of bias `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct GapRoutes<T> {
    /// `|Σ_{k≥1} A^k p^k|` from the recursive signed level sums.
    pub signed: T,
    /// Difference of exact acceptance probabilities.
    pub measure: T,
    /// `|Σ_{s≠0} F̂[s] p^{|s|}|` from the brute-force spectrum, small `n` only.
    pub spectral: Option<T>,
}

impl<T: Scalar> GapRoutes<T> {
    pub fn max_disagreement(&self) -> T {
        let mut worst = (self.signed.clone() - self.measure.clone()).abs();
        if let Some(s) = &self.spectral {
            for other in [&self.signed, &self.measure] {
                let d = (s.clone() - other.clone()).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// Coin convention: `E[(-1)^{x_i}] = p`, so `E_X[χ_s] = p^{|s|}`.
pub fn biased_gap_routes<T: Scalar>(c: &Circuit, p: &T) -> Result<GapRoutes<T>> {
    let coin = BiasVector::coin(c.n(), p.clone())?;
    let profile = level_profile_recursive::<T>(c)?;
    let signed = damped_unchecked(&profile.signed_sum, p).abs();
    let measure = (acceptance_probability(c, &coin)?
        - acceptance_probability(c, &BiasVector::uniform(c.n()))?)
    .abs();
    let spectral = if c.n() <= CROSSCHECK_MAX_N {
        let table = wht_bruteforce(c)?;
        let powers: Vec<T> = (0..=c.n()).map(|k| p.pow_u(k)).collect();
        let scale = T::from_f64((c.n() as f64).exp2());
        let total = table
            .walsh()
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &w)| w != 0)
            .fold(T::zero(), |acc, (s, &w)| {
                acc + T::from_f64(w as f64) * powers[s.count_ones() as usize].clone()
            });
        Some((total / scale).abs())
    } else {
        None
    };
    Ok(GapRoutes {
        signed,
        measure,
        spectral,
    })
}

/// `|E_X[F] - E_U[F]|` for a coin of bias `p`, after checking that all
/// available routes agree to [`FLOAT_TOLERANCE`].
pub fn biased_gap(c: &Circuit, p: f64) -> Result<f64> {
    let routes = biased_gap_routes::<f64>(c, &p)?;
    if routes.max_disagreement() > FLOAT_TOLERANCE {
        return Err(Error::RouteMismatch {
            signed: routes.signed,
            measure: routes.measure,
            spectral: routes.spectral,
        });
    }
    Ok(routes.signed)
}

/// Exact variant of [`biased_gap`]; all routes must agree exactly.
pub fn biased_gap_exact(c: &Circuit, p: &Rational) -> Result<Rational> {
    let routes = biased_gap_routes::<Rational>(c, p)?;
    if routes.max_disagreement() != Rational::from_integer(0.into()) {
        return Err(Error::RouteMismatch {
            signed: routes.signed.to_f64(),
            measure: routes.measure.to_f64(),
            spectral: routes.spectral.as_ref().map(Scalar::to_f64),
        });
    }
    Ok(routes.signed)
}
