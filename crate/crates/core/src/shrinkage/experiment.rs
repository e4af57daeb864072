use serde::{Deserialize, Serialize};

use super::{build_sandwich, PRegularSampler, SandwichPair};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stats::{quantile_sorted, wilson_interval, Z95};

/// Default `c` in the size threshold `c (log₂ n)^D`.
pub const DEFAULT_THRESHOLD_SCALE: f64 = 50.0;

/// `scale (log₂ n)^D`, with `log₂ n` floored at 1 and `D` at 1.
pub fn shrink_threshold(n: usize, depth: usize, scale: f64) -> f64 {
    scale * (n as f64).log2().max(1.0).powi(depth.max(1) as i32)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShrinkConfig {
    pub p: f64,
    pub eps: f64,
    pub trials: u64,
    pub seed: u64,
    pub threshold_scale: f64,
}

impl ShrinkConfig {
    pub fn new(p: f64, eps: f64, trials: u64, seed: u64) -> Self {
        ShrinkConfig {
            p,
            eps,
            trials,
            seed,
            threshold_scale: DEFAULT_THRESHOLD_SCALE,
        }
    }
}

/// Sizes of both restricted approximators in one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSizes {
    pub trial: u64,
    pub lower_leaves: usize,
    pub lower_fanin: usize,
    pub lower_constant: bool,
    pub upper_leaves: usize,
    pub upper_fanin: usize,
    pub upper_constant: bool,
}

/// Restricts both sides of `pair` with the restriction of `trial`.
pub fn shrink_trial(pair: &SandwichPair, s: &PRegularSampler, trial: u64) -> Result<TrialSizes> {
    let mask = s.sample(trial);
    let lo = pair.lower.restricted_shape(&mask)?;
    let up = pair.upper.restricted_shape(&mask)?;
    Ok(TrialSizes {
        trial,
        lower_leaves: lo.leaves,
        lower_fanin: lo.max_fanin,
        lower_constant: lo.constant.is_some(),
        upper_leaves: up.leaves,
        upper_fanin: up.max_fanin,
        upper_constant: up.constant.is_some(),
    })
}

/// Distribution of one side's restricted size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub mean_leaves: f64,
    pub max_leaves: usize,
    pub quantile_leaves: usize,
    pub mean_fanin: f64,
    pub max_fanin: usize,
    pub quantile_fanin: usize,
    pub nonconstant: u64,
    pub nonconstant_fraction: f64,
    pub nonconstant_ci95: [f64; 2],
}

impl SizeSummary {
    fn from_columns(
        mut leaves: Vec<usize>,
        mut fanin: Vec<usize>,
        nonconstant: u64,
        q: f64,
    ) -> Self {
        let trials = leaves.len() as u64;
        let mean = |v: &[usize]| {
            if v.is_empty() {
                0.0
            } else {
                v.iter().sum::<usize>() as f64 / v.len() as f64
            }
        };
        let (mean_leaves, mean_fanin) = (mean(&leaves), mean(&fanin));
        leaves.sort_unstable();
        fanin.sort_unstable();
        let (lo, hi) = wilson_interval(nonconstant, trials, Z95);
        SizeSummary {
            mean_leaves,
            max_leaves: leaves.last().copied().unwrap_or(0),
            quantile_leaves: quantile_sorted(&leaves, q).unwrap_or(0),
            mean_fanin,
            max_fanin: fanin.last().copied().unwrap_or(0),
            quantile_fanin: quantile_sorted(&fanin, q).unwrap_or(0),
            nonconstant,
            nonconstant_fraction: if trials == 0 {
                0.0
            } else {
                nonconstant as f64 / trials as f64
            },
            nonconstant_ci95: [lo, hi],
        }
    }
}

/// Restricted sizes of the sandwiching approximators over many trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShrinkReport {
    pub n: usize,
    pub depth: usize,
    pub source_leaves: usize,
    pub config: ShrinkConfig,
    pub gap: f64,
    /// `1 - 2 eps`.
    pub quantile_level: f64,
    pub threshold: f64,
    pub lower: SizeSummary,
    pub upper: SizeSummary,
    /// Both quantiles are within the threshold.
    pub within_threshold: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sizes: Vec<TrialSizes>,
}

impl ShrinkReport {
    /// Summarises trials computed elsewhere; `sizes` must be ordered by trial.
    pub fn from_trials(
        c: &Circuit,
        pair: &SandwichPair,
        config: ShrinkConfig,
        sizes: Vec<TrialSizes>,
    ) -> Self {
        let q = (1.0 - 2.0 * config.eps).clamp(0.0, 1.0);
        let lower = SizeSummary::from_columns(
            sizes.iter().map(|t| t.lower_leaves).collect(),
            sizes.iter().map(|t| t.lower_fanin).collect(),
            sizes.iter().filter(|t| !t.lower_constant).count() as u64,
            q,
        );
        let upper = SizeSummary::from_columns(
            sizes.iter().map(|t| t.upper_leaves).collect(),
            sizes.iter().map(|t| t.upper_fanin).collect(),
            sizes.iter().filter(|t| !t.upper_constant).count() as u64,
            q,
        );
        let threshold = shrink_threshold(c.n(), c.depth(), config.threshold_scale);
        ShrinkReport {
            n: c.n(),
            depth: c.depth(),
            source_leaves: c.leaf_count(),
            config,
            gap: pair.gap.to_f64(),
            quantile_level: q,
            threshold,
            within_threshold: lower.quantile_leaves as f64 <= threshold
                && upper.quantile_leaves as f64 <= threshold,
            lower,
            upper,
            sizes,
        }
    }
}

/// Builds the sandwich of `c` and measures it under `config.trials` truly
/// random `p`-regular restrictions.
pub fn shrink_experiment(c: &Circuit, config: &ShrinkConfig) -> Result<ShrinkReport> {
    if !config.threshold_scale.is_finite() || config.threshold_scale < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "threshold scale {} must be a nonnegative number",
            config.threshold_scale
        )));
    }
    let pair = build_sandwich(c, config.eps)?;
    let s = PRegularSampler::new(c.n(), config.p, config.seed)?;
    let sizes = (0..config.trials)
        .map(|t| shrink_trial(&pair, &s, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(ShrinkReport::from_trials(c, &pair, *config, sizes))
}
