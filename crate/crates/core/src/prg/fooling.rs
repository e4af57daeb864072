use std::ops::Range;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::smallbias::{seed_words, Expander};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::fourier::{fwht, level_profile_recursive, BoundParams, BoundReport};
use crate::scalar::{Rational, Scalar};
use crate::stats::{wilson_interval, Z95};

/// Largest seed enumerated by exhaustive fooling measurements.
pub const EXHAUSTIVE_SEED_CAP: usize = 24;
/// Largest seed enumerated by [`measure_bias`].
pub const BIAS_SEED_CAP: usize = 26;
/// Largest output length for which the full output histogram is kept.
pub const OUTPUT_CAP: usize = 22;
/// Largest `n` at which sandwich ordering is verified on every input.
pub const SANDWICH_CHECK_CAP: usize = 16;
/// Seeds per Monte-Carlo block; each block has its own RNG stream.
pub const MC_BLOCK: u64 = 4096;

/// Histogram of generator outputs over a set of seeds, indexed by the output
/// packed as an integer (output bit `i` is bit `i`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputDistribution {
    n: usize,
    seeds: u64,
    counts: Vec<u64>,
}

impl OutputDistribution {
    /// Enumerates every seed of `gen`.
    pub fn exhaustive<E: Expander + ?Sized>(gen: &E, seed_cap: usize) -> Result<Self> {
        Self::check_caps(gen, seed_cap)?;
        Ok(Self::from_seed_range(gen, 0..1u64 << gen.seed_bits()))
    }

    pub fn check_caps<E: Expander + ?Sized>(gen: &E, seed_cap: usize) -> Result<()> {
        if gen.seed_bits() > seed_cap {
            return Err(Error::CapExceeded {
                what: "seed bits",
                value: gen.seed_bits(),
                cap: seed_cap,
            });
        }
        if gen.output_len() > OUTPUT_CAP {
            return Err(Error::CapExceeded {
                what: "output length",
                value: gen.output_len(),
                cap: OUTPUT_CAP,
            });
        }
        Ok(())
    }

    /// Histogram over the seeds in `range`; partial histograms over disjoint
    /// ranges combine with [`OutputDistribution::merge`].
    pub fn from_seed_range<E: Expander + ?Sized>(gen: &E, range: Range<u64>) -> Self {
        let n = gen.output_len();
        let mut counts = vec![0u64; 1 << n];
        let mut out = vec![false; n];
        let mut seed = [0u64];
        for s in range.clone() {
            seed[0] = s;
            gen.expand_into(&seed, &mut out);
            let x = out
                .iter()
                .enumerate()
                .fold(0usize, |acc, (i, &b)| acc | (usize::from(b) << i));
            counts[x] += 1;
        }
        OutputDistribution {
            n,
            seeds: range.end - range.start,
            counts,
        }
    }

    pub fn merge(&mut self, other: &OutputDistribution) {
        assert_eq!(self.n, other.n);
        self.seeds += other.seeds;
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seeds(&self) -> u64 {
        self.seeds
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `E[F(G(seed))]` over the enumerated seeds, exactly.
    pub fn expectation(&self, c: &Circuit) -> Result<Rational> {
        if c.n() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: c.n(),
            });
        }
        let tt = c.truth_table()?;
        let hits: u64 = self
            .counts
            .iter()
            .enumerate()
            .filter(|&(x, _)| tt.get(x))
            .map(|(_, &k)| k)
            .sum();
        Ok(Rational::new(hits.into(), self.seeds.into()))
    }

    /// `max_{s≠0} |E[χ_s(output)]|`, exactly.
    pub fn bias(&self) -> Rational {
        let mut w: Vec<i64> = self.counts.iter().map(|&k| k as i64).collect();
        fwht(&mut w);
        let top = w
            .iter()
            .skip(1)
            .map(|v| v.unsigned_abs())
            .max()
            .unwrap_or(0);
        Rational::new(top.into(), self.seeds.into())
    }
}

/// Exact bias of `gen` by enumerating all `2^{seed_bits}` seeds.
pub fn measure_bias<E: Expander + ?Sized>(gen: &E) -> Result<Rational> {
    Ok(OutputDistribution::exhaustive(gen, BIAS_SEED_CAP)?.bias())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FoolingMode {
    Exhaustive,
    Mc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoolingReport {
    pub mode: FoolingMode,
    pub generator: String,
    pub n: usize,
    pub seed_bits: usize,
    /// Seeds enumerated or sampled.
    pub seeds: u64,
    /// `E_U[F]`, exact.
    pub uniform_mean: f64,
    pub generator_mean: f64,
    pub abs_error: f64,
    /// Exact error as `p/q` in exhaustive mode.
    pub abs_error_exact: Option<String>,
    /// Wilson 95% interval for the generator mean in Monte-Carlo mode.
    pub ci95: Option<[f64; 2]>,
}

impl FoolingReport {
    pub fn from_distribution<E: Expander + ?Sized>(
        c: &Circuit,
        gen: &E,
        dist: &OutputDistribution,
    ) -> Result<Self> {
        let uniform = c.mean();
        let generated = dist.expectation(c)?;
        let err = (&generated - &uniform).abs();
        Ok(FoolingReport {
            mode: FoolingMode::Exhaustive,
            generator: gen.label(),
            n: c.n(),
            seed_bits: gen.seed_bits(),
            seeds: dist.seeds(),
            uniform_mean: Scalar::to_f64(&uniform),
            generator_mean: Scalar::to_f64(&generated),
            abs_error: Scalar::to_f64(&err),
            abs_error_exact: Some(err.to_string()),
            ci95: None,
        })
    }

    pub fn from_counts<E: Expander + ?Sized>(
        c: &Circuit,
        gen: &E,
        accepted: u64,
        trials: u64,
    ) -> Self {
        let uniform = Scalar::to_f64(&c.mean());
        let mean = if trials == 0 {
            0.0
        } else {
            accepted as f64 / trials as f64
        };
        let (lo, hi) = wilson_interval(accepted, trials, Z95);
        FoolingReport {
            mode: FoolingMode::Mc,
            generator: gen.label(),
            n: c.n(),
            seed_bits: gen.seed_bits(),
            seeds: trials,
            uniform_mean: uniform,
            generator_mean: mean,
            abs_error: (mean - uniform).abs(),
            abs_error_exact: None,
            ci95: Some([lo, hi]),
        }
    }
}

/// Number of Monte-Carlo blocks covering `trials` seeds.
pub fn mc_blocks(trials: u64) -> u64 {
    trials.div_ceil(MC_BLOCK)
}

/// Accepting seeds in Monte-Carlo block `block`. Block `b` draws from
/// stream `b` of a ChaCha8 generator keyed by `master`, so the total does
/// not depend on how blocks are scheduled.
pub fn mc_block_accepts<E: Expander + ?Sized>(
    c: &Circuit,
    gen: &E,
    master: u64,
    block: u64,
    trials: u64,
) -> u64 {
    let len = MC_BLOCK.min(trials.saturating_sub(block * MC_BLOCK));
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(block);
    let bits = gen.seed_bits();
    let words = seed_words(bits);
    let tail = bits % 64;
    let mut seed = vec![0u64; words];
    let mut out = vec![false; gen.output_len()];
    let mut accepted = 0;
    for _ in 0..len {
        rng.fill(&mut seed[..]);
        if tail != 0 {
            seed[words - 1] &= (1u64 << tail) - 1;
        }
        if bits == 0 {
            seed[0] = 0;
        }
        gen.expand_into(&seed, &mut out);
        accepted += u64::from(c.root().eval_with(|i| out[i]));
    }
    accepted
}

/// `|E[F(G(U_m))] - E[F(U_n)]|`, by enumeration or by sampling `trials`
/// seeds.
pub fn fooling_error<E: Expander + ?Sized>(
    c: &Circuit,
    gen: &E,
    mode: FoolingMode,
    trials: u64,
    master_seed: u64,
) -> Result<FoolingReport> {
    if gen.output_len() != c.n() {
        return Err(Error::LengthMismatch {
            expected: c.n(),
            got: gen.output_len(),
        });
    }
    match mode {
        FoolingMode::Exhaustive => {
            let dist = OutputDistribution::exhaustive(gen, EXHAUSTIVE_SEED_CAP)?;
            FoolingReport::from_distribution(c, gen, &dist)
        }
        FoolingMode::Mc => {
            let accepted = (0..mc_blocks(trials))
                .map(|b| mc_block_accepts(c, gen, master_seed, b, trials))
                .sum();
            Ok(FoolingReport::from_counts(c, gen, accepted, trials))
        }
    }
}

/// Everything that enters `|E_X F - E_U F| <= δ + ε max(L(F₊), L(F₋))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichFoolingReport {
    /// `E_U[F₊ - F₋]`.
    pub delta: f64,
    /// Measured bias of the generator.
    pub bias: f64,
    /// Fourier mass without the constant term.
    pub l_plus: f64,
    pub l_minus: f64,
    pub bound: BoundReport,
}

/// Checks `F₋ <= F <= F₊` on every input.
pub fn check_pointwise_sandwich(c: &Circuit, fplus: &Circuit, fminus: &Circuit) -> Result<()> {
    for other in [fplus, fminus] {
        if other.n() != c.n() {
            return Err(Error::LengthMismatch {
                expected: c.n(),
                got: other.n(),
            });
        }
    }
    if c.n() > SANDWICH_CHECK_CAP {
        return Err(Error::CapExceeded {
            what: "n",
            value: c.n(),
            cap: SANDWICH_CHECK_CAP,
        });
    }
    let (tf, tu, tl) = (
        c.truth_table()?,
        fplus.truth_table()?,
        fminus.truth_table()?,
    );
    for x in 0..tf.len() {
        let (lower, value, upper) = (tl.get(x), tf.get(x), tu.get(x));
        if lower & !value || value & !upper {
            let input = (0..c.n())
                .map(|i| if (x >> i) & 1 == 1 { '1' } else { '0' })
                .collect();
            return Err(Error::SandwichViolation {
                input,
                lower,
                value,
                upper,
            });
        }
    }
    Ok(())
}

/// Verifies the sandwich fooling inequality exactly for the distribution
/// `dist`, with `ε` its measured bias.
pub fn check_sandwich_fooling(
    c: &Circuit,
    fplus: &Circuit,
    fminus: &Circuit,
    dist: &OutputDistribution,
) -> Result<SandwichFoolingReport> {
    check_pointwise_sandwich(c, fplus, fminus)?;
    let delta = fplus.mean() - fminus.mean();
    let bias = dist.bias();
    let l_plus = level_profile_recursive::<Rational>(fplus)?.total_mass();
    let l_minus = level_profile_recursive::<Rational>(fminus)?.total_mass();
    let lhs = (dist.expectation(c)? - c.mean()).abs();
    let l_max = if l_plus > l_minus { &l_plus } else { &l_minus };
    let rhs = &delta + &bias * l_max;
    let params = BoundParams {
        eps: Some(Scalar::to_f64(&bias)),
        depth: Some(c.depth()),
        ..BoundParams::new(c.n())
    };
    let bound = BoundReport::compare("sandwich_fooling", &lhs, &rhs, 0.0, params);
    Ok(SandwichFoolingReport {
        delta: Scalar::to_f64(&delta),
        bias: Scalar::to_f64(&bias),
        l_plus: Scalar::to_f64(&l_plus),
        l_minus: Scalar::to_f64(&l_minus),
        bound,
    })
}

impl OutputDistribution {
    /// Whether every seed was counted and all mass sits on outputs.
    pub fn is_consistent(&self) -> bool {
        self.counts.iter().sum::<u64>() == self.seeds
            && !self.counts.is_empty()
            && !self.seeds.is_zero()
    }
}
