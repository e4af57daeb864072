use serde::{Deserialize, Serialize};

use super::smallbias::{seed_words, Expander, SmallBias};
use crate::circuit::RestrictionMask;
use crate::error::{Error, Result};

/// How the pseudorandom bits of one round are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RoundLayout {
    /// `a` selection blocks and one assignment block, each an independently
    /// seeded small-bias generator with `n` outputs.
    Independent { ell_select: u32, ell_assign: u32 },
    /// One small-bias block with `(a + 1) n` outputs per round: `a`
    /// selection strings followed by the assignment string.
    Joint { ell_round: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictionConfig {
    pub n: usize,
    /// Selection exponent: a free position is fixed in a round with
    /// probability about `2^{-a}`.
    pub a: u32,
    pub rounds: usize,
    pub layout: RoundLayout,
    /// Degree of the fallback block that fills positions still free after
    /// the last round.
    pub ell_final: u32,
}

/// `⌈2^a (2 log₂ n + log₂(1/ε))⌉`.
pub fn default_rounds(n: usize, a: u32, eps: f64) -> usize {
    let n = n.max(2) as f64;
    (f64::from(a).exp2() * (2.0 * n.log2() - eps.log2())).ceil() as usize
}

/// Smallest `ℓ` with `2^ℓ >= m`, at least 1.
pub fn min_ell(m: usize) -> u32 {
    (usize::BITS - m.saturating_sub(1).leading_zeros()).max(1)
}

impl RestrictionConfig {
    /// Default round count and block degrees `ℓ = ⌈log₂(n/ε)⌉` (never below
    /// what the output length requires).
    pub fn with_defaults(n: usize, a: u32, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eps = {eps} outside (0, 1)"
            )));
        }
        let ell = ((n as f64 / eps).log2().ceil() as u32).clamp(min_ell(n), 64);
        Ok(RestrictionConfig {
            n,
            a,
            rounds: default_rounds(n, a, eps),
            layout: RoundLayout::Independent {
                ell_select: ell,
                ell_assign: ell,
            },
            ell_final: ell,
        })
    }
}

/// Recursive pseudorandom-restriction generator.
///
/// Every position starts free. In each round a position still free is
/// fixed when all `a` of its selection bits are 1, and then takes its bit
/// from the round's assignment string (the first fixing wins). After the
/// last round, positions still free are filled from the fallback block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictionPrg {
    cfg: RestrictionConfig,
    select: Option<SmallBias>,
    assign: SmallBias,
    joint: Option<SmallBias>,
    fin: SmallBias,
    round_bits: usize,
}

impl RestrictionPrg {
    pub fn new(cfg: RestrictionConfig) -> Result<Self> {
        if cfg.n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        let n = cfg.n;
        let fin = SmallBias::new(cfg.ell_final, n)?;
        let (select, assign, joint, round_bits) = match cfg.layout {
            RoundLayout::Independent {
                ell_select,
                ell_assign,
            } => {
                let select = if cfg.a > 0 {
                    Some(SmallBias::new(ell_select, n)?)
                } else {
                    None
                };
                let assign = SmallBias::new(ell_assign, n)?;
                let bits =
                    cfg.a as usize * select.map_or(0, |s| s.seed_bits()) + assign.seed_bits();
                (select, assign, None, bits)
            }
            RoundLayout::Joint { ell_round } => {
                let width = (cfg.a as usize + 1)
                    .checked_mul(n)
                    .ok_or_else(|| Error::InvalidParameter("round too wide".into()))?;
                let joint = SmallBias::new(ell_round, width)?;
                let assign = SmallBias::new(ell_round, n)?;
                (None, assign, Some(joint), joint.seed_bits())
            }
        };
        Ok(RestrictionPrg {
            cfg,
            select,
            assign,
            joint,
            fin,
            round_bits,
        })
    }

    pub fn config(&self) -> &RestrictionConfig {
        &self.cfg
    }

    /// Seed bits consumed by one round.
    pub fn round_bits(&self) -> usize {
        self.round_bits
    }

    /// Fills `fixed` with this round's selection outcome and `assign` with
    /// its assignment string.
    fn round(&self, seed: &[u64], round: usize, fixed: &mut [bool], assign: &mut [bool]) {
        let n = self.cfg.n;
        let a = self.cfg.a as usize;
        let base = round * self.round_bits;
        fixed.iter_mut().for_each(|f| *f = true);
        match self.joint {
            Some(joint) => {
                let mut buf = vec![false; (a + 1) * n];
                joint.expand_at(seed, base, &mut buf);
                for chunk in buf[..a * n].chunks_exact(n) {
                    for (f, &s) in fixed.iter_mut().zip(chunk) {
                        *f &= s;
                    }
                }
                assign.copy_from_slice(&buf[a * n..]);
            }
            None => {
                if let Some(select) = self.select {
                    let mut buf = vec![false; n];
                    for k in 0..a {
                        select.expand_at(seed, base + k * select.seed_bits(), &mut buf);
                        for (f, &s) in fixed.iter_mut().zip(&buf) {
                            *f &= s;
                        }
                    }
                }
                let offset = base + a * self.select.map_or(0, |s| s.seed_bits());
                self.assign.expand_at(seed, offset, assign);
            }
        }
    }

    /// The restriction drawn in round `round` alone: positions fixed this
    /// round carry their assignment bit, all others stay free.
    pub fn round_restriction(&self, seed: &[u64], round: usize) -> Result<RestrictionMask> {
        self.check_seed(seed)?;
        if round >= self.cfg.rounds {
            return Err(Error::IndexOutOfRange(format!(
                "round {round} of {}",
                self.cfg.rounds
            )));
        }
        let n = self.cfg.n;
        let (mut fixed, mut assign) = (vec![false; n], vec![false; n]);
        self.round(seed, round, &mut fixed, &mut assign);
        RestrictionMask::new(fixed.iter().map(|f| !f).collect(), assign)
    }

    fn check_seed(&self, seed: &[u64]) -> Result<()> {
        let words = seed_words(self.seed_bits());
        if seed.len() != words {
            return Err(Error::LengthMismatch {
                expected: words,
                got: seed.len(),
            });
        }
        Ok(())
    }

    /// Expands `seed` into `out` and returns how many positions were still
    /// free when the fallback block was reached.
    pub fn expand_with_residual(&self, seed: &[u64], out: &mut [bool]) -> usize {
        let n = self.cfg.n;
        let mut free = vec![true; n];
        let (mut fixed, mut assign) = (vec![false; n], vec![false; n]);
        let mut remaining = n;
        for r in 0..self.cfg.rounds {
            if remaining == 0 {
                break;
            }
            self.round(seed, r, &mut fixed, &mut assign);
            for i in 0..n {
                if free[i] && fixed[i] {
                    free[i] = false;
                    out[i] = assign[i];
                    remaining -= 1;
                }
            }
        }
        if remaining > 0 {
            let mut fallback = vec![false; n];
            self.fin
                .expand_at(seed, self.cfg.rounds * self.round_bits, &mut fallback);
            for i in 0..n {
                if free[i] {
                    out[i] = fallback[i];
                }
            }
        }
        remaining
    }
}

impl Expander for RestrictionPrg {
    fn seed_bits(&self) -> usize {
        self.cfg.rounds * self.round_bits + self.fin.seed_bits()
    }

    fn output_len(&self) -> usize {
        self.cfg.n
    }

    fn expand_into(&self, seed: &[u64], out: &mut [bool]) {
        self.expand_with_residual(seed, out);
    }

    fn label(&self) -> String {
        let layout = match self.cfg.layout {
            RoundLayout::Independent {
                ell_select,
                ell_assign,
            } => format!("independent(ell_select={ell_select}, ell_assign={ell_assign})"),
            RoundLayout::Joint { ell_round } => format!("joint(ell_round={ell_round})"),
        };
        format!(
            "restriction(n={}, a={}, rounds={}, {layout}, ell_final={})",
            self.cfg.n, self.cfg.a, self.cfg.rounds, self.cfg.ell_final
        )
    }
}

/// Seed-length bookkeeping for a concrete instantiation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedAccount {
    pub n: usize,
    pub eps: f64,
    pub depth: usize,
    pub c_b: f64,
    pub c_a: f64,
    /// `b = c_b (log₂ n)^{D-1}`.
    pub b: f64,
    /// Branching-program width `D + 1`.
    pub w: usize,
    /// Selection exponent, `max(1, ⌈log₂ b⌉)`.
    pub a_select: u32,
    pub rounds: usize,
    /// Field degree of every block.
    pub ell: u32,
    pub round_bits: usize,
    pub final_bits: usize,
    /// Seed bits of the concrete layout.
    pub total_bits: usize,
    /// `b log₂ b log₂ n log₂(a b w² n / ε)`, with `log₂ b` floored at 1.
    pub generator_formula: f64,
    /// `(log₂ n)^D log₂(n/ε)`.
    pub corollary_formula: f64,
}

/// Instantiates the layout for `n`, `eps` and depth `D` and sets it beside
/// the asymptotic seed-length expressions. Reporting only; nothing is
/// asserted.
pub fn seed_length_account(
    n: usize,
    eps: f64,
    depth: usize,
    c_b: f64,
    c_a: f64,
) -> Result<SeedAccount> {
    if n < 2 || !(eps > 0.0 && eps < 1.0) || depth == 0 || c_b <= 0.0 || c_a <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need n >= 2, eps in (0,1), D >= 1 and positive constants; got n={n}, eps={eps}, D={depth}"
        )));
    }
    let log_n = (n as f64).log2();
    let b = c_b * log_n.powi(depth as i32 - 1);
    let w = depth + 1;
    let a_select = (b.log2().ceil().max(1.0)) as u32;
    let rounds = default_rounds(n, a_select, eps);
    let ell = ((rounds as f64 * n as f64 * b / eps).log2().ceil() as u32).clamp(min_ell(n), 64);
    let block = 2 * ell as usize;
    let round_bits = (a_select as usize + 1) * block;
    let total_bits = rounds * round_bits + block;
    let generator_formula =
        b * b.log2().max(1.0) * log_n * (c_a * b * (w * w) as f64 * n as f64 / eps).log2();
    let corollary_formula = log_n.powi(depth as i32) * (n as f64 / eps).log2();
    Ok(SeedAccount {
        n,
        eps,
        depth,
        c_b,
        c_a,
        b,
        w,
        a_select,
        rounds,
        ell,
        round_bits,
        final_bits: block,
        total_bits,
        generator_formula,
        corollary_formula,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seed_from(bits: u64, cfg: &RestrictionPrg) -> Vec<u64> {
        let mut s = vec![0u64; seed_words(cfg.seed_bits())];
        s[0] = bits;
        s
    }

    #[test]
    fn zero_selection_exponent_fixes_everything_in_round_one() {
        let cfg = RestrictionConfig {
            n: 10,
            a: 0,
            rounds: 3,
            layout: RoundLayout::Independent {
                ell_select: 4,
                ell_assign: 4,
            },
            ell_final: 4,
        };
        let g = RestrictionPrg::new(cfg).unwrap();
        assert_eq!(g.seed_bits(), 3 * 8 + 8);
        let block = SmallBias::new(4, 10).unwrap();
        for s in [0x5au64, 0xff, 0x1234, 0xabcdef] {
            let seed = seed_from(s, &g);
            let mut out = vec![false; 10];
            assert_eq!(g.expand_with_residual(&seed, &mut out), 0);
            assert_eq!(out, block.expand(&[s & 0xff]).unwrap());
        }
    }

    #[test]
    fn every_position_is_assigned_once() {
        let cfg = RestrictionConfig::with_defaults(20, 2, 0.1).unwrap();
        let g = RestrictionPrg::new(cfg).unwrap();
        let seed: Vec<u64> = (0..seed_words(g.seed_bits()) as u64)
            .map(|i| i.wrapping_mul(0x9e37_79b9_7f4a_7c15))
            .collect();
        let a = g.expand(&seed).unwrap();
        assert_eq!(a, g.expand(&seed).unwrap());
        assert_eq!(a.len(), 20);
        assert!(g.expand(&seed[1..]).is_err());
    }

    #[test]
    fn joint_layout_bits() {
        let cfg = RestrictionConfig {
            n: 12,
            a: 1,
            rounds: 1,
            layout: RoundLayout::Joint { ell_round: 5 },
            ell_final: 4,
        };
        let g = RestrictionPrg::new(cfg).unwrap();
        assert_eq!(g.seed_bits(), 10 + 8);
        let too_wide = RestrictionConfig {
            layout: RoundLayout::Joint { ell_round: 4 },
            ..cfg
        };
        assert!(RestrictionPrg::new(too_wide).is_err());
    }

    #[test]
    fn round_restriction_matches_expansion() {
        let cfg = RestrictionConfig {
            n: 8,
            a: 1,
            rounds: 1,
            layout: RoundLayout::Independent {
                ell_select: 3,
                ell_assign: 3,
            },
            ell_final: 3,
        };
        let g = RestrictionPrg::new(cfg).unwrap();
        for s in 0..(1u64 << 18) {
            if s % 997 != 0 {
                continue;
            }
            let seed = [s];
            let m = g.round_restriction(&seed, 0).unwrap();
            let mut out = vec![false; 8];
            let residual = g.expand_with_residual(&seed, &mut out);
            assert_eq!(residual, m.free_count());
            let fallback = SmallBias::new(3, 8).unwrap().expand(&[s >> 12]).unwrap();
            assert_eq!(out, m.select(&fallback));
        }
        assert!(g.round_restriction(&[0], 1).is_err());
    }

    #[test]
    fn default_rounds_formula() {
        // 2 (2 log₂ 16 + log₂ 4) = 20.
        assert_eq!(default_rounds(16, 1, 0.25), 20);
        assert_eq!(default_rounds(64, 0, 1.0 / 64.0), 18);
        assert_eq!(min_ell(1), 1);
        assert_eq!(min_ell(8), 3);
        assert_eq!(min_ell(9), 4);
    }

    #[test]
    fn seed_account_fixture() {
        let acc = seed_length_account(64, 1.0 / 64.0, 2, 1.0, 1.0).unwrap();
        // b = log₂ 64 = 6, a = ⌈log₂ 6⌉ = 3, R = 8 (12 + 6) = 144,
        // ℓ = ⌈log₂(144 · 64 · 6 · 64)⌉ = ⌈21.75⌉ = 22.
        assert_eq!(acc.b, 6.0);
        assert_eq!(acc.a_select, 3);
        assert_eq!(acc.rounds, 144);
        assert_eq!(acc.ell, 22);
        assert_eq!(acc.total_bits, 144 * 4 * 44 + 44);
        assert_eq!(acc.w, 3);
        assert!((acc.corollary_formula - 36.0 * 12.0).abs() < 1e-9);
    }

    #[test]
    fn seed_account_is_monotone_in_n() {
        for depth in 1..=3 {
            let mut prev = 0;
            for k in 2..=16 {
                let acc = seed_length_account(1 << k, 0.01, depth, 1.0, 1.0).unwrap();
                assert!(acc.total_bits >= prev, "depth {depth}, n = 2^{k}");
                prev = acc.total_bits;
            }
        }
        assert!(seed_length_account(1, 0.1, 1, 1.0, 1.0).is_err());
    }
}
