//! Exact Fourier analysis of read-once formulas.
//!
//! Two independent routes to the level masses `L^k(F) = Σ_{|s|=k} |F̂[s]|`:
//!
//! - [`wht_bruteforce`] materialises the truth table and runs a fast
//!   Walsh–Hadamard butterfly, `O(n 2^n)`;
//! - [`level_profile_recursive`] works bottom-up on the formula. For an AND
//!   of children on disjoint variables, `F̂[s∘t] = F̂₁[s]·F̂₂[t]`, so both the
//!   absolute and the signed level generating polynomials multiply. NOT maps
//!   `F ↦ 1 - F`, and OR is NOT∘AND∘NOT.
//!
//! Characters follow `χ_s(x) = (-1)^{s·x}` and `F̂[s] = E_x[F(x) χ_s(x)]`.

pub(crate) mod bounds;

use crate::circuit::{Circuit, Node};
use crate::error::{Error, Result};
use crate::scalar::{dyadic, Rational, Scalar};

pub use bounds::{
    biased_gap, biased_gap_exact, biased_gap_routes, check_growth_corollary, check_lp_sandwich,
    check_mainbound, mainbound_p, BoundParams, BoundReport, GapRoutes, GrowthReport,
    LpSandwichReport, BOUND_TOLERANCE, CROSSCHECK_MAX_N, FLOAT_TOLERANCE,
};

/// Default cap on `n` for the brute-force transform.
pub const DEFAULT_WHT_CAP: usize = 24;

/// All `2^n` Fourier coefficients, stored as integer Walsh sums
/// `W[s] = Σ_x F(x) χ_s(x) = 2^n F̂[s]` so that every entry is exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralTable {
    n: usize,
    walsh: Vec<i64>,
}

impl SpectralTable {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `W[s] = 2^n F̂[s]`.
    pub fn walsh(&self) -> &[i64] {
        &self.walsh
    }

    pub fn coefficient(&self, s: usize) -> Rational {
        dyadic(i128::from(self.walsh[s]), self.n)
    }

    pub fn coefficient_f64(&self, s: usize) -> f64 {
        self.walsh[s] as f64 / (self.n as f64).exp2()
    }

    /// `Σ_s F̂[s]² = F̂[0]`, checked in integers.
    pub fn parseval_holds(&self) -> bool {
        let sum_sq: i128 = self
            .walsh
            .iter()
            .map(|&w| i128::from(w) * i128::from(w))
            .sum();
        sum_sq == (i128::from(self.walsh[0]) << self.n)
    }

    /// Per-level sums of `|W[s]|` and `W[s]`.
    fn level_walsh_sums(&self) -> (Vec<i128>, Vec<i128>) {
        let mut abs = vec![0i128; self.n + 1];
        let mut signed = vec![0i128; self.n + 1];
        for (s, &w) in self.walsh.iter().enumerate() {
            let k = s.count_ones() as usize;
            abs[k] += i128::from(w.abs());
            signed[k] += i128::from(w);
        }
        (abs, signed)
    }

    pub fn level_profile(&self) -> LevelProfile<Rational> {
        let (abs, signed) = self.level_walsh_sums();
        LevelProfile {
            n: self.n,
            abs_mass: abs.into_iter().map(|v| dyadic(v, self.n)).collect(),
            signed_sum: signed.into_iter().map(|v| dyadic(v, self.n)).collect(),
        }
    }

    pub fn level_profile_f64(&self) -> LevelProfile<f64> {
        let (abs, signed) = self.level_walsh_sums();
        let scale = (self.n as f64).exp2();
        LevelProfile {
            n: self.n,
            abs_mass: abs.into_iter().map(|v| v as f64 / scale).collect(),
            signed_sum: signed.into_iter().map(|v| v as f64 / scale).collect(),
        }
    }
}

/// In-place unnormalised Walsh–Hadamard transform; `data.len()` must be a
/// power of two.
pub fn fwht(data: &mut [i64]) {
    let len = data.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for block in data.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// The exact spectrum via the truth table, for `n <= DEFAULT_WHT_CAP`.
pub fn wht_bruteforce(c: &Circuit) -> Result<SpectralTable> {
    wht_bruteforce_capped(c, DEFAULT_WHT_CAP)
}

pub fn wht_bruteforce_capped(c: &Circuit, cap: usize) -> Result<SpectralTable> {
    if c.n() > cap {
        return Err(Error::CapExceeded {
            what: "n",
            value: c.n(),
            cap,
        });
    }
    let tt = c.truth_table()?;
    let mut walsh: Vec<i64> = (0..tt.len()).map(|x| i64::from(tt.get(x))).collect();
    fwht(&mut walsh);
    Ok(SpectralTable { n: c.n(), walsh })
}

/// Spectrum of an arbitrary 0/1 table indexed by packed inputs.
pub fn spectrum_of_table(n: usize, values: impl IntoIterator<Item = bool>) -> SpectralTable {
    let mut walsh: Vec<i64> = values.into_iter().map(i64::from).collect();
    assert_eq!(walsh.len(), 1 << n);
    fwht(&mut walsh);
    SpectralTable { n, walsh }
}

/// Level masses `L^k` and signed level sums `A^k = Σ_{|s|=k} F̂[s]`,
/// for `k = 0..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelProfile<T> {
    pub n: usize,
    pub abs_mass: Vec<T>,
    pub signed_sum: Vec<T>,
}

impl<T: Scalar> LevelProfile<T> {
    /// `F̂[0]`.
    pub fn mean(&self) -> T {
        self.signed_sum[0].clone()
    }

    /// `Σ_{k≥1} L^k`, the Fourier mass without the constant term.
    pub fn total_mass(&self) -> T {
        self.abs_mass
            .iter()
            .skip(1)
            .fold(T::zero(), |acc, v| acc + v.clone())
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> LevelProfile<U> {
        LevelProfile {
            n: self.n,
            abs_mass: self.abs_mass.iter().map(&f).collect(),
            signed_sum: self.signed_sum.iter().map(&f).collect(),
        }
    }

    pub fn to_f64(&self) -> LevelProfile<f64> {
        self.map(Scalar::to_f64)
    }
}

/// Level profile from the formula structure; no exponential blow-up.
pub fn level_profile_recursive<T: Scalar>(c: &Circuit) -> Result<LevelProfile<T>> {
    level_profile_truncated(c, usize::MAX)
}

/// Like [`level_profile_recursive`] but only keeps levels `0..=max_level`
/// (higher levels are reported as zero).
pub fn level_profile_truncated<T: Scalar>(
    c: &Circuit,
    max_level: usize,
) -> Result<LevelProfile<T>> {
    if !c.is_read_once() {
        return Err(Error::InvalidParameter("circuit is not read-once".into()));
    }
    let mut poly = node_poly::<T>(c.root(), max_level);
    let n = c.n();
    poly.abs.resize(n + 1, T::zero());
    poly.signed.resize(n + 1, T::zero());
    Ok(LevelProfile {
        n,
        abs_mass: poly.abs,
        signed_sum: poly.signed,
    })
}

struct LevelPoly<T> {
    abs: Vec<T>,
    signed: Vec<T>,
}

impl<T: Scalar> LevelPoly<T> {
    fn constant(v: T) -> Self {
        LevelPoly {
            abs: vec![v.clone()],
            signed: vec![v],
        }
    }

    /// `F ↦ 1 - F`: only the constant coefficient changes magnitude.
    fn negate(mut self) -> Self {
        self.signed[0] = T::one() - self.signed[0].clone();
        self.abs[0] = self.signed[0].clone();
        for v in self.signed.iter_mut().skip(1) {
            *v = -v.clone();
        }
        self
    }
}

fn convolve<T: Scalar>(a: &[T], b: &[T], max_level: usize) -> Vec<T> {
    let len = (a.len() + b.len() - 1).min(max_level.saturating_add(1));
    let mut out = vec![T::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    out
}

fn and_poly<T: Scalar>(children: Vec<LevelPoly<T>>, max_level: usize) -> LevelPoly<T> {
    children
        .into_iter()
        .fold(LevelPoly::constant(T::one()), |acc, c| LevelPoly {
            abs: convolve(&acc.abs, &c.abs, max_level),
            signed: convolve(&acc.signed, &c.signed, max_level),
        })
}

fn node_poly<T: Scalar>(node: &Node, max_level: usize) -> LevelPoly<T> {
    match node {
        Node::Const(b) => LevelPoly::constant(if *b { T::one() } else { T::zero() }),
        Node::Leaf { negated, .. } => {
            // x = 1/2 - χ/2 and ¬x = 1/2 + χ/2.
            let half = T::half();
            let a1 = if *negated {
                half.clone()
            } else {
                -half.clone()
            };
            let mut p = LevelPoly {
                abs: vec![half.clone(), half.clone()],
                signed: vec![half, a1],
            };
            p.abs.truncate(max_level.saturating_add(1));
            p.signed.truncate(max_level.saturating_add(1));
            p
        }
        Node::Not(c) => node_poly::<T>(c, max_level).negate(),
        Node::And(cs) => and_poly(
            cs.iter().map(|c| node_poly(c, max_level)).collect(),
            max_level,
        ),
        Node::Or(cs) => and_poly(
            cs.iter()
                .map(|c| node_poly::<T>(c, max_level).negate())
                .collect(),
            max_level,
        )
        .negate(),
    }
}

/// `L_p = Σ_{k≥1} p^k L^k`.
pub fn damped_mass<T: Scalar>(lp: &LevelProfile<T>, p: &T) -> Result<T> {
    if *p < T::zero() || *p > T::one() {
        return Err(Error::InvalidParameter(format!(
            "damping {p:?} outside [0, 1]"
        )));
    }
    Ok(damped_unchecked(&lp.abs_mass, p))
}

/// `Σ_{k≥1} p^k v_k` by Horner's rule.
pub(crate) fn damped_unchecked<T: Scalar>(levels: &[T], p: &T) -> T {
    levels
        .iter()
        .skip(1)
        .rev()
        .fold(T::zero(), |acc, v| (acc + v.clone()) * p.clone())
}
