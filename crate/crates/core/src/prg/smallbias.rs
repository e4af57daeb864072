use super::gf2::Gf2Field;
use crate::error::{Error, Result};

/// A deterministic map from a seed of `seed_bits()` bits to
/// `output_len()` bits.
///
/// Seeds are little-endian bit strings packed into `u64` words: seed bit `k`
/// is bit `k % 64` of word `k / 64`.
pub trait Expander: Send + Sync {
    fn seed_bits(&self) -> usize;

    fn output_len(&self) -> usize;

    /// Writes the output for `seed` into `out`; the caller guarantees the
    /// seed has `seed_words(self.seed_bits())` words and `out` has
    /// `output_len()` entries.
    fn expand_into(&self, seed: &[u64], out: &mut [bool]);

    /// Short human-readable description for reports.
    fn label(&self) -> String;

    fn expand(&self, seed: &[u64]) -> Result<Vec<bool>> {
        let words = seed_words(self.seed_bits());
        if seed.len() != words {
            return Err(Error::LengthMismatch {
                expected: words,
                got: seed.len(),
            });
        }
        let mut out = vec![false; self.output_len()];
        self.expand_into(seed, &mut out);
        Ok(out)
    }
}

/// Number of `u64` words holding a seed of `bits` bits.
pub fn seed_words(bits: usize) -> usize {
    bits.div_ceil(64).max(1)
}

/// Reads `len <= 64` seed bits starting at bit `offset`.
pub fn read_bits(seed: &[u64], offset: usize, len: usize) -> u64 {
    if len == 0 {
        return 0;
    }
    let (w, b) = (offset / 64, offset % 64);
    let mut v = seed.get(w).copied().unwrap_or(0) >> b;
    if b != 0 && b + len > 64 {
        v |= seed.get(w + 1).copied().unwrap_or(0) << (64 - b);
    }
    if len == 64 {
        v
    } else {
        v & ((1u64 << len) - 1)
    }
}

/// The powering small-bias generator over `GF(2^ℓ)`.
///
/// The seed is a pair `(α, β)` of field elements (α in the low `ℓ` bits) and
/// output bit `i` is `⟨α^{i+1}, β⟩` over `GF(2)`. For `n <= 2^ℓ` every
/// nonzero character has bias at most `n / 2^ℓ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SmallBias {
    field: Gf2Field,
    n: usize,
}

impl SmallBias {
    pub fn new(ell: u32, n: usize) -> Result<Self> {
        let field = Gf2Field::new(ell)?;
        if ell < 64 && n as u128 > 1u128 << ell {
            return Err(Error::InvalidParameter(format!(
                "output length {n} exceeds 2^{ell}"
            )));
        }
        Ok(SmallBias { field, n })
    }

    pub fn ell(&self) -> u32 {
        self.field.degree()
    }

    /// The guaranteed bias bound `n / 2^ℓ`.
    pub fn bias_bound(&self) -> f64 {
        self.n as f64 / f64::from(self.ell()).exp2()
    }

    /// Expansion from an explicit `(α, β)` pair.
    pub fn expand_pair(&self, alpha: u64, beta: u64, out: &mut [bool]) {
        let mut power = alpha;
        for bit in out.iter_mut().take(self.n) {
            *bit = (power & beta).count_ones() & 1 == 1;
            power = self.field.mul(power, alpha);
        }
    }

    /// Expansion of the `2ℓ` seed bits found at `offset`.
    pub(crate) fn expand_at(&self, seed: &[u64], offset: usize, out: &mut [bool]) {
        let ell = self.ell() as usize;
        let alpha = read_bits(seed, offset, ell);
        let beta = read_bits(seed, offset + ell, ell);
        self.expand_pair(alpha, beta, out);
    }
}

impl Expander for SmallBias {
    fn seed_bits(&self) -> usize {
        2 * self.ell() as usize
    }

    fn output_len(&self) -> usize {
        self.n
    }

    fn expand_into(&self, seed: &[u64], out: &mut [bool]) {
        self.expand_at(seed, 0, out);
    }

    fn label(&self) -> String {
        format!("smallbias(ell={}, n={})", self.ell(), self.n)
    }
}

/// Output equals the seed: the truly uniform distribution on `n` bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UniformExpander {
    n: usize,
}

impl UniformExpander {
    pub fn new(n: usize) -> Self {
        UniformExpander { n }
    }
}

impl Expander for UniformExpander {
    fn seed_bits(&self) -> usize {
        self.n
    }

    fn output_len(&self) -> usize {
        self.n
    }

    fn expand_into(&self, seed: &[u64], out: &mut [bool]) {
        for (i, bit) in out.iter_mut().enumerate().take(self.n) {
            *bit = (seed[i / 64] >> (i % 64)) & 1 == 1;
        }
    }

    fn label(&self) -> String {
        format!("uniform(n={})", self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn read_bits_crosses_words() {
        let seed = [0xF000_0000_0000_0001u64, 0b1011];
        assert_eq!(read_bits(&seed, 0, 1), 1);
        assert_eq!(read_bits(&seed, 60, 4), 0xF);
        assert_eq!(read_bits(&seed, 62, 4), 0b11 | (0b11 << 2));
        assert_eq!(read_bits(&seed, 0, 64), seed[0]);
        assert_eq!(read_bits(&seed, 64, 0), 0);
    }

    #[test]
    fn zero_beta_gives_zero_output() {
        let g = SmallBias::new(8, 16).unwrap();
        for alpha in 0..256 {
            let out = g.expand(&[alpha]).unwrap();
            assert!(out.iter().all(|&b| !b));
        }
    }

    #[test]
    fn expansion_is_deterministic_and_checks_layout() {
        let g = SmallBias::new(6, 40).unwrap();
        let seed = [0b1011_0110_1101];
        assert_eq!(g.expand(&seed).unwrap(), g.expand(&seed).unwrap());
        assert!(g.expand(&[0, 0]).is_err());
        assert!(SmallBias::new(4, 17).is_err());
        assert!(SmallBias::new(4, 16).is_ok());
    }

    #[test]
    fn first_bit_is_inner_product_of_alpha_and_beta() {
        let g = SmallBias::new(5, 3).unwrap();
        let (alpha, beta) = (0b10110u64, 0b00111u64);
        let mut out = [false; 3];
        g.expand_pair(alpha, beta, &mut out);
        assert_eq!(out[0], (alpha & beta).count_ones() % 2 == 1);
    }

    #[test]
    fn uniform_copies_the_seed() {
        let g = UniformExpander::new(5);
        assert_eq!(
            g.expand(&[0b10110]).unwrap(),
            vec![false, true, true, false, true]
        );
    }
}
