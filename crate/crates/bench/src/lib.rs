//! Fixed inputs shared by the criterion benchmarks.

use ro_ac0::circuit::{gen_random_read_once, gen_tribes};
use ro_ac0::Circuit;

/// Depth used for the random formulas below.
pub const DEPTH: usize = 3;

/// A random read-once formula on `n` variables with a fixed seed.
pub fn random_formula(n: usize) -> Circuit {
    let depth = if n == 1 { 0 } else { DEPTH.min(n - 1) };
    gen_random_read_once(n, depth, 0x5eed).expect("valid generator parameters")
}

/// Tribes with about `n` variables and blocks of width `log₂ n`.
pub fn tribes_near(n: usize) -> Circuit {
    let w = (n as f64).log2().round().max(1.0) as usize;
    gen_tribes((n / w).max(1), w).expect("valid tribes parameters")
}

/// Packs the first `n` bits of `x` into a bool vector.
pub fn bits(x: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| (x >> i) & 1 == 1).collect()
}
