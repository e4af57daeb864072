//! Small-bias and pseudorandom-restriction generators and fooling
//! measurements.

mod fooling;
mod gf2;
mod restriction;
mod smallbias;

pub use fooling::{
    check_pointwise_sandwich, check_sandwich_fooling, fooling_error, mc_block_accepts, mc_blocks,
    measure_bias, FoolingMode, FoolingReport, OutputDistribution, SandwichFoolingReport,
    BIAS_SEED_CAP, EXHAUSTIVE_SEED_CAP, MC_BLOCK, OUTPUT_CAP, SANDWICH_CHECK_CAP,
};
pub use gf2::{is_irreducible, Gf2Field};
pub use restriction::{
    default_rounds, min_ell, seed_length_account, RestrictionConfig, RestrictionPrg, RoundLayout,
    SeedAccount,
};
pub use smallbias::{read_bits, seed_words, Expander, SmallBias, UniformExpander};
