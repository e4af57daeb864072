//! Fourier growth, branching programs and pseudorandom restrictions for
//! read-once AC⁰ formulas.
//!
//! The crate is organised bottom-up:
//!
//! - [`circuit`]: the formula AST, the DSL, restrictions, constant propagation
//!   and exact acceptance probabilities under product distributions.
//! - [`fourier`]: the brute-force Walsh–Hadamard oracle, the read-once level
//!   mass recursion, damped masses and the inequality checkers built on them.
//! - [`bp`]: ordered branching programs, their closure operations and the
//!   conversion from depth-`D` formulas to width-`D + 1` programs.
//! - [`prg`]: the powering small-bias generator, the recursive
//!   pseudorandom-restriction generator and fooling-error measurement.
//! - [`shrinkage`]: truly random `p`-regular restrictions, collapse
//!   probabilities and sandwiching approximators.
//!
//! Every operation is a pure function of its inputs (and an explicit seed
//! where randomness is involved), so callers may parallelise freely.

pub mod bp;
pub mod circuit;
mod error;
pub mod fourier;
pub mod prg;
mod scalar;
pub mod shrinkage;
pub mod stats;

pub use crate::bp::OrderedBp;
pub use crate::circuit::{BiasVector, Circuit, NandForm, Node, RestrictedShape, RestrictionMask};
pub use crate::error::{Error, ParseError, ParseErrorKind, Result};
pub use crate::fourier::{BoundParams, BoundReport, LevelProfile, SpectralTable};
pub use crate::prg::{Expander, FoolingReport, RestrictionPrg, SmallBias};
pub use crate::scalar::{Rational, Scalar};
pub use crate::shrinkage::{PRegularSampler, SandwichPair, ShrinkReport};
