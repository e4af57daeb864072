//! Sandwiching approximators `F_ℓ <= F <= F_u` whose nodes all reject with
//! probability between `eps` and `1 - eps`.
//!
//! The construction works on the NAND form, bottom-up. A NAND gate rejects
//! exactly when all of its children accept, so its rejection mass is the
//! product of the children's acceptance probabilities, and NAND is
//! antitone: substituting upper approximators for the children gives a
//! lower approximator of the gate and vice versa.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Node};
use crate::error::{Error, Result};
use crate::prg::{check_pointwise_sandwich, SANDWICH_CHECK_CAP};
use crate::scalar::{Rational, Scalar};

/// Regression constant `c` in `E[F_u - F_ℓ] <= c n √eps`.
pub const GAP_CONSTANT: f64 = 8.0;

/// How often each branch of the construction fired.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneStats {
    /// Gates whose rejection mass is at least `eps`.
    pub case1: usize,
    /// Case 1 gates whose upper approximator became `1`.
    pub upper_to_one: usize,
    /// Gates whose rejection mass is below `eps`.
    pub case2: usize,
    /// Case 2 gates where removing a prefix of children landed the
    /// rejection mass in `[eps, √eps]`.
    pub pruned_prefix: usize,
    /// Case 2 gates where every prefix overshoots and a single child is kept.
    pub single_child: usize,
    /// Case 2 gates that fell back to the constant 0.
    pub constant_zero: usize,
}

#[derive(Clone, Debug)]
struct Side {
    node: Node,
    acc: Rational,
}

impl Side {
    fn constant(b: bool) -> Self {
        Side {
            node: Node::Const(b),
            acc: if b { Rational::one() } else { Rational::zero() },
        }
    }

    fn is_const(&self) -> bool {
        matches!(self.node, Node::Const(_))
    }

    fn rejection(&self) -> Rational {
        Rational::one() - &self.acc
    }
}

struct Built {
    lower: Side,
    upper: Side,
    /// Acceptance probability of the original subformula.
    acc: Rational,
}

/// NAND with constant propagation: `1` inputs are dropped, a `0` input
/// forces the output to 1, and an empty NAND is 0.
fn nand_of(children: Vec<Side>) -> Side {
    let mut kept = Vec::with_capacity(children.len());
    let mut product = Rational::one();
    for c in children {
        match c.node {
            Node::Const(true) => {}
            Node::Const(false) => return Side::constant(true),
            _ => {
                product *= &c.acc;
                kept.push(c.node);
            }
        }
    }
    if kept.is_empty() {
        return Side::constant(false);
    }
    Side {
        node: Node::nand(kept),
        acc: Rational::one() - product,
    }
}

struct Builder<'a> {
    eps: &'a Rational,
    stats: PruneStats,
}

impl Builder<'_> {
    fn build(&mut self, node: &Node) -> Built {
        match node {
            Node::Const(b) => Built {
                lower: Side::constant(*b),
                upper: Side::constant(*b),
                acc: Side::constant(*b).acc,
            },
            Node::Leaf { .. } => {
                let leaf = Side {
                    node: node.clone(),
                    acc: Rational::half(),
                };
                Built {
                    lower: leaf.clone(),
                    upper: leaf,
                    acc: Rational::half(),
                }
            }
            Node::Not(inner) => match inner.as_ref() {
                Node::And(cs) => self.gate(cs),
                _ => unreachable!("input is in NAND form"),
            },
            Node::And(_) | Node::Or(_) => unreachable!("input is in NAND form"),
        }
    }

    fn gate(&mut self, cs: &[Node]) -> Built {
        let kids: Vec<Built> = cs.iter().map(|c| self.build(c)).collect();
        let rejection = kids.iter().fold(Rational::one(), |acc, k| acc * &k.acc);
        let acc = Rational::one() - &rejection;
        let uppers: Vec<Side> = kids.iter().map(|k| k.upper.clone()).collect();
        let lower_candidate = nand_of(uppers);
        if rejection >= *self.eps {
            self.stats.case1 += 1;
            let upper_candidate = nand_of(kids.into_iter().map(|k| k.lower).collect());
            let upper = if upper_candidate.rejection() >= *self.eps {
                upper_candidate
            } else {
                self.stats.upper_to_one += 1;
                Side::constant(true)
            };
            return Built {
                lower: lower_candidate,
                upper,
                acc,
            };
        }
        self.stats.case2 += 1;
        let lower = if lower_candidate.is_const() || lower_candidate.rejection() >= *self.eps {
            lower_candidate
        } else {
            let kept: Vec<Side> = kids
                .into_iter()
                .map(|k| k.upper)
                .filter(|s| !s.is_const())
                .collect();
            self.prune(kept)
        };
        Built {
            lower,
            upper: Side::constant(true),
            acc,
        }
    }

    /// Removes children in ascending index order until the rejection mass
    /// `q` of the NAND of the rest satisfies `eps <= q <= √eps`.
    fn prune(&mut self, kept: Vec<Side>) -> Side {
        let k = kept.len();
        // suffix[j] = product of acceptances of kept[j..].
        let mut suffix = vec![Rational::one(); k + 1];
        for j in (0..k).rev() {
            suffix[j] = &suffix[j + 1] * &kept[j].acc;
        }
        let first = (0..=k).find(|&j| suffix[j] >= *self.eps).unwrap_or(k);
        if &suffix[first] * &suffix[first] <= *self.eps {
            self.stats.pruned_prefix += 1;
            return nand_of(kept.into_iter().skip(first).collect());
        }
        // Jumping from below eps to above √eps means the child just removed
        // accepts with probability below √eps.
        if first > 0 {
            let a = &kept[first - 1].acc;
            if *a >= *self.eps && a * a <= *self.eps {
                self.stats.single_child += 1;
                return nand_of(vec![kept[first - 1].clone()]);
            }
        }
        self.stats.constant_zero += 1;
        Side::constant(false)
    }
}

/// Sandwiching approximators of a read-once formula, in AND/OR form and in
/// the NAND form they were built in.
#[derive(Clone, Debug, PartialEq)]
pub struct SandwichPair {
    pub lower: Circuit,
    pub upper: Circuit,
    pub lower_nand: Circuit,
    pub upper_nand: Circuit,
    pub eps: f64,
    /// `E_U[F_u - F_ℓ]`.
    pub gap: Rational,
    pub source_leaves: usize,
    pub source_depth: usize,
    pub stats: PruneStats,
}

/// Outcome of the exact node-wise check `eps <= 1 - f̂[0] <= 1 - eps`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeConditionReport {
    pub checked: usize,
    pub violations: Vec<String>,
}

impl NodeConditionReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

fn normalise(node: Node, n: usize) -> Circuit {
    Circuit::from_parts(node, n)
        .push_nots_to_leaves()
        .simplify()
        .flatten()
}

impl SandwichPair {
    pub fn n(&self) -> usize {
        self.lower.n()
    }

    pub fn gap_f64(&self) -> f64 {
        self.gap.to_f64()
    }

    /// `GAP_CONSTANT · n · √eps`.
    pub fn gap_bound(&self) -> f64 {
        GAP_CONSTANT * self.n() as f64 * self.eps.sqrt()
    }

    /// The empirical constant `gap / (n √eps)`.
    pub fn c_gap(&self) -> f64 {
        self.gap_f64() / (self.n().max(1) as f64 * self.eps.sqrt())
    }

    pub fn within_gap_bound(&self) -> bool {
        self.gap_f64() <= self.gap_bound()
    }

    /// Whether both sides have at most as many leaves as the source and
    /// depth at most the source depth.
    pub fn size_within_source(&self) -> bool {
        [&self.lower, &self.upper]
            .iter()
            .all(|c| c.leaf_count() <= self.source_leaves && c.depth() <= self.source_depth)
    }

    /// Checks every NAND gate and leaf of both NAND-form sides exactly.
    pub fn node_conditions(&self) -> NodeConditionReport {
        let eps = Rational::from_f64(self.eps);
        let mut report = NodeConditionReport::default();
        for (name, c) in [("lower", &self.lower_nand), ("upper", &self.upper_nand)] {
            check_nodes(c.root(), &eps, name, &mut report);
        }
        report
    }

    /// Exhaustive pointwise check of `F_ℓ <= F <= F_u` for `n <= 16`.
    pub fn check_pointwise(&self, c: &Circuit) -> Result<()> {
        check_pointwise_sandwich(c, &self.upper, &self.lower)
    }

    /// Pointwise check on `samples` uniform inputs; any `n`.
    pub fn check_sampled(&self, c: &Circuit, samples: u64, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = vec![false; c.n()];
        for _ in 0..samples {
            x.iter_mut().for_each(|b| *b = rng.gen());
            let (lower, value, upper) = (
                self.lower.evaluate(&x)?,
                c.evaluate(&x)?,
                self.upper.evaluate(&x)?,
            );
            if lower & !value || value & !upper {
                return Err(Error::SandwichViolation {
                    input: x.iter().map(|&b| if b { '1' } else { '0' }).collect(),
                    lower,
                    value,
                    upper,
                });
            }
        }
        Ok(())
    }

    /// Exhaustive check when `n` allows it, `samples` random inputs otherwise.
    pub fn check_ordering(&self, c: &Circuit, samples: u64, seed: u64) -> Result<()> {
        if c.n() <= SANDWICH_CHECK_CAP {
            self.check_pointwise(c)
        } else {
            self.check_sampled(c, samples, seed)
        }
    }
}

fn check_nodes(
    node: &Node,
    eps: &Rational,
    side: &str,
    report: &mut NodeConditionReport,
) -> Rational {
    match node {
        Node::Const(b) => Side::constant(*b).acc,
        Node::Leaf { .. } => {
            report.checked += 1;
            Rational::half()
        }
        Node::Not(inner) => match inner.as_ref() {
            Node::And(cs) => {
                let rejection = cs.iter().fold(Rational::one(), |acc, c| {
                    acc * check_nodes(c, eps, side, report)
                });
                report.checked += 1;
                if rejection < *eps || rejection > Rational::one() - eps {
                    report.violations.push(format!(
                        "{side}: gate with {} inputs rejects with probability {rejection}",
                        cs.len()
                    ));
                }
                Rational::one() - rejection
            }
            _ => {
                report
                    .violations
                    .push(format!("{side}: NOT above a non-AND node"));
                Rational::one() - check_nodes(inner, eps, side, report)
            }
        },
        Node::And(_) | Node::Or(_) => {
            report.violations.push(format!("{side}: bare AND/OR gate"));
            Rational::zero()
        }
    }
}

/// Builds `F_ℓ <= F <= F_u` for `eps ∈ (0, 1/4]`.
///
/// Case 1 (rejection mass at least `eps`): `F_ℓ` is the gate over the
/// children's upper approximators, `F_u` the gate over their lower
/// approximators, or the constant 1 if that rejects with probability below
/// `eps`. Case 2: `F_u = 1` and `F_ℓ` is the gate over the children's upper
/// approximators, with a prefix of children pruned when its rejection mass
/// is below `eps`.
pub fn build_sandwich(c: &Circuit, eps: f64) -> Result<SandwichPair> {
    if !(eps > 0.0 && eps <= 0.25) {
        return Err(Error::InvalidParameter(format!(
            "eps = {eps} must lie in (0, 1/4]"
        )));
    }
    let eps_exact = Rational::from_f64(eps);
    let nand = c.simplify().to_nand_form();
    let mut builder = Builder {
        eps: &eps_exact,
        stats: PruneStats::default(),
    };
    let built = builder.build(nand.circuit.root());
    let n = c.n();
    let gap = &built.upper.acc - &built.lower.acc;
    debug_assert!(built.lower.acc <= built.acc && built.acc <= built.upper.acc);
    Ok(SandwichPair {
        lower: normalise(built.lower.node.clone(), n),
        upper: normalise(built.upper.node.clone(), n),
        lower_nand: Circuit::from_parts(built.lower.node, n),
        upper_nand: Circuit::from_parts(built.upper.node, n),
        eps,
        gap,
        source_leaves: c.leaf_count(),
        source_depth: c.depth(),
        stats: builder.stats,
    })
}
