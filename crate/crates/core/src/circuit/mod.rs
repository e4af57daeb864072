//! Read-once AND/OR/NOT formulas.
//!
//! A [`Circuit`] is a tree over [`Node`]s together with the number of input
//! variables `n`. Every variable feeds at most one leaf; this is checked on
//! construction and relied upon throughout the crate (constant propagation
//! decides constancy, Fourier masses multiply across children, and so on).
//!
//! Inputs are bit vectors `x ∈ {0,1}^n`. Where an input is packed into an
//! integer, bit `i` of the integer is `x_i`.

mod generate;
mod parse;
mod prob;
mod transform;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::{gen_random_read_once, gen_recursive_tribes, gen_tribes};
pub use parse::parse;
pub use prob::{acceptance_probability, BiasVector};
pub use transform::{NandForm, RestrictedShape, RestrictionMask};

/// Largest `n` for which truth tables are materialised.
pub const TRUTH_TABLE_CAP: usize = 26;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Node {
    And(Vec<Node>),
    Or(Vec<Node>),
    Not(Box<Node>),
    Leaf { var: usize, negated: bool },
    Const(bool),
}

impl Node {
    pub fn var(var: usize) -> Node {
        Node::Leaf {
            var,
            negated: false,
        }
    }

    pub fn neg_var(var: usize) -> Node {
        Node::Leaf { var, negated: true }
    }

    pub fn nand(children: Vec<Node>) -> Node {
        Node::Not(Box::new(Node::And(children)))
    }

    /// Number of AND/OR gates on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            Node::And(cs) | Node::Or(cs) => 1 + cs.iter().map(Node::depth).max().unwrap_or(0),
            Node::Not(c) => c.depth(),
            Node::Leaf { .. } | Node::Const(_) => 0,
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Node::And(cs) | Node::Or(cs) => cs.iter().map(Node::leaf_count).sum(),
            Node::Not(c) => c.leaf_count(),
            Node::Leaf { .. } => 1,
            Node::Const(_) => 0,
        }
    }

    /// Largest AND/OR fan-in anywhere in the tree (0 without gates).
    pub fn max_fanin(&self) -> usize {
        match self {
            Node::And(cs) | Node::Or(cs) => cs
                .iter()
                .map(Node::max_fanin)
                .max()
                .unwrap_or(0)
                .max(cs.len()),
            Node::Not(c) => c.max_fanin(),
            Node::Leaf { .. } | Node::Const(_) => 0,
        }
    }

    pub fn gate_count(&self) -> usize {
        match self {
            Node::And(cs) | Node::Or(cs) => 1 + cs.iter().map(Node::gate_count).sum::<usize>(),
            Node::Not(c) => c.gate_count(),
            Node::Leaf { .. } | Node::Const(_) => 0,
        }
    }

    pub fn is_const(&self) -> Option<bool> {
        match self {
            Node::Const(b) => Some(*b),
            _ => None,
        }
    }

    /// Variables in left-to-right leaf order.
    pub fn variables(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<usize>) {
        match self {
            Node::And(cs) | Node::Or(cs) => cs.iter().for_each(|c| c.collect_vars(out)),
            Node::Not(c) => c.collect_vars(out),
            Node::Leaf { var, .. } => out.push(*var),
            Node::Const(_) => {}
        }
    }

    pub fn eval_with<F: Fn(usize) -> bool + Copy>(&self, x: F) -> bool {
        match self {
            Node::And(cs) => cs.iter().all(|c| c.eval_with(x)),
            Node::Or(cs) => cs.iter().any(|c| c.eval_with(x)),
            Node::Not(c) => !c.eval_with(x),
            Node::Leaf { var, negated } => x(*var) ^ negated,
            Node::Const(b) => *b,
        }
    }

    /// Evaluates 64 consecutive inputs `64*block .. 64*block + 63` at once.
    fn eval_block(&self, block: u64) -> u64 {
        const PATTERNS: [u64; 6] = [
            0xAAAA_AAAA_AAAA_AAAA,
            0xCCCC_CCCC_CCCC_CCCC,
            0xF0F0_F0F0_F0F0_F0F0,
            0xFF00_FF00_FF00_FF00,
            0xFFFF_0000_FFFF_0000,
            0xFFFF_FFFF_0000_0000,
        ];
        match self {
            Node::And(cs) => cs.iter().fold(u64::MAX, |acc, c| acc & c.eval_block(block)),
            Node::Or(cs) => cs.iter().fold(0, |acc, c| acc | c.eval_block(block)),
            Node::Not(c) => !c.eval_block(block),
            Node::Leaf { var, negated } => {
                let word = if *var < 6 {
                    PATTERNS[*var]
                } else if (block >> (var - 6)) & 1 == 1 {
                    u64::MAX
                } else {
                    0
                };
                if *negated {
                    !word
                } else {
                    word
                }
            }
            Node::Const(b) => {
                if *b {
                    u64::MAX
                } else {
                    0
                }
            }
        }
    }

    fn write_dsl(&self, out: &mut String) {
        match self {
            Node::And(cs) | Node::Or(cs) => {
                out.push_str(if matches!(self, Node::And(_)) {
                    "(and"
                } else {
                    "(or"
                });
                for c in cs {
                    out.push(' ');
                    c.write_dsl(out);
                }
                out.push(')');
            }
            Node::Not(c) => {
                out.push_str("(not ");
                c.write_dsl(out);
                out.push(')');
            }
            Node::Leaf { var, negated } => {
                if *negated {
                    out.push_str(&format!("(not x{var})"));
                } else {
                    out.push_str(&format!("x{var}"));
                }
            }
            Node::Const(b) => out.push(if *b { '1' } else { '0' }),
        }
    }
}

/// A read-once formula on `n` input variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Circuit {
    root: Node,
    n: usize,
}

impl Circuit {
    /// Validates read-onceness, variable range and non-empty gates.
    pub fn new(root: Node, n: usize) -> Result<Circuit> {
        let mut seen = vec![false; n];
        check_node(&root, &mut seen)?;
        Ok(Circuit { root, n })
    }

    /// Wraps a node on exactly as many variables as its largest index needs.
    pub fn from_node(root: Node) -> Result<Circuit> {
        let n = root.variables().into_iter().max().map_or(0, |m| m + 1);
        Circuit::new(root, n)
    }

    /// For callers that preserve the invariants by construction.
    pub(crate) fn from_parts(root: Node, n: usize) -> Circuit {
        debug_assert!(Circuit::new(root.clone(), n).is_ok());
        Circuit { root, n }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn into_root(self) -> Node {
        self.root
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn leaf_count(&self) -> usize {
        self.root.leaf_count()
    }

    pub fn max_fanin(&self) -> usize {
        self.root.max_fanin()
    }

    pub fn is_const(&self) -> Option<bool> {
        self.root.is_const()
    }

    /// Same function, padded to `n` inputs.
    pub fn with_n(&self, n: usize) -> Result<Circuit> {
        Circuit::new(self.root.clone(), n)
    }

    /// Re-runs the read-once traversal.
    pub fn is_read_once(&self) -> bool {
        let mut seen = vec![false; self.n];
        check_node(&self.root, &mut seen).is_ok()
    }

    /// True when every NOT sits directly on a leaf (as a negation flag).
    pub fn nots_at_leaves(&self) -> bool {
        fn go(node: &Node) -> bool {
            match node {
                Node::And(cs) | Node::Or(cs) => cs.iter().all(go),
                Node::Not(_) => false,
                Node::Leaf { .. } | Node::Const(_) => true,
            }
        }
        go(&self.root)
    }

    pub fn evaluate(&self, x: &[bool]) -> Result<bool> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self.root.eval_with(|i| x[i]))
    }

    /// Evaluates on the input packed into `x` (bit `i` is `x_i`); `n <= 64`.
    pub fn evaluate_index(&self, x: u64) -> bool {
        debug_assert!(self.n <= 64);
        self.root.eval_with(|i| (x >> i) & 1 == 1)
    }

    /// The full truth table, bit-packed 64 inputs per word.
    pub fn truth_table(&self) -> Result<TruthTable> {
        if self.n > TRUTH_TABLE_CAP {
            return Err(Error::CapExceeded {
                what: "n",
                value: self.n,
                cap: TRUTH_TABLE_CAP,
            });
        }
        let blocks = if self.n >= 6 { 1u64 << (self.n - 6) } else { 1 };
        let mut words: Vec<u64> = (0..blocks).map(|b| self.root.eval_block(b)).collect();
        if self.n < 6 {
            words[0] &= (1u64 << (1 << self.n)) - 1;
        }
        Ok(TruthTable { n: self.n, words })
    }

    /// Canonical single-line DSL.
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.root.write_dsl(&mut s);
        s
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn check_node(node: &Node, seen: &mut [bool]) -> Result<()> {
    match node {
        Node::And(cs) | Node::Or(cs) => {
            if cs.is_empty() {
                return Err(Error::EmptyGate);
            }
            cs.iter().try_for_each(|c| check_node(c, seen))
        }
        Node::Not(c) => check_node(c, seen),
        Node::Leaf { var, .. } => {
            let n = seen.len();
            let slot = seen
                .get_mut(*var)
                .ok_or(Error::VariableOutOfRange { var: *var, n })?;
            if *slot {
                return Err(Error::NotReadOnce(*var));
            }
            *slot = true;
            Ok(())
        }
        Node::Const(_) => Ok(()),
    }
}

/// A bit-packed truth table: bit `x % 64` of `words[x / 64]` is `F(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthTable {
    n: usize,
    words: Vec<u64>,
}

impl TruthTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: usize) -> bool {
        (self.words[x >> 6] >> (x & 63)) & 1 == 1
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn len(&self) -> usize {
        1 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Whether the function is constant.
    pub fn is_constant(&self) -> bool {
        let ones = self.count_ones();
        ones == 0 || ones == self.len() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tribes22() -> Circuit {
        parse("(or (and x0 x1) (and x2 x3))").unwrap()
    }

    #[test]
    fn evaluate_small_examples() {
        let and2 = parse("(and x0 x1)").unwrap();
        assert!(and2.evaluate(&[true, true]).unwrap());
        assert!(!and2.evaluate(&[true, false]).unwrap());
        assert!(tribes22().evaluate(&[false, false, true, true]).unwrap());
        assert_eq!(
            and2.evaluate(&[true]),
            Err(Error::LengthMismatch {
                expected: 2,
                got: 1
            })
        );
    }

    #[test]
    fn depth_ignores_not_gates() {
        let c = parse("(not (or (and x0 x1) (not x2)))").unwrap();
        assert_eq!(c.depth(), 2);
        assert_eq!(parse("x3").unwrap().depth(), 0);
        assert_eq!(parse("(not (not (and x0)))").unwrap().depth(), 1);
    }

    #[test]
    fn construction_rejects_bad_trees() {
        let dup = Node::And(vec![Node::var(0), Node::neg_var(0)]);
        assert_eq!(Circuit::new(dup, 1), Err(Error::NotReadOnce(0)));
        assert_eq!(
            Circuit::new(Node::var(3), 2),
            Err(Error::VariableOutOfRange { var: 3, n: 2 })
        );
        assert_eq!(Circuit::new(Node::Or(vec![]), 0), Err(Error::EmptyGate));
    }

    #[test]
    fn truth_table_matches_pointwise_evaluation() {
        for text in [
            "(or (and x0 x1) (and x2 x3))",
            "(and x0 (not x7) (or x3 x6 (and x1 x2)) (or x4 x5))",
            "1",
            "(not x0)",
        ] {
            let c = parse(text).unwrap();
            let tt = c.truth_table().unwrap();
            for x in 0..(1usize << c.n()) {
                assert_eq!(tt.get(x), c.evaluate_index(x as u64), "{text} at {x}");
            }
        }
        assert_eq!(tribes22().truth_table().unwrap().count_ones(), 7);
    }

    #[test]
    fn render_round_trips() {
        for text in [
            "(and x0 x1)",
            "(or (and x0 x1) (not x2))",
            "(not (and x0 (or x1 x2)))",
            "0",
            "(and 1 x0)",
        ] {
            let c = parse(text).unwrap();
            assert_eq!(c.render(), text);
            assert_eq!(parse(&c.render()).unwrap(), c);
        }
    }

    #[test]
    fn metrics() {
        let c = parse("(or (and x0 x1 x2) (and x3 x4) x5)").unwrap();
        assert_eq!(c.leaf_count(), 6);
        assert_eq!(c.max_fanin(), 3);
        assert_eq!(c.root().gate_count(), 3);
        assert_eq!(c.root().variables(), vec![0, 1, 2, 3, 4, 5]);
    }
}
