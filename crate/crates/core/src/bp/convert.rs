//! Formula to branching program conversion and slice witnesses.
//!
//! A gate of depth `D` becomes a width-`D + 1` program. The children's
//! programs are laid end to end with the accept state of one feeding the
//! start of the next, and an extra absorbing `reject` state (the highest
//! state) collects every last-layer edge of a child that does not reach
//! accept. An OR gate is built as the AND program of its negated children,
//! after which accept and reject trade places on the gate's final layer.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Construction, Layer, OrderedBp, START};
use crate::circuit::{Circuit, Node};
use crate::error::{Error, Result};

/// Layout of the program produced for one node.
#[derive(Clone, Debug)]
pub(crate) enum Block {
    /// Constant-false program: a single padding layer sending everything
    /// to state 1. Constant true has no layers and no block data.
    Const {
        value: bool,
    },
    Leaf {
        var: usize,
        negated: bool,
    },
    Gate {
        is_or: bool,
        /// One past the gate's last layer, 0-based.
        end: usize,
        width: usize,
        children: Vec<(usize, usize, Block)>,
        /// The AND-polarity child formulas: the children themselves for AND,
        /// their negations for OR.
        circuits: Vec<Node>,
    },
}

impl Block {
    fn width(&self) -> usize {
        match self {
            Block::Const { value } => 1 + usize::from(!value),
            Block::Leaf { .. } => 2,
            Block::Gate { width, .. } => *width,
        }
    }
}

impl OrderedBp {
    /// The width-`(D + 1)` program computing `c` (width 2 when `D = 0`).
    ///
    /// The circuit is first put in negation normal form and constant
    /// propagated, so each surviving leaf yields exactly one layer.
    pub fn from_circuit(c: &Circuit) -> OrderedBp {
        let norm = c.push_nots_to_leaves().simplify();
        let depth = norm.depth();
        let (width, layers, root) = match norm.root() {
            Node::Const(true) => (1, Vec::new(), Block::Const { value: true }),
            Node::Const(false) => (
                2,
                vec![Layer {
                    var: None,
                    on_zero: vec![1, 1],
                    on_one: vec![1, 1],
                }],
                Block::Const { value: false },
            ),
            node => {
                let (layers, block) = build(node, 0);
                (block.width(), layers, block)
            }
        };
        OrderedBp {
            width,
            n: c.n(),
            layers,
            construction: Some(Arc::new(Construction {
                root,
                depth,
                restriction: None,
                pre: None,
                post: None,
            })),
        }
    }

    /// Gate depth of the formula the program was built from.
    pub fn source_depth(&self) -> Option<usize> {
        self.construction.as_ref().map(|c| c.depth)
    }

    /// A read-once formula computing `B^{d1,d2}_{i..j}`, for programs built by
    /// [`OrderedBp::from_circuit`] and then possibly restricted or permuted.
    pub fn slice_witness(&self, i: usize, j: usize, d1: usize, d2: usize) -> Result<Circuit> {
        let cons = self.construction.as_ref().ok_or(Error::MissingMetadata)?;
        self.check_span(i, j)?;
        self.check_state(d1)?;
        self.check_state(d2)?;
        let d1 = match &cons.pre {
            Some(pi) if i == 1 => pi[d1],
            _ => d1,
        };
        let d2 = match &cons.post {
            Some(pi) if j == self.layers.len() => {
                pi.iter().position(|&s| s == d2).expect("permutation")
            }
            _ => d2,
        };
        let node = witness(&cons.root, i - 1, j - 1, d1, d2);
        let mut out = Circuit::from_parts(node, self.n);
        if let Some(mask) = &cons.restriction {
            out = out.restrict(mask)?;
        }
        Ok(out.push_nots_to_leaves().simplify())
    }

    /// Builds the slice witness and compares it with the slice on every
    /// assignment of the slice's variables (other inputs held at 0).
    pub fn verify_slice_witness(
        &self,
        i: usize,
        j: usize,
        d1: usize,
        d2: usize,
    ) -> Result<WitnessCheck> {
        let w = self.slice_witness(i, j, d1, d2)?;
        let vars = self.slice_variables(i, j)?;
        if vars.len() > WITNESS_CHECK_CAP {
            return Err(Error::CapExceeded {
                what: "slice variables",
                value: vars.len(),
                cap: WITNESS_CHECK_CAP,
            });
        }
        let mut x = vec![false; self.n];
        let mut matches = true;
        for bits in 0..1u64 << vars.len() {
            for (k, &v) in vars.iter().enumerate() {
                x[v] = (bits >> k) & 1 == 1;
            }
            if w.evaluate(&x)? != self.slice_indicator(i, j, d1, d2, &x)? {
                matches = false;
                break;
            }
        }
        let depth_ok = self.source_depth().into_iter().all(|d| w.depth() <= d);
        Ok(WitnessCheck {
            witness: w.render(),
            depth: w.depth(),
            read_once: w.is_read_once(),
            matches,
            depth_ok,
        })
    }
}

/// Largest slice checked exhaustively by [`OrderedBp::verify_slice_witness`].
pub const WITNESS_CHECK_CAP: usize = 20;

/// Outcome of [`OrderedBp::verify_slice_witness`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessCheck {
    pub witness: String,
    pub depth: usize,
    pub read_once: bool,
    pub matches: bool,
    pub depth_ok: bool,
}

impl WitnessCheck {
    pub fn pass(&self) -> bool {
        self.read_once && self.matches && self.depth_ok
    }
}

fn leaf_layer(var: usize, negated: bool) -> Layer {
    let (accept, reject) = (vec![0, 1], vec![1, 1]);
    let (on_zero, on_one) = if negated {
        (accept, reject)
    } else {
        (reject, accept)
    };
    Layer {
        var: Some(var),
        on_zero,
        on_one,
    }
}

/// `¬node` in negation normal form.
fn dual(node: &Node) -> Node {
    match node {
        Node::And(cs) => Node::Or(cs.iter().map(dual).collect()),
        Node::Or(cs) => Node::And(cs.iter().map(dual).collect()),
        Node::Leaf { var, negated } => Node::Leaf {
            var: *var,
            negated: !negated,
        },
        Node::Const(b) => Node::Const(!b),
        Node::Not(c) => (**c).clone(),
    }
}

fn build(node: &Node, offset: usize) -> (Vec<Layer>, Block) {
    match node {
        Node::Leaf { var, negated } => (
            vec![leaf_layer(*var, *negated)],
            Block::Leaf {
                var: *var,
                negated: *negated,
            },
        ),
        Node::And(cs) => build_gate(cs.clone(), false, offset),
        Node::Or(cs) => build_gate(cs.iter().map(dual).collect(), true, offset),
        Node::Not(_) | Node::Const(_) => {
            unreachable!("conversion runs on simplified negation normal form")
        }
    }
}

fn build_gate(kids: Vec<Node>, is_or: bool, offset: usize) -> (Vec<Layer>, Block) {
    let mut built = Vec::with_capacity(kids.len());
    let mut at = offset;
    for kid in &kids {
        let (layers, block) = build(kid, at);
        at += layers.len();
        built.push((layers, block));
    }
    let width = built
        .iter()
        .filter(|(_, b)| matches!(b, Block::Gate { .. }))
        .map(|(_, b)| b.width() + 1)
        .max()
        .unwrap_or(0)
        .max(2);
    let reject = width - 1;

    let mut layers = Vec::with_capacity(at - offset);
    let mut children = Vec::with_capacity(kids.len());
    let mut start = offset;
    for (kid_layers, block) in built {
        let wc = block.width();
        let count = kid_layers.len();
        for (idx, layer) in kid_layers.into_iter().enumerate() {
            let last = idx + 1 == count;
            let lift = |map: &[usize]| -> Vec<usize> {
                (0..width)
                    .map(|s| {
                        if s == reject {
                            return reject;
                        }
                        let t = if s < wc { map[s] } else { s };
                        if last && t != START {
                            reject
                        } else {
                            t
                        }
                    })
                    .collect()
            };
            layers.push(Layer {
                var: layer.var,
                on_zero: lift(&layer.on_zero),
                on_one: lift(&layer.on_one),
            });
        }
        children.push((start, start + count, block));
        start += count;
    }
    if is_or {
        let last = layers.last_mut().expect("gates have children");
        for s in last.on_zero.iter_mut().chain(last.on_one.iter_mut()) {
            *s = swap(*s, reject);
        }
    }
    let block = Block::Gate {
        is_or,
        end: start,
        width,
        children,
        circuits: kids,
    };
    (layers, block)
}

fn swap(s: usize, reject: usize) -> usize {
    if s == START {
        reject
    } else if s == reject {
        START
    } else {
        s
    }
}

fn literal(var: usize, negated: bool) -> Node {
    Node::Leaf { var, negated }
}

/// Formula for `[block_{lo..=hi}[x](d1) = d2]`, layers 0-based inclusive and
/// states below the block's width.
fn witness(block: &Block, lo: usize, hi: usize, d1: usize, d2: usize) -> Node {
    match block {
        Block::Const { .. } => Node::Const(d2 == 1),
        Block::Leaf { var, negated } => match (d1, d2) {
            (0, 0) => literal(*var, *negated),
            (0, _) => literal(*var, !negated),
            (_, 0) => Node::Const(false),
            _ => Node::Const(true),
        },
        Block::Gate {
            is_or,
            end,
            width,
            children,
            circuits,
            ..
        } => {
            let reject = width - 1;
            let d2 = if *is_or && hi + 1 == *end {
                swap(d2, reject)
            } else {
                d2
            };
            if d1 == reject {
                return Node::Const(d2 == reject);
            }
            let locate = |layer: usize| {
                children
                    .iter()
                    .position(|&(s, e, _)| s <= layer && layer < e)
                    .expect("layer inside the gate")
            };
            let (m1, m2) = (locate(lo), locate(hi));
            if m1 == m2 {
                return segment(&children[m1], *width, lo, hi, d1, d2);
            }
            let g = segment(&children[m1], *width, lo, children[m1].1 - 1, d1, START);
            let mut parts = vec![g];
            parts.extend(circuits[m1 + 1..m2].iter().cloned());
            let head = children[m2].0;
            if d2 == reject {
                let h = segment(&children[m2], *width, head, hi, START, reject);
                parts.push(Node::Not(Box::new(h)));
                Node::Not(Box::new(Node::And(parts)))
            } else {
                parts.push(segment(&children[m2], *width, head, hi, START, d2));
                Node::And(parts)
            }
        }
    }
}

/// Witness for a window inside one child, seen through the gate's lifted
/// layers of the given width.
fn segment(
    child: &(usize, usize, Block),
    width: usize,
    lo: usize,
    hi: usize,
    d1: usize,
    d2: usize,
) -> Node {
    let (_, end, block) = child;
    let reject = width - 1;
    let wc = block.width();
    let last = hi + 1 == *end;
    if d1 == reject {
        return Node::Const(d2 == reject);
    }
    if d1 >= wc {
        // A state the child does not use idles until the child's last layer.
        let fin = if last { reject } else { d1 };
        return Node::Const(d2 == fin);
    }
    if !last {
        if d2 < wc {
            witness(block, lo, hi, d1, d2)
        } else {
            Node::Const(false)
        }
    } else if d2 == START {
        witness(block, lo, hi, d1, START)
    } else if d2 == reject {
        Node::Not(Box::new(witness(block, lo, hi, d1, START)))
    } else {
        Node::Const(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bp::Side;
    use crate::circuit::{gen_random_read_once, gen_tribes, parse, RestrictionMask};

    fn bits(x: u64, n: usize) -> Vec<bool> {
        (0..n).map(|i| (x >> i) & 1 == 1).collect()
    }

    fn check_witness(b: &OrderedBp, i: usize, j: usize, d1: usize, d2: usize) {
        let w = b.slice_witness(i, j, d1, d2).unwrap();
        assert!(w.is_read_once());
        if let Some(d) = b.source_depth() {
            assert!(w.depth() <= d.max(1), "depth {} > {d}: {w}", w.depth());
        }
        for x in 0..1u64 << b.n() {
            let x = bits(x, b.n());
            assert_eq!(
                w.evaluate(&x).unwrap(),
                b.slice_indicator(i, j, d1, d2, &x).unwrap(),
                "slice {i}..{j} {d1}->{d2}, witness {w}"
            );
        }
    }

    fn check_all_witnesses(b: &OrderedBp) {
        for i in 1..=b.len() {
            for j in i..=b.len() {
                for d1 in 0..b.width() {
                    for d2 in 0..b.width() {
                        check_witness(b, i, j, d1, d2);
                    }
                }
            }
        }
    }

    #[test]
    fn leaf_program() {
        let b = OrderedBp::from_circuit(&parse("x0").unwrap());
        assert_eq!((b.width(), b.len()), (2, 1));
        assert!(b.accepts(&[true]).unwrap());
        assert!(!b.accepts(&[false]).unwrap());
        let b = OrderedBp::from_circuit(&parse("(not x0)").unwrap());
        assert!(b.accepts(&[false]).unwrap());
    }

    #[test]
    fn and3_is_a_width_two_chain() {
        let c = parse("(and x0 x1 x2)").unwrap();
        let b = OrderedBp::from_circuit(&c);
        assert_eq!(b.width(), 2);
        for x in 0..8 {
            assert_eq!(b.accepts(&bits(x, 3)).unwrap(), x == 7);
        }
    }

    #[test]
    fn tribes_has_width_three() {
        let c = gen_tribes(2, 2).unwrap();
        let b = OrderedBp::from_circuit(&c);
        assert!(b.width() <= 3);
        assert!(b.equivalent_to(&c).unwrap());
        check_all_witnesses(&b);
    }

    #[test]
    fn constants() {
        let t = OrderedBp::from_circuit(&parse("(or x0 1)").unwrap());
        assert_eq!((t.width(), t.len()), (1, 0));
        assert!(t.accepts(&[false]).unwrap());
        let f = OrderedBp::from_circuit(&parse("(and x0 0)").unwrap());
        assert!(!f.accepts(&[true]).unwrap());
        check_all_witnesses(&f);
    }

    #[test]
    fn random_conversions_and_witnesses() {
        for seed in 0..60 {
            let n = 2 + seed as usize % 7;
            let d = 1 + seed as usize % 4;
            let c = gen_random_read_once(n, d, seed).unwrap();
            let b = OrderedBp::from_circuit(&c);
            assert!(b.width() <= c.depth().max(1) + 1, "{c}");
            assert!(b.equivalent_to(&c).unwrap(), "{c}");
            check_all_witnesses(&b);
        }
    }

    #[test]
    fn whole_program_witness_is_the_circuit() {
        let c = parse("(or (and x0 (not x1)) (and x2 (or x3 x4)))").unwrap();
        let b = OrderedBp::from_circuit(&c);
        let w = b.slice_witness(1, b.len(), START, START).unwrap();
        assert_eq!(w.truth_table().unwrap(), c.truth_table().unwrap());
    }

    #[test]
    fn reject_is_absorbing_in_witnesses() {
        let b = OrderedBp::from_circuit(&parse("(and x0 (or x1 x2))").unwrap());
        let r = b.width() - 1;
        for d2 in 0..b.width() {
            let w = b.slice_witness(1, 2, r, d2).unwrap();
            assert_eq!(w.is_const(), Some(d2 == r));
        }
    }

    #[test]
    fn witnesses_survive_closure_operations() {
        let c = gen_random_read_once(6, 3, 11).unwrap();
        let b = OrderedBp::from_circuit(&c);
        let mask = RestrictionMask::new(
            vec![true, false, true, true, false, true],
            vec![false, true, false, false, false, false],
        )
        .unwrap();
        let r = b.restrict(&mask).unwrap();
        check_all_witnesses(&r);
        let pi: Vec<usize> = (0..b.width()).rev().collect();
        check_all_witnesses(&b.permute(&pi, Side::Pre).unwrap());
        check_all_witnesses(&r.permute(&pi, Side::Post).unwrap());
        assert!(matches!(
            b.subprogram(1, 2).unwrap().slice_witness(1, 2, 0, 0),
            Err(Error::MissingMetadata)
        ));
    }

    #[test]
    fn restrict_commutes_with_conversion() {
        for seed in 0..30 {
            let c = gen_random_read_once(7, 3, seed).unwrap();
            let free: Vec<bool> = (0..7).map(|i| (seed >> i) & 1 == 1).collect();
            let values: Vec<bool> = (0..7).map(|i| (seed >> (i + 1)) & 1 == 0).collect();
            let mask = RestrictionMask::new(free, values).unwrap();
            let a = OrderedBp::from_circuit(&c.restrict(&mask).unwrap());
            let b = OrderedBp::from_circuit(&c).restrict(&mask).unwrap();
            for x in 0..128 {
                let x = bits(x, 7);
                assert_eq!(a.accepts(&x).unwrap(), b.accepts(&x).unwrap());
            }
        }
    }
}
