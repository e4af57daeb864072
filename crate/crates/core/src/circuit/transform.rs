use serde::{Deserialize, Serialize};

use super::{Circuit, Node};
use crate::error::{Error, Result};

/// A restriction `(t, x)`: position `i` stays free when `free[i]`, otherwise
/// it is fixed to `values[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictionMask {
    free: Vec<bool>,
    values: Vec<bool>,
}

impl RestrictionMask {
    pub fn new(free: Vec<bool>, values: Vec<bool>) -> Result<Self> {
        if free.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: free.len(),
                got: values.len(),
            });
        }
        Ok(RestrictionMask { free, values })
    }

    /// Leaves every position free.
    pub fn identity(n: usize) -> Self {
        RestrictionMask {
            free: vec![true; n],
            values: vec![false; n],
        }
    }

    /// Fixes every position to `x`.
    pub fn fix_all(x: Vec<bool>) -> Self {
        RestrictionMask {
            free: vec![false; x.len()],
            values: x,
        }
    }

    pub fn len(&self) -> usize {
        self.free.len()
    }

    pub fn is_empty(&self) -> bool {
        self.free.is_empty()
    }

    pub fn free(&self) -> &[bool] {
        &self.free
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn free_count(&self) -> usize {
        self.free.iter().filter(|&&f| f).count()
    }

    /// `Select(t, y, x)`.
    pub fn select(&self, y: &[bool]) -> Vec<bool> {
        self.free
            .iter()
            .zip(&self.values)
            .zip(y)
            .map(|((&f, &x), &y)| if f { y } else { x })
            .collect()
    }
}

/// A circuit in NAND-only form together with the depths before and after
/// conversion.
///
/// A NAND gate is represented as `Not(And(children))`, so the gate depth of
/// the NAND circuit counts NAND layers. Negations otherwise only appear as
/// leaf flags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NandForm {
    pub circuit: Circuit,
    pub source_depth: usize,
    pub nand_depth: usize,
}

impl Circuit {
    /// De Morgan normal form: NOTs only as leaf negation flags.
    pub fn push_nots_to_leaves(&self) -> Circuit {
        Circuit::from_parts(push(&self.root, false), self.n)
    }

    /// `¬F`, with negations pushed to the leaves.
    pub fn negated(&self) -> Circuit {
        Circuit::from_parts(push(&self.root, true), self.n)
    }

    /// The monotone formula obtained by dropping every negation.
    pub fn strip_negations(&self) -> Circuit {
        fn go(node: &Node) -> Node {
            match node {
                Node::And(cs) => Node::And(cs.iter().map(go).collect()),
                Node::Or(cs) => Node::Or(cs.iter().map(go).collect()),
                Node::Not(c) => go(c),
                Node::Leaf { var, .. } => Node::var(*var),
                Node::Const(b) => Node::Const(*b),
            }
        }
        Circuit::from_parts(go(&self.push_nots_to_leaves().root), self.n)
    }

    /// Rewrites the circuit over NAND gates and negated leaves.
    pub fn to_nand_form(&self) -> NandForm {
        let root = nand(&self.root, false);
        let nand_depth = root.depth();
        NandForm {
            circuit: Circuit::from_parts(root, self.n),
            source_depth: self.depth(),
            nand_depth,
        }
    }

    /// Whether every gate is a NAND (`Not(And(..))`) and NOTs otherwise only
    /// appear on leaves.
    pub fn is_nand_form(&self) -> bool {
        fn go(node: &Node) -> bool {
            match node {
                Node::Not(inner) => match inner.as_ref() {
                    Node::And(cs) => cs.iter().all(go),
                    _ => false,
                },
                Node::Leaf { .. } | Node::Const(_) => true,
                Node::And(_) | Node::Or(_) => false,
            }
        }
        go(&self.root)
    }

    /// `F|_{t̄←x}`: fixed leaves become constants, free leaves keep their index.
    pub fn restrict(&self, mask: &RestrictionMask) -> Result<Circuit> {
        if mask.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: mask.len(),
            });
        }
        Ok(Circuit::from_parts(restrict_node(&self.root, mask), self.n))
    }

    /// Full constant propagation.
    ///
    /// Because the formula is read-once, every leaf surviving propagation is
    /// influential, so the result is a `Const` exactly when the function is
    /// constant.
    pub fn simplify(&self) -> Circuit {
        Circuit::from_parts(simplify_node(&self.root), self.n)
    }

    /// Merges every AND (OR) child of an AND (OR) gate into its parent.
    pub fn flatten(&self) -> Circuit {
        Circuit::from_parts(flatten_node(&self.root), self.n)
    }

    /// What `self.restrict(mask).simplify()` would look like, computed
    /// without building it.
    pub fn restricted_shape(&self, mask: &RestrictionMask) -> Result<RestrictedShape> {
        if mask.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: mask.len(),
            });
        }
        Ok(shape(&self.root, mask))
    }
}

/// Size of a restricted and simplified formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictedShape {
    /// `Some(b)` when the restriction collapses to the constant `b`.
    pub constant: Option<bool>,
    /// Surviving leaves.
    pub leaves: usize,
    /// Largest gate fan-in among surviving gates.
    pub max_fanin: usize,
}

impl RestrictedShape {
    fn constant(b: bool) -> Self {
        RestrictedShape {
            constant: Some(b),
            leaves: 0,
            max_fanin: 0,
        }
    }
}

fn shape(node: &Node, mask: &RestrictionMask) -> RestrictedShape {
    match node {
        Node::Const(b) => RestrictedShape::constant(*b),
        Node::Leaf { var, negated } => {
            if mask.free[*var] {
                RestrictedShape {
                    constant: None,
                    leaves: 1,
                    max_fanin: 0,
                }
            } else {
                RestrictedShape::constant(mask.values[*var] ^ negated)
            }
        }
        Node::Not(c) => {
            let mut s = shape(c, mask);
            s.constant = s.constant.map(|b| !b);
            s
        }
        Node::And(cs) | Node::Or(cs) => {
            let absorbing = matches!(node, Node::Or(_));
            let mut kept = 0;
            let mut leaves = 0;
            let mut max_fanin = 0;
            let mut only = None;
            for c in cs {
                let s = shape(c, mask);
                match s.constant {
                    Some(b) if b == absorbing => return RestrictedShape::constant(absorbing),
                    Some(_) => {}
                    None => {
                        kept += 1;
                        leaves += s.leaves;
                        max_fanin = max_fanin.max(s.max_fanin);
                        only = Some(s);
                    }
                }
            }
            match kept {
                0 => RestrictedShape::constant(!absorbing),
                1 => only.expect("one child kept"),
                _ => RestrictedShape {
                    constant: None,
                    leaves,
                    max_fanin: max_fanin.max(kept),
                },
            }
        }
    }
}

fn flatten_node(node: &Node) -> Node {
    match node {
        Node::And(cs) | Node::Or(cs) => {
            let is_and = matches!(node, Node::And(_));
            let mut out = Vec::with_capacity(cs.len());
            for c in cs {
                match flatten_node(c) {
                    Node::And(inner) if is_and => out.extend(inner),
                    Node::Or(inner) if !is_and => out.extend(inner),
                    other => out.push(other),
                }
            }
            if is_and {
                Node::And(out)
            } else {
                Node::Or(out)
            }
        }
        Node::Not(c) => Node::Not(Box::new(flatten_node(c))),
        _ => node.clone(),
    }
}

fn push(node: &Node, negate: bool) -> Node {
    match node {
        Node::And(cs) => {
            let cs = cs.iter().map(|c| push(c, negate)).collect();
            if negate {
                Node::Or(cs)
            } else {
                Node::And(cs)
            }
        }
        Node::Or(cs) => {
            let cs = cs.iter().map(|c| push(c, negate)).collect();
            if negate {
                Node::And(cs)
            } else {
                Node::Or(cs)
            }
        }
        Node::Not(c) => push(c, !negate),
        Node::Leaf { var, negated } => Node::Leaf {
            var: *var,
            negated: negated ^ negate,
        },
        Node::Const(b) => Node::Const(b ^ negate),
    }
}

/// NAND-only circuit computing `node XOR negate`.
fn nand(node: &Node, negate: bool) -> Node {
    match node {
        Node::Leaf { var, negated } => Node::Leaf {
            var: *var,
            negated: negated ^ negate,
        },
        Node::Const(b) => Node::Const(b ^ negate),
        Node::Not(c) => nand(c, !negate),
        Node::And(cs) => {
            let g = Node::nand(cs.iter().map(|c| nand(c, false)).collect());
            if negate {
                g
            } else {
                Node::nand(vec![g])
            }
        }
        Node::Or(cs) => {
            let g = Node::nand(cs.iter().map(|c| nand(c, true)).collect());
            if negate {
                Node::nand(vec![g])
            } else {
                g
            }
        }
    }
}

fn restrict_node(node: &Node, mask: &RestrictionMask) -> Node {
    match node {
        Node::And(cs) => Node::And(cs.iter().map(|c| restrict_node(c, mask)).collect()),
        Node::Or(cs) => Node::Or(cs.iter().map(|c| restrict_node(c, mask)).collect()),
        Node::Not(c) => Node::Not(Box::new(restrict_node(c, mask))),
        Node::Leaf { var, negated } => {
            if mask.free[*var] {
                node.clone()
            } else {
                Node::Const(mask.values[*var] ^ negated)
            }
        }
        Node::Const(_) => node.clone(),
    }
}

pub(crate) fn simplify_node(node: &Node) -> Node {
    match node {
        Node::Leaf { .. } | Node::Const(_) => node.clone(),
        Node::Not(c) => match simplify_node(c) {
            Node::Const(b) => Node::Const(!b),
            Node::Leaf { var, negated } => Node::Leaf {
                var,
                negated: !negated,
            },
            Node::Not(inner) => *inner,
            other => Node::Not(Box::new(other)),
        },
        Node::And(cs) | Node::Or(cs) => {
            let is_and = matches!(node, Node::And(_));
            // AND is absorbed by 0 and ignores 1; OR the other way round.
            let absorbing = !is_and;
            let mut kept = Vec::with_capacity(cs.len());
            for c in cs {
                match simplify_node(c) {
                    Node::Const(b) if b == absorbing => return Node::Const(absorbing),
                    Node::Const(_) => {}
                    other => kept.push(other),
                }
            }
            match kept.len() {
                0 => Node::Const(is_and),
                1 => kept.pop().unwrap(),
                _ if is_and => Node::And(kept),
                _ => Node::Or(kept),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse;

    fn p(text: &str) -> Circuit {
        parse(text).unwrap()
    }

    fn same_function(a: &Circuit, b: &Circuit) -> bool {
        assert_eq!(a.n(), b.n());
        a.truth_table().unwrap() == b.truth_table().unwrap()
    }

    #[test]
    fn de_morgan_examples() {
        let c = p("(not (and x0 x1))").push_nots_to_leaves();
        assert_eq!(
            c.root(),
            &Node::Or(vec![Node::neg_var(0), Node::neg_var(1)])
        );

        let already = p("(or (and x0 (not x1)) x2)").push_nots_to_leaves();
        assert_eq!(already.push_nots_to_leaves(), already);

        let nested = p("(not (or (and x0 x1) x2))").push_nots_to_leaves();
        assert_eq!(
            nested.root(),
            &Node::And(vec![
                Node::Or(vec![Node::neg_var(0), Node::neg_var(1)]),
                Node::neg_var(2)
            ])
        );
        assert!(nested.nots_at_leaves());
        assert_eq!(nested.depth(), 2);
    }

    #[test]
    fn nand_form_examples() {
        let and2 = p("(and x0 x1)");
        let nf = and2.to_nand_form();
        assert!(nf.circuit.is_nand_form());
        assert!(same_function(&nf.circuit, &and2));
        assert_eq!((nf.source_depth, nf.nand_depth), (1, 2));

        let or2 = p("(or x0 x1)").to_nand_form();
        assert_eq!(
            or2.circuit.root(),
            &Node::nand(vec![Node::neg_var(0), Node::neg_var(1)])
        );
        assert_eq!(or2.nand_depth, 1);

        assert_eq!(p("1").to_nand_form().circuit.root(), &Node::Const(true));
    }

    #[test]
    fn nand_form_at_most_doubles_depth() {
        let c = p("(and (or (and x0 x1) (not x2)) (or x3 (and x4 (not (or x5 x6)))))");
        let nf = c.to_nand_form();
        assert!(nf.circuit.is_nand_form());
        assert!(nf.nand_depth <= 2 * nf.source_depth);
        assert!(same_function(&nf.circuit, &c));
    }

    #[test]
    fn restrict_examples() {
        let and2 = p("(and x0 x1)");
        let m = RestrictionMask::new(vec![true, false], vec![false, true]).unwrap();
        assert_eq!(
            and2.restrict(&m).unwrap().root(),
            &Node::And(vec![Node::var(0), Node::Const(true)])
        );
        assert_eq!(and2.restrict(&RestrictionMask::identity(2)).unwrap(), and2);

        let c = p("(or (and x0 (not x1)) x2)");
        for x in 0..8u64 {
            let bits: Vec<bool> = (0..3).map(|i| (x >> i) & 1 == 1).collect();
            let r = c.restrict(&RestrictionMask::fix_all(bits.clone())).unwrap();
            assert_eq!(r.simplify().is_const(), Some(c.evaluate(&bits).unwrap()));
        }
        assert!(and2.restrict(&RestrictionMask::identity(3)).is_err());
    }

    #[test]
    fn simplify_examples() {
        let c = Circuit::new(Node::And(vec![Node::Const(true), Node::var(3)]), 4).unwrap();
        assert_eq!(c.simplify().root(), &Node::var(3));
        assert_eq!(p("(or 1 x0 x1)").simplify().root(), &Node::Const(true));
        assert_eq!(
            p("(and (or 0 x1) x2)").simplify().root(),
            &Node::And(vec![Node::var(1), Node::var(2)])
        );
        assert_eq!(p("(not (and 1 1))").simplify().root(), &Node::Const(false));
        assert_eq!(p("(not (not x0))").simplify().root(), &Node::var(0));
        assert_eq!(
            p("(and (or 0 0) x0)").simplify().root(),
            &Node::Const(false)
        );
    }

    #[test]
    fn strip_negations_is_monotone() {
        let c = p("(not (or (and x0 (not x1)) x2))").strip_negations();
        assert_eq!(
            c.root(),
            &Node::And(vec![
                Node::Or(vec![Node::var(0), Node::var(1)]),
                Node::var(2)
            ])
        );
    }

    #[test]
    fn flatten_merges_same_type_gates() {
        let c = p("(and x0 (and x1 (or x2 (or x3 x4))) (not (and x5 x6)))").flatten();
        assert_eq!(c.render(), "(and x0 x1 (or x2 x3 x4) (not (and x5 x6)))");
    }

    #[test]
    fn restricted_shape_matches_simplify() {
        let c = p("(or (and x0 (not x1) x2) (and (or x3 x4) x5) (not (or x6 (and x7 x8))))");
        for code in 0..3u64.pow(9) {
            let mut k = code;
            let (mut free, mut values) = (vec![false; 9], vec![false; 9]);
            for i in 0..9 {
                free[i] = k % 3 == 2;
                values[i] = k % 3 == 1;
                k /= 3;
            }
            let m = RestrictionMask::new(free, values).unwrap();
            let s = c.restrict(&m).unwrap().simplify();
            let shape = c.restricted_shape(&m).unwrap();
            assert_eq!(shape.constant, s.is_const());
            assert_eq!(shape.leaves, s.leaf_count());
            assert_eq!(shape.max_fanin, s.max_fanin());
        }
    }

    #[test]
    fn select_combines_free_and_fixed() {
        let m = RestrictionMask::new(vec![true, false, true], vec![true, true, true]).unwrap();
        assert_eq!(m.select(&[false, false, false]), vec![false, true, false]);
        assert_eq!(m.free_count(), 2);
    }
}
