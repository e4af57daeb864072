use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Circuit, Node};
use crate::error::{Error, Result};

/// Fan-in cap for gates drawn by [`gen_random_read_once`].
const RANDOM_MAX_FANIN: usize = 8;

/// `OR` of `m` disjoint `AND`s of width `w`, on `m * w` variables.
pub fn gen_tribes(m: usize, w: usize) -> Result<Circuit> {
    if m == 0 || w == 0 {
        return Err(Error::InvalidParameter(format!(
            "tribes needs m, w >= 1 (got m={m}, w={w})"
        )));
    }
    let clauses = (0..m)
        .map(|i| Node::And((0..w).map(|j| Node::var(i * w + j)).collect()))
        .collect();
    Circuit::new(Node::Or(clauses), m * w)
}

/// Alternating AND/OR tree of the given depth.
///
/// `fanins[0]` is the fan-in of the bottom (AND) layer, `fanins[1]` the fan-in
/// of the OR layer above it, and so on; so `gen_recursive_tribes(2, &[w, m])`
/// is `gen_tribes(m, w)`.
pub fn gen_recursive_tribes(depth: usize, fanins: &[usize]) -> Result<Circuit> {
    if depth == 0 || fanins.len() != depth || fanins.contains(&0) {
        return Err(Error::InvalidParameter(format!(
            "recursive tribes needs depth >= 1 and {depth} positive fan-ins, got {fanins:?}"
        )));
    }
    let n = fanins
        .iter()
        .try_fold(1usize, |acc, &f| acc.checked_mul(f))
        .ok_or_else(|| Error::InvalidParameter("too many leaves".into()))?;
    let mut next_var = 0;
    let root = recursive_tribes_node(depth, fanins, &mut next_var);
    Circuit::new(root, n)
}

fn recursive_tribes_node(level: usize, fanins: &[usize], next_var: &mut usize) -> Node {
    if level == 0 {
        *next_var += 1;
        return Node::var(*next_var - 1);
    }
    let children = (0..fanins[level - 1])
        .map(|_| recursive_tribes_node(level - 1, fanins, next_var))
        .collect();
    if level % 2 == 1 {
        Node::And(children)
    } else {
        Node::Or(children)
    }
}

/// A random read-once formula of gate depth exactly `depth` on `n` variables.
///
/// Gate types alternate between levels, the root type is random, variables
/// are randomly partitioned among leaves and each leaf is negated with
/// probability 1/2. Every gate has fan-in at least 2 unless `n` is too small
/// for the requested depth, in which case unary gates fill the gap.
pub fn gen_random_read_once(n: usize, depth: usize, seed: u64) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if depth == 0 && n != 1 {
        return Err(Error::InvalidParameter(
            "depth 0 only admits a single variable".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vars: Vec<usize> = (0..n).collect();
    vars.shuffle(&mut rng);
    let is_and = rng.gen_bool(0.5);
    let root = random_node(&vars, depth, is_and, &mut rng);
    Circuit::new(root, n)
}

fn gate(is_and: bool, children: Vec<Node>) -> Node {
    if is_and {
        Node::And(children)
    } else {
        Node::Or(children)
    }
}

fn random_node(vars: &[usize], depth: usize, is_and: bool, rng: &mut ChaCha8Rng) -> Node {
    let m = vars.len();
    if depth == 0 {
        debug_assert_eq!(m, 1);
        return Node::Leaf {
            var: vars[0],
            negated: rng.gen_bool(0.5),
        };
    }
    if m == 1 {
        return gate(is_and, vec![random_node(vars, depth - 1, !is_and, rng)]);
    }
    if depth == 1 {
        return gate(
            is_and,
            vars.iter()
                .map(|&v| random_node(&[v], 0, !is_and, rng))
                .collect(),
        );
    }

    // One child carries the full remaining depth and gets enough variables
    // to do so with binary gates; the rest are spread at random.
    let deep_need = depth.min(m - 1);
    let max_k = (m - deep_need + 1).clamp(2, RANDOM_MAX_FANIN);
    let k = rng.gen_range(2..=max_k);
    let mut sizes = vec![1; k];
    sizes[0] = deep_need;
    for _ in 0..(m - deep_need - (k - 1)) {
        sizes[rng.gen_range(0..k)] += 1;
    }

    let mut children = Vec::with_capacity(k);
    let mut offset = 0;
    for (i, &size) in sizes.iter().enumerate() {
        let part = &vars[offset..offset + size];
        offset += size;
        let child_depth = if i == 0 {
            depth - 1
        } else if size == 1 {
            0
        } else {
            rng.gen_range(1..=(depth - 1).min(size - 1))
        };
        children.push(random_node(part, child_depth, !is_and, rng));
    }
    children.shuffle(rng);
    gate(is_and, children)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse;

    #[test]
    fn tribes_shape() {
        let c = gen_tribes(2, 2).unwrap();
        assert_eq!(c, parse("(or (and x0 x1) (and x2 x3))").unwrap());
        assert_eq!((c.n(), c.depth()), (4, 2));
        assert!(gen_tribes(0, 3).is_err());
    }

    #[test]
    fn recursive_tribes_shape() {
        let c = gen_recursive_tribes(1, &[5]).unwrap();
        assert_eq!(c, parse("(and x0 x1 x2 x3 x4)").unwrap());
        assert_eq!(
            gen_recursive_tribes(2, &[2, 2]).unwrap(),
            gen_tribes(2, 2).unwrap()
        );
        let c = gen_recursive_tribes(3, &[2, 3, 4]).unwrap();
        assert_eq!((c.n(), c.depth(), c.leaf_count()), (24, 3, 24));
        assert!(matches!(c.root(), Node::And(cs) if cs.len() == 4));
        assert!(gen_recursive_tribes(2, &[3]).is_err());
    }

    #[test]
    fn random_is_deterministic_and_well_formed() {
        let a = gen_random_read_once(12, 3, 7).unwrap();
        let b = gen_random_read_once(12, 3, 7).unwrap();
        assert_eq!(a, b);
        for seed in 0..200 {
            for (n, d) in [(1, 0), (1, 3), (2, 4), (5, 2), (12, 3), (40, 4), (64, 2)] {
                let c = gen_random_read_once(n, d, seed).unwrap();
                assert_eq!(c.depth(), d, "n={n} d={d} seed={seed}");
                assert_eq!(c.leaf_count(), n);
                assert!(c.is_read_once());
                if n > d {
                    assert!(no_unary_gates(c.root()), "{c}");
                }
            }
        }
    }

    fn no_unary_gates(node: &Node) -> bool {
        match node {
            Node::And(cs) | Node::Or(cs) => cs.len() >= 2 && cs.iter().all(no_unary_gates),
            Node::Not(c) => no_unary_gates(c),
            _ => true,
        }
    }

    #[test]
    fn random_gates_alternate() {
        fn alternates(node: &Node, parent_and: Option<bool>) -> bool {
            match node {
                Node::And(cs) | Node::Or(cs) => {
                    let is_and = matches!(node, Node::And(_));
                    parent_and != Some(is_and) && cs.iter().all(|c| alternates(c, Some(is_and)))
                }
                _ => true,
            }
        }
        for seed in 0..50 {
            let c = gen_random_read_once(30, 4, seed).unwrap();
            assert!(alternates(c.root(), None));
        }
    }
}
