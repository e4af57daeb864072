use super::{Circuit, Node};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A product distribution on `{0,1}^n`: bit `i` is 1 with probability `q[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiasVector<T> {
    q: Vec<T>,
}

impl<T: Scalar> BiasVector<T> {
    pub fn new(q: Vec<T>) -> Result<Self> {
        if let Some(bad) = q.iter().find(|v| **v < T::zero() || **v > T::one()) {
            return Err(Error::InvalidParameter(format!(
                "bias entry {bad:?} is not a probability"
            )));
        }
        Ok(BiasVector { q })
    }

    pub fn uniform(n: usize) -> Self {
        BiasVector {
            q: vec![T::half(); n],
        }
    }

    /// Every bit drawn from a coin with `E[(-1)^{x_i}] = p`, i.e.
    /// `Pr[x_i = 1] = (1 - p) / 2`.
    pub fn coin(n: usize, p: T) -> Result<Self> {
        if p < -T::one() || p > T::one() {
            return Err(Error::InvalidParameter(format!(
                "coin bias {p:?} outside [-1, 1]"
            )));
        }
        let q = (T::one() - p) * T::half();
        Ok(BiasVector { q: vec![q; n] })
    }

    /// Point mass on `x`.
    pub fn point(x: &[bool]) -> Self {
        BiasVector {
            q: x.iter()
                .map(|&b| if b { T::one() } else { T::zero() })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.q
    }
}

/// Exact `Pr[F(X) = 1]` for `X` drawn from the product distribution `q`.
///
/// Children of a gate read disjoint variables, so their outputs are
/// independent and the probabilities multiply.
pub fn acceptance_probability<T: Scalar>(c: &Circuit, q: &BiasVector<T>) -> Result<T> {
    if q.len() != c.n() {
        return Err(Error::LengthMismatch {
            expected: c.n(),
            got: q.len(),
        });
    }
    Ok(node_acceptance(c.root(), q.as_slice()))
}

pub(crate) fn node_acceptance<T: Scalar>(node: &Node, q: &[T]) -> T {
    match node {
        Node::And(cs) => cs
            .iter()
            .fold(T::one(), |acc, c| acc * node_acceptance(c, q)),
        Node::Or(cs) => {
            T::one()
                - cs.iter()
                    .fold(T::one(), |acc, c| acc * (T::one() - node_acceptance(c, q)))
        }
        Node::Not(c) => T::one() - node_acceptance(c, q),
        Node::Leaf { var, negated } => {
            if *negated {
                T::one() - q[*var].clone()
            } else {
                q[*var].clone()
            }
        }
        Node::Const(b) => {
            if *b {
                T::one()
            } else {
                T::zero()
            }
        }
    }
}

impl Circuit {
    /// `F̂[0] = E_U[F]`, exactly.
    pub fn mean(&self) -> crate::Rational {
        node_acceptance(self.root(), &vec![crate::Rational::half(); self.n()])
    }
}
