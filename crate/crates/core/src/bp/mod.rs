//! Ordered branching programs.
//!
//! Inside the library states are numbered from 0, and state [`START`] is
//! both the start and the accept state. The JSON form shifts every state by
//! one so that start/accept is state 1. Edge layers are numbered `1..=len`
//! and the slice `i..=j` covers edge layers `i` through `j`, so it reads
//! `j - i + 1` inputs.

mod convert;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, RestrictionMask};
use crate::error::{Error, Result};
use crate::fourier::{spectrum_of_table, SpectralTable};
use crate::scalar::Rational;

use convert::Block;
pub use convert::{WitnessCheck, WITNESS_CHECK_CAP};

/// The start and accept state.
pub const START: usize = 0;

/// Largest number of input variables for [`OrderedBp::matrix_levelmass_upper`].
pub const LEVELMASS_CAP: usize = 20;

/// One edge layer: the variable it reads (`None` for padding) and one total
/// map per bit value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layer {
    pub var: Option<usize>,
    pub on_zero: Vec<usize>,
    pub on_one: Vec<usize>,
}

impl Layer {
    pub fn identity(width: usize) -> Self {
        Layer {
            var: None,
            on_zero: (0..width).collect(),
            on_one: (0..width).collect(),
        }
    }

    pub fn map(&self, bit: bool) -> &[usize] {
        if bit {
            &self.on_one
        } else {
            &self.on_zero
        }
    }

    fn step(&self, x: &[bool], state: usize) -> usize {
        match self.var {
            Some(v) => self.map(x[v])[state],
            None => self.on_zero[state],
        }
    }
}

/// Which end of the program a state permutation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `(πB)[x](u) = B[x](π(u))`.
    Pre,
    /// `(Bπ)[x](u) = π(B[x](u))`.
    Post,
}

/// Provenance kept by [`OrderedBp::from_circuit`] so that slice witnesses
/// can be produced later; closure operations update it where they can.
#[derive(Clone, Debug)]
struct Construction {
    root: Block,
    depth: usize,
    restriction: Option<RestrictionMask>,
    pre: Option<Vec<usize>>,
    post: Option<Vec<usize>>,
}

/// A layered width-`w` program over the variables `0..n`, each read at most
/// once.
#[derive(Clone, Debug)]
pub struct OrderedBp {
    width: usize,
    n: usize,
    layers: Vec<Layer>,
    construction: Option<Arc<Construction>>,
}

impl PartialEq for OrderedBp {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width && self.n == other.n && self.layers == other.layers
    }
}

impl OrderedBp {
    pub fn new(width: usize, n: usize, layers: Vec<Layer>) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidParameter("width must be positive".into()));
        }
        let mut seen = vec![false; n];
        for (idx, layer) in layers.iter().enumerate() {
            if layer.on_zero.len() != width || layer.on_one.len() != width {
                return Err(Error::InvalidParameter(format!(
                    "layer {} does not have width {width}",
                    idx + 1
                )));
            }
            if let Some(&bad) = layer
                .on_zero
                .iter()
                .chain(&layer.on_one)
                .find(|&&s| s >= width)
            {
                return Err(Error::InvalidParameter(format!(
                    "layer {} maps to state {bad} outside width {width}",
                    idx + 1
                )));
            }
            if let Some(v) = layer.var {
                if v >= n {
                    return Err(Error::VariableOutOfRange { var: v, n });
                }
                if std::mem::replace(&mut seen[v], true) {
                    return Err(Error::NotReadOnce(v));
                }
            }
        }
        Ok(OrderedBp {
            width,
            n,
            layers,
            construction: None,
        })
    }

    /// The length-0 program.
    pub fn empty(width: usize, n: usize) -> Self {
        OrderedBp {
            width,
            n,
            layers: Vec::new(),
            construction: None,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of input variables.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edge layers.
    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn var_order(&self) -> Vec<Option<usize>> {
        self.layers.iter().map(|l| l.var).collect()
    }

    /// Whether slice witnesses are available.
    pub fn has_construction(&self) -> bool {
        self.construction.is_some()
    }

    /// `B[x](start)`.
    pub fn evaluate(&self, x: &[bool], start: usize) -> Result<usize> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        if start >= self.width {
            return Err(Error::IndexOutOfRange(format!(
                "state {start} in a width-{} program",
                self.width
            )));
        }
        Ok(self.run(x, start, 0, self.layers.len()))
    }

    /// Whether the program accepts `x`.
    pub fn accepts(&self, x: &[bool]) -> Result<bool> {
        Ok(self.evaluate(x, START)? == START)
    }

    /// Runs layers `lo..hi` (0-based, half open) without bounds checks.
    fn run(&self, x: &[bool], mut state: usize, lo: usize, hi: usize) -> usize {
        for layer in &self.layers[lo..hi] {
            state = layer.step(x, state);
        }
        state
    }

    /// Runs the program on every input encoded as the bits of `0..2^n`.
    fn run_index(&self, x: u64, start: usize) -> usize {
        let mut state = start;
        for layer in &self.layers {
            let bit = layer.var.is_some_and(|v| (x >> v) & 1 == 1);
            state = layer.map(bit)[state];
        }
        state
    }

    /// `B ∘ B'`: run `self`, then `other`.
    pub fn concat(&self, other: &OrderedBp) -> Result<OrderedBp> {
        if self.width != other.width {
            return Err(Error::WidthMismatch(self.width, other.width));
        }
        let n = self.n.max(other.n);
        let mut seen = vec![false; n];
        for v in self.layers.iter().filter_map(|l| l.var) {
            seen[v] = true;
        }
        if let Some(v) = other.layers.iter().filter_map(|l| l.var).find(|&v| seen[v]) {
            return Err(Error::VariableOverlap(v));
        }
        let mut layers = self.layers.clone();
        layers.extend(other.layers.iter().cloned());
        Ok(OrderedBp {
            width: self.width,
            n,
            layers,
            construction: None,
        })
    }

    /// `B_{i..j}`, edge layers `i` through `j` inclusive, 1-indexed.
    pub fn subprogram(&self, i: usize, j: usize) -> Result<OrderedBp> {
        self.check_span(i, j)?;
        Ok(OrderedBp {
            width: self.width,
            n: self.n,
            layers: self.layers[i - 1..j].to_vec(),
            construction: None,
        })
    }

    fn check_span(&self, i: usize, j: usize) -> Result<()> {
        if i == 0 || i > j || j > self.layers.len() {
            return Err(Error::IndexOutOfRange(format!(
                "layers {i}..={j} in a program of length {}",
                self.layers.len()
            )));
        }
        Ok(())
    }

    /// `B|_{t̄←x}`: every layer reading a fixed variable becomes the constant
    /// transition for its bit and stops reading input.
    pub fn restrict(&self, mask: &RestrictionMask) -> Result<OrderedBp> {
        if mask.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: mask.len(),
            });
        }
        let layers = self
            .layers
            .iter()
            .map(|layer| match layer.var {
                Some(v) if !mask.free()[v] => {
                    let map = layer.map(mask.values()[v]).to_vec();
                    Layer {
                        var: None,
                        on_zero: map.clone(),
                        on_one: map,
                    }
                }
                _ => layer.clone(),
            })
            .collect();
        let construction = self.construction.as_ref().map(|c| {
            let restriction = match &c.restriction {
                None => mask.clone(),
                Some(old) => {
                    let free = old
                        .free()
                        .iter()
                        .zip(mask.free())
                        .map(|(a, b)| *a && *b)
                        .collect();
                    let values = (0..self.n)
                        .map(|v| {
                            if old.free()[v] {
                                mask.values()[v]
                            } else {
                                old.values()[v]
                            }
                        })
                        .collect();
                    RestrictionMask::new(free, values).expect("equal lengths")
                }
            };
            Arc::new(Construction {
                restriction: Some(restriction),
                ..(**c).clone()
            })
        });
        Ok(OrderedBp {
            width: self.width,
            n: self.n,
            layers,
            construction,
        })
    }

    /// Relabels states at the start (`Pre`) or the end (`Post`).
    pub fn permute(&self, pi: &[usize], side: Side) -> Result<OrderedBp> {
        check_permutation(pi, self.width)?;
        if self.layers.is_empty() {
            return Err(Error::InvalidParameter(
                "cannot permute a length-0 program".into(),
            ));
        }
        let mut layers = self.layers.clone();
        match side {
            Side::Pre => {
                let first = &mut layers[0];
                first.on_zero = pi.iter().map(|&u| self.layers[0].on_zero[u]).collect();
                first.on_one = pi.iter().map(|&u| self.layers[0].on_one[u]).collect();
            }
            Side::Post => {
                let last = layers.last_mut().expect("non-empty");
                for s in last.on_zero.iter_mut().chain(last.on_one.iter_mut()) {
                    *s = pi[*s];
                }
            }
        }
        let construction = self.construction.as_ref().map(|c| {
            let mut c = (**c).clone();
            match side {
                // π2(π1 B) starts by applying π1 ∘ π2.
                Side::Pre => {
                    let old = c.pre.take().unwrap_or_else(|| (0..self.width).collect());
                    c.pre = Some(pi.iter().map(|&u| old[u]).collect());
                }
                Side::Post => {
                    let old = c.post.take().unwrap_or_else(|| (0..self.width).collect());
                    c.post = Some(old.iter().map(|&s| pi[s]).collect());
                }
            }
            Arc::new(c)
        });
        Ok(OrderedBp {
            width: self.width,
            n: self.n,
            layers,
            construction,
        })
    }

    /// Variables read by edge layers `i..=j`, in layer order.
    pub fn slice_variables(&self, i: usize, j: usize) -> Result<Vec<usize>> {
        self.check_span(i, j)?;
        Ok(self.layers[i - 1..j].iter().filter_map(|l| l.var).collect())
    }

    /// `B^{d1,d2}_{i..j}(x) = [B_{i..j}[x](d1) = d2]` evaluated directly.
    pub fn slice_indicator(
        &self,
        i: usize,
        j: usize,
        d1: usize,
        d2: usize,
        x: &[bool],
    ) -> Result<bool> {
        self.check_span(i, j)?;
        self.check_state(d1)?;
        self.check_state(d2)?;
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self.run(x, d1, i - 1, j) == d2)
    }

    fn check_state(&self, s: usize) -> Result<()> {
        if s >= self.width {
            return Err(Error::IndexOutOfRange(format!(
                "state {s} in a width-{} program",
                self.width
            )));
        }
        Ok(())
    }

    /// The function `x ↦ [B[x](u) = v]` as a spectrum over all `n` variables.
    pub fn path_spectrum(&self, u: usize, v: usize) -> Result<SpectralTable> {
        self.check_state(u)?;
        self.check_state(v)?;
        if self.n > LEVELMASS_CAP {
            return Err(Error::CapExceeded {
                what: "n",
                value: self.n,
                cap: LEVELMASS_CAP,
            });
        }
        Ok(spectrum_of_table(
            self.n,
            (0..1u64 << self.n).map(|x| self.run_index(x, u) == v),
        ))
    }

    /// `w · max_{u,v} L^k(F_{u,v})`, where `F_{u,v}` starts at `u` and accepts
    /// at `v`.
    pub fn matrix_levelmass_upper(&self, k: usize) -> Result<Rational> {
        if self.n > LEVELMASS_CAP {
            return Err(Error::CapExceeded {
                what: "n",
                value: self.n,
                cap: LEVELMASS_CAP,
            });
        }
        if k > self.n {
            return Ok(Rational::from_integer(0.into()));
        }
        let mut best = Rational::from_integer(0.into());
        for u in 0..self.width {
            // Each input ends in exactly one state, so one pass per start
            // state fills all `w` tables.
            let ends: Vec<usize> = (0..1u64 << self.n).map(|x| self.run_index(x, u)).collect();
            for v in 0..self.width {
                let table = spectrum_of_table(self.n, ends.iter().map(|&e| e == v));
                let mass = table.level_profile().abs_mass[k].clone();
                if mass > best {
                    best = mass;
                }
            }
        }
        Ok(best * Rational::from_integer(self.width.into()))
    }

    /// Whether the program accepts exactly the inputs `c` accepts, checked
    /// on all `2^n` inputs.
    pub fn equivalent_to(&self, c: &Circuit) -> Result<bool> {
        if c.n() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: c.n(),
            });
        }
        let tt = c.truth_table()?;
        Ok((0..tt.len()).all(|x| (self.run_index(x as u64, START) == START) == tt.get(x)))
    }

    pub fn to_json(&self) -> BpJson {
        BpJson {
            width: self.width,
            n: Some(self.n),
            length: self.layers.len(),
            var_order: self.var_order(),
            layers: self
                .layers
                .iter()
                .map(|l| {
                    [
                        l.on_zero.iter().map(|s| s + 1).collect(),
                        l.on_one.iter().map(|s| s + 1).collect(),
                    ]
                })
                .collect(),
        }
    }

    pub fn from_json(json: &BpJson) -> Result<Self> {
        if json.layers.len() != json.length || json.var_order.len() != json.length {
            return Err(Error::InvalidParameter(
                "length, var_order and layers disagree".into(),
            ));
        }
        let n = json.n.unwrap_or_else(|| {
            json.var_order
                .iter()
                .flatten()
                .map(|v| v + 1)
                .max()
                .unwrap_or(0)
        });
        let shift = |m: &Vec<usize>| -> Result<Vec<usize>> {
            m.iter()
                .map(|&s| {
                    s.checked_sub(1)
                        .ok_or_else(|| Error::InvalidParameter("states are numbered from 1".into()))
                })
                .collect()
        };
        let layers = json
            .layers
            .iter()
            .zip(&json.var_order)
            .map(|([m0, m1], &var)| {
                Ok(Layer {
                    var,
                    on_zero: shift(m0)?,
                    on_one: shift(m1)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        OrderedBp::new(json.width, n, layers)
    }
}

fn check_permutation(pi: &[usize], width: usize) -> Result<()> {
    let mut seen = vec![false; width];
    if pi.len() != width {
        return Err(Error::LengthMismatch {
            expected: width,
            got: pi.len(),
        });
    }
    for &s in pi {
        if s >= width || std::mem::replace(&mut seen[s], true) {
            return Err(Error::InvalidParameter(format!(
                "{pi:?} is not a permutation of 0..{width}"
            )));
        }
    }
    Ok(())
}

/// Serialised program. States are 1-indexed; `var_order[i]` is `null` for
/// padding layers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BpJson {
    pub width: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub length: usize,
    pub var_order: Vec<Option<usize>>,
    pub layers: Vec<[Vec<usize>; 2]>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse;

    fn bits(x: u64, n: usize) -> Vec<bool> {
        (0..n).map(|i| (x >> i) & 1 == 1).collect()
    }

    /// Width 2, accepts iff x0 = x1 = 1; state 1 rejects.
    fn and2() -> OrderedBp {
        let layer = |v| Layer {
            var: Some(v),
            on_zero: vec![1, 1],
            on_one: vec![0, 1],
        };
        OrderedBp::new(2, 2, vec![layer(0), layer(1)]).unwrap()
    }

    #[test]
    fn identity_program_returns_start() {
        let b = OrderedBp::new(3, 1, vec![Layer::identity(3)]).unwrap();
        for s in 0..3 {
            assert_eq!(b.evaluate(&[true], s).unwrap(), s);
        }
        assert!(b.evaluate(&[true], 3).is_err());
        assert!(b.evaluate(&[], 0).is_err());
    }

    #[test]
    fn and2_program() {
        let b = and2();
        for x in 0..4 {
            assert_eq!(b.accepts(&bits(x, 2)).unwrap(), x == 3);
        }
        assert!(b.equivalent_to(&parse("(and x0 x1)").unwrap()).unwrap());
    }

    #[test]
    fn construction_rejects_bad_programs() {
        let l = Layer {
            var: Some(0),
            on_zero: vec![0, 2],
            on_one: vec![0, 1],
        };
        assert!(OrderedBp::new(2, 1, vec![l]).is_err());
        assert!(matches!(
            OrderedBp::new(
                2,
                2,
                vec![and2().layers[0].clone(), and2().layers[0].clone()]
            ),
            Err(Error::NotReadOnce(0))
        ));
    }

    #[test]
    fn concat_semantics() {
        let a = OrderedBp::new(2, 2, vec![and2().layers[0].clone()]).unwrap();
        let b = OrderedBp::new(2, 2, vec![and2().layers[1].clone()]).unwrap();
        let ab = a.concat(&b).unwrap();
        for x in 0..4 {
            let x = bits(x, 2);
            for s in 0..2 {
                let mid = a.evaluate(&x, s).unwrap();
                assert_eq!(ab.evaluate(&x, s).unwrap(), b.evaluate(&x, mid).unwrap());
            }
        }
        assert_eq!(ab, and2());
        assert_eq!(and2().concat(&OrderedBp::empty(2, 2)).unwrap(), and2());
        assert!(matches!(a.concat(&a), Err(Error::VariableOverlap(0))));
        assert!(matches!(
            a.concat(&OrderedBp::empty(3, 2)),
            Err(Error::WidthMismatch(2, 3))
        ));
    }

    #[test]
    fn subprogram_and_restrict() {
        let b = and2();
        assert_eq!(b.subprogram(1, 2).unwrap(), b);
        assert!(b.subprogram(0, 1).is_err());
        assert!(b.subprogram(2, 3).is_err());
        let all = RestrictionMask::fix_all(vec![true, false]);
        let r = b.restrict(&all).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.var_order().iter().all(Option::is_none));
        for x in 0..4 {
            assert_eq!(r.evaluate(&bits(x, 2), 0).unwrap(), 1);
        }
    }

    #[test]
    fn permutation_sides() {
        let b = and2();
        assert_eq!(b.permute(&[0, 1], Side::Pre).unwrap(), b);
        let post = b.permute(&[1, 0], Side::Post).unwrap();
        let pre = b.permute(&[1, 0], Side::Pre).unwrap();
        for x in 0..4 {
            let x = bits(x, 2);
            for s in 0..2 {
                let base = b.evaluate(&x, s).unwrap();
                assert_eq!(post.evaluate(&x, s).unwrap(), 1 - base);
                assert_eq!(pre.evaluate(&x, s).unwrap(), b.evaluate(&x, 1 - s).unwrap());
            }
        }
        assert!(b.permute(&[0, 0], Side::Pre).is_err());
        assert!(OrderedBp::empty(2, 0).permute(&[1, 0], Side::Post).is_err());
    }

    #[test]
    fn json_round_trip_is_one_indexed() {
        let b = and2();
        let json = b.to_json();
        assert_eq!(json.layers[0], [vec![2, 2], vec![1, 2]]);
        assert_eq!(json.var_order, vec![Some(0), Some(1)]);
        assert_eq!(OrderedBp::from_json(&json).unwrap(), b);
        let text = serde_json::to_string(&json).unwrap();
        let back: BpJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back, json);
    }

    #[test]
    fn levelmass_upper_examples() {
        let trivial = OrderedBp::new(1, 2, vec![]).unwrap();
        assert_eq!(
            trivial.matrix_levelmass_upper(1).unwrap(),
            Rational::from_integer(0.into())
        );

        // For AND_2 the four path functions are x0x1, its complement, the
        // constant 0 and the constant 1; the largest level-1 mass is 1/2.
        let b = and2();
        assert_eq!(
            b.matrix_levelmass_upper(1).unwrap(),
            Rational::from_integer(1.into())
        );
        let accept = b.path_spectrum(0, 0).unwrap().level_profile();
        for k in 0..=2 {
            assert!(b.matrix_levelmass_upper(k).unwrap() >= accept.abs_mass[k]);
        }
    }
}
