use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{check_rank, push_reduced, FreeWord, Letter};
use crate::error::{Error, Result};

/// Index of an instruction inside an [`SlWord`].
pub type NodeId = usize;

/// Intermediate flat forms are never materialized beyond this many letters,
/// whatever the caller's cap.
pub const DEFAULT_WORK_LIMIT: usize = 1 << 22;

/// One instruction of a straight-line word. Operands refer to earlier nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Instr {
    /// Generator `index`, counting from 1.
    Gen { index: usize },
    Inverse { of: NodeId },
    Product { left: NodeId, right: NodeId },
    Power { base: NodeId, exponent: i64 },
    /// `by · target · by⁻¹`.
    Conjugate { target: NodeId, by: NodeId },
    /// `left · right · left⁻¹ · right⁻¹`.
    Commutator { left: NodeId, right: NodeId },
}

impl Instr {
    fn operands(&self) -> impl Iterator<Item = NodeId> {
        let (a, b) = match *self {
            Instr::Gen { .. } => (None, None),
            Instr::Inverse { of } => (Some(of), None),
            Instr::Power { base, .. } => (Some(base), None),
            Instr::Product { left, right } | Instr::Commutator { left, right } => {
                (Some(left), Some(right))
            }
            Instr::Conjugate { target, by } => (Some(target), Some(by)),
        };
        a.into_iter().chain(b)
    }
}

/// A group word stored as a DAG of instructions, so that words of
/// astronomically large flat length stay cheap to evaluate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSlWord")]
pub struct SlWord {
    rank: usize,
    nodes: Vec<Instr>,
    root: NodeId,
}

#[derive(Deserialize)]
struct RawSlWord {
    rank: usize,
    nodes: Vec<Instr>,
    root: NodeId,
}

impl TryFrom<RawSlWord> for SlWord {
    type Error = Error;

    fn try_from(raw: RawSlWord) -> Result<Self> {
        SlWord::new(raw.rank, raw.nodes, raw.root)
    }
}

/// Group operations needed to evaluate a straight-line word.
pub trait Evaluator {
    type Elem: Clone;

    fn identity(&self) -> Self::Elem;
    /// Image of generator `index` (counting from 1).
    fn generator(&self, index: usize) -> Self::Elem;
    fn multiply(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inverse(&self, a: &Self::Elem) -> Self::Elem;

    /// Square-and-multiply; implementors with cheaper powers override this.
    fn power(&self, a: &Self::Elem, k: i64) -> Self::Elem {
        let mut base = if k < 0 { self.inverse(a) } else { a.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.multiply(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.multiply(&base, &base);
            }
        }
        acc
    }
}

impl SlWord {
    /// Validates that every operand refers to an earlier node and every
    /// generator index is in range.
    pub fn new(rank: usize, nodes: Vec<Instr>, root: NodeId) -> Result<Self> {
        check_rank(rank)?;
        if root >= nodes.len() {
            return Err(Error::input(format!("root {root} out of range for {} nodes", nodes.len())));
        }
        for (id, instr) in nodes.iter().enumerate() {
            if let Instr::Gen { index } = instr {
                if *index == 0 || *index > rank {
                    return Err(Error::GeneratorOutOfRange { index: *index as i64, rank });
                }
            }
            if let Some(bad) = instr.operands().find(|&op| op >= id) {
                return Err(Error::input(format!("node {id} refers to node {bad}, which is not earlier")));
            }
        }
        Ok(SlWord { rank, nodes, root })
    }

    /// The straight-line form of a flat word.
    pub fn from_word(word: &FreeWord) -> SlWord {
        let mut b = SlBuilder::new(word.rank()).expect("FreeWord ranks are valid");
        let root = b.word(word);
        b.finish(root)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn nodes(&self) -> &[Instr] {
        &self.nodes
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    /// The same program with a different output node.
    pub fn rooted_at(&self, node: NodeId) -> Result<SlWord> {
        SlWord::new(self.rank, self.nodes.clone(), node)
    }

    fn reachable(&self, root: NodeId) -> Vec<bool> {
        let mut mark = vec![false; self.nodes.len()];
        mark[root] = true;
        for id in (0..=root).rev() {
            if mark[id] {
                for op in self.nodes[id].operands() {
                    mark[op] = true;
                }
            }
        }
        mark
    }

    /// Upper bound on the flat length, ignoring cancellation. Saturates.
    pub fn length_bound(&self) -> u128 {
        let mut len = vec![0u128; self.root + 1];
        for id in 0..=self.root {
            len[id] = match self.nodes[id] {
                Instr::Gen { .. } => 1,
                Instr::Inverse { of } => len[of],
                Instr::Product { left, right } => len[left].saturating_add(len[right]),
                Instr::Power { base, exponent } => {
                    len[base].saturating_mul(exponent.unsigned_abs() as u128)
                }
                Instr::Conjugate { target, by } => {
                    len[target].saturating_add(len[by].saturating_mul(2))
                }
                Instr::Commutator { left, right } => {
                    len[left].saturating_add(len[right]).saturating_mul(2)
                }
            };
        }
        len[self.root]
    }

    /// Evaluates the root under the homomorphism described by `e`.
    pub fn evaluate<E: Evaluator>(&self, e: &E) -> E::Elem {
        self.evaluate_at(self.root, e)
    }

    pub fn evaluate_at<E: Evaluator>(&self, root: NodeId, e: &E) -> E::Elem {
        let mark = self.reachable(root);
        let mut vals: Vec<Option<E::Elem>> = vec![None; root + 1];
        for id in 0..=root {
            if !mark[id] {
                continue;
            }
            let get = |n: NodeId| vals[n].as_ref().expect("operands are evaluated first");
            let v = match self.nodes[id] {
                Instr::Gen { index } => e.generator(index),
                Instr::Inverse { of } => e.inverse(get(of)),
                Instr::Product { left, right } => e.multiply(get(left), get(right)),
                Instr::Power { base, exponent } => e.power(get(base), exponent),
                Instr::Conjugate { target, by } => {
                    let b = get(by);
                    e.multiply(&e.multiply(b, get(target)), &e.inverse(b))
                }
                Instr::Commutator { left, right } => {
                    let (l, r) = (get(left), get(right));
                    let lr = e.multiply(l, r);
                    let lri = e.multiply(&lr, &e.inverse(l));
                    e.multiply(&lri, &e.inverse(r))
                }
            };
            vals[id] = Some(v);
        }
        vals[root].take().expect("root is reachable")
    }

    /// Reduced flat form of the root if it has at most `cap` letters.
    ///
    /// Returns `None` on overflow. Intermediate nodes may exceed `cap` up to
    /// `max(cap, DEFAULT_WORK_LIMIT)` letters; beyond that the result is also
    /// reported as overflow.
    pub fn flatten(&self, cap: usize) -> Option<FreeWord> {
        self.flatten_at(self.root, cap)
    }

    pub fn flatten_at(&self, root: NodeId, cap: usize) -> Option<FreeWord> {
        let limit = cap.max(DEFAULT_WORK_LIMIT);
        let mark = self.reachable(root);
        let mut vals: Vec<Option<FreeWord>> = vec![None; root + 1];
        for id in 0..=root {
            if !mark[id] {
                continue;
            }
            let get = |n: NodeId| vals[n].as_ref().expect("operands are evaluated first");
            let v = match self.nodes[id] {
                Instr::Gen { index } => {
                    FreeWord::from_reduced_unchecked(self.rank, vec![index as Letter])
                }
                Instr::Inverse { of } => get(of).inverse(),
                Instr::Product { left, right } => {
                    if get(left).len() + get(right).len() > 2 * limit {
                        return None;
                    }
                    get(left).mul_unchecked(get(right))
                }
                Instr::Power { base, exponent } => {
                    if get(base).power_len(exponent) > limit as u128 {
                        return None;
                    }
                    get(base).power(exponent)
                }
                Instr::Conjugate { target, by } => {
                    let b = get(by);
                    b.mul_unchecked(get(target)).mul_unchecked(&b.inverse())
                }
                Instr::Commutator { left, right } => {
                    let (l, r) = (get(left), get(right));
                    let mut letters = l.letters().to_vec();
                    let tail = r.letters().iter().copied();
                    let tail = tail
                        .chain(l.letters().iter().rev().map(|&x| -x))
                        .chain(r.letters().iter().rev().map(|&x| -x));
                    for x in tail {
                        push_reduced(&mut letters, x);
                    }
                    FreeWord::from_reduced_unchecked(self.rank, letters)
                }
            };
            if v.len() > limit {
                return None;
            }
            vals[id] = Some(v);
        }
        vals[root].take().filter(|w| w.len() <= cap)
    }
}

/// Appends instructions and hands out node ids; generator nodes are shared.
#[derive(Debug, Clone)]
pub struct SlBuilder {
    rank: usize,
    nodes: Vec<Instr>,
    letters: HashMap<Letter, NodeId>,
    interned: HashMap<Instr, NodeId>,
}

impl SlBuilder {
    pub fn new(rank: usize) -> Result<Self> {
        check_rank(rank)?;
        Ok(SlBuilder { rank, nodes: Vec::new(), letters: HashMap::new(), interned: HashMap::new() })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    fn push(&mut self, instr: Instr) -> NodeId {
        if let Some(&id) = self.interned.get(&instr) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(instr);
        self.interned.insert(instr, id);
        id
    }

    pub fn generator(&mut self, index: usize) -> Result<NodeId> {
        if index == 0 || index > self.rank {
            return Err(Error::GeneratorOutOfRange { index: index as i64, rank: self.rank });
        }
        Ok(self.push(Instr::Gen { index }))
    }

    pub fn inverse(&mut self, of: NodeId) -> NodeId {
        self.push(Instr::Inverse { of })
    }

    pub fn product(&mut self, left: NodeId, right: NodeId) -> NodeId {
        self.push(Instr::Product { left, right })
    }

    pub fn power(&mut self, base: NodeId, exponent: i64) -> NodeId {
        self.push(Instr::Power { base, exponent })
    }

    pub fn conjugate(&mut self, target: NodeId, by: NodeId) -> NodeId {
        self.push(Instr::Conjugate { target, by })
    }

    pub fn commutator(&mut self, left: NodeId, right: NodeId) -> NodeId {
        self.push(Instr::Commutator { left, right })
    }

    fn letter(&mut self, l: Letter) -> NodeId {
        if let Some(&id) = self.letters.get(&l) {
            return id;
        }
        let g = self.push(Instr::Gen { index: l.unsigned_abs() as usize });
        let id = if l > 0 { g } else { self.inverse(g) };
        self.letters.insert(l, id);
        id
    }

    /// Node for a flat word, as a balanced product tree. The identity is
    /// encoded as the zeroth power of the first generator.
    pub fn word(&mut self, w: &FreeWord) -> NodeId {
        assert_eq!(w.rank(), self.rank, "word rank must match builder rank");
        if w.is_identity() {
            let g = self.letter(1);
            return self.power(g, 0);
        }
        let mut layer: Vec<NodeId> = w.letters().iter().map(|&l| self.letter(l)).collect();
        while layer.len() > 1 {
            let mut next = Vec::with_capacity(layer.len().div_ceil(2));
            for pair in layer.chunks(2) {
                next.push(match *pair {
                    [a, b] => self.product(a, b),
                    [a] => a,
                    _ => unreachable!(),
                });
            }
            layer = next;
        }
        layer[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn finish(self, root: NodeId) -> SlWord {
        SlWord::new(self.rank, self.nodes, root).expect("builder only emits valid programs")
    }

    /// A program rooted at `root` without consuming the builder.
    pub fn snapshot(&self, root: NodeId) -> SlWord {
        SlWord::new(self.rank, self.nodes.clone(), root).expect("builder only emits valid programs")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> FreeWord {
        FreeWord::parse(2, s).unwrap()
    }

    #[test]
    fn commutator_program_flattens() {
        let mut b = SlBuilder::new(2).unwrap();
        let x = b.generator(1).unwrap();
        let y = b.generator(2).unwrap();
        let c = b.commutator(x, y);
        let sl = b.finish(c);
        assert_eq!(sl.flatten(100).unwrap(), w("abAB"));
        assert_eq!(sl.length_bound(), 4);
    }

    #[test]
    fn huge_power_overflows() {
        let mut b = SlBuilder::new(2).unwrap();
        let x = b.generator(1).unwrap();
        let p = b.power(x, 1_000_000);
        let sl = b.finish(p);
        assert_eq!(sl.flatten(10), None);
        assert_eq!(sl.length_bound(), 1_000_000);
        assert_eq!(sl.flatten(1_000_000).unwrap().len(), 1_000_000);
    }

    #[test]
    fn cancelling_powers_flatten_to_identity() {
        let mut b = SlBuilder::new(2).unwrap();
        let x = b.generator(1).unwrap();
        let p = b.power(x, 1_000);
        let q = b.power(x, -1_000);
        let r = b.product(p, q);
        assert!(b.finish(r).flatten(0).unwrap().is_identity());
    }

    #[test]
    fn from_word_roundtrip() {
        for s in ["", "a", "abAB", "bbbaBAAba", "AAAAb"] {
            let sl = SlWord::from_word(&w(s));
            assert_eq!(sl.flatten(64).unwrap(), w(s));
            assert_eq!(sl.length_bound(), w(s).len() as u128);
        }
    }

    #[test]
    fn rejects_forward_references() {
        let nodes = vec![Instr::Gen { index: 1 }, Instr::Product { left: 0, right: 2 }, Instr::Gen { index: 2 }];
        assert!(SlWord::new(2, nodes, 1).is_err());
        assert!(SlWord::new(2, vec![Instr::Gen { index: 3 }], 0).is_err());
        assert!(SlWord::new(2, vec![Instr::Gen { index: 1 }], 1).is_err());
    }

    #[test]
    fn serde_roundtrip_validates() {
        let sl = SlWord::from_word(&w("abAB"));
        let json = serde_json::to_string(&sl).unwrap();
        let back: SlWord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, sl);
        let bad = r#"{"rank":2,"nodes":[{"op":"inverse","of":0}],"root":0}"#;
        assert!(serde_json::from_str::<SlWord>(bad).is_err());
    }
}
