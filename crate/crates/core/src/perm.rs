//! Permutation images of free groups.
//!
//! A [`PermQuotient`] is a homomorphism `F_m → Sym(d)` given by the images of
//! the `m` generators. Pointed at point 0 it encodes the subgroup stabilizing
//! that point (index `d` when transitive); when the action is regular it
//! encodes a normal subgroup whose quotient has order `d`.
//!
//! Permutations act on the right, so paths are read left to right: the image
//! of `p` under `uv` is `(p·u)·v`.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{Evaluator, FreeWord, SlWord};

/// Largest degree representable by the point type.
pub const MAX_POINTS: usize = 255;

/// Order cap used when a record needs the image order.
pub const RECORD_ORDER_CAP: usize = 10_000;

const UNSET: u8 = u8::MAX;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<u8>,
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        assert!(degree <= MAX_POINTS);
        Permutation { images: (0..degree as u8).collect() }
    }

    /// From 0-based images, checking bijectivity.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let d = images.len();
        if d == 0 || d > MAX_POINTS {
            return Err(Error::input(format!("degree {d} outside 1..={MAX_POINTS}")));
        }
        let mut seen = vec![false; d];
        for &i in &images {
            if i >= d || std::mem::replace(&mut seen[i], true) {
                return Err(Error::input(format!("{images:?} is not a permutation")));
            }
        }
        Ok(Permutation { images: images.into_iter().map(|i| i as u8).collect() })
    }

    /// From cycles over 0-based points.
    pub fn from_cycles(degree: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<usize> = (0..degree).collect();
        let mut touched = vec![false; degree];
        for cycle in cycles {
            for (k, &p) in cycle.iter().enumerate() {
                if p >= degree || std::mem::replace(&mut touched[p], true) {
                    return Err(Error::input(format!("bad cycle {cycle:?} for degree {degree}")));
                }
                images[p] = cycle[(k + 1) % cycle.len()];
            }
        }
        Self::from_images(images)
    }

    /// Parses either a 1-based image list `"2 3 1 5 4"` or cycle notation
    /// `"(1 2 3)(4 5)"`. Cycle notation needs `degree` unless the largest
    /// point mentioned is the degree.
    pub fn parse(text: &str, degree: Option<usize>) -> Result<Self> {
        let text = text.trim();
        let bad = || Error::input(format!("cannot parse permutation {text:?}"));
        if text.starts_with('(') || text.is_empty() {
            let mut cycles = Vec::new();
            let mut rest = text;
            while let Some(open) = rest.find('(') {
                let close = rest[open..].find(')').ok_or_else(bad)? + open;
                let pts = rest[open + 1..close]
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<usize>().ok().filter(|&p| p >= 1).map(|p| p - 1).ok_or_else(bad))
                    .collect::<Result<Vec<_>>>()?;
                cycles.push(pts);
                rest = &rest[close + 1..];
            }
            if !rest.trim().is_empty() {
                return Err(bad());
            }
            let max_pt = cycles.iter().flatten().map(|&p| p + 1).max().unwrap_or(1);
            let d = degree.unwrap_or(max_pt);
            Self::from_cycles(d, &cycles)
        } else {
            let imgs = text
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<usize>().ok().filter(|&p| p >= 1).map(|p| p - 1).ok_or_else(bad))
                .collect::<Result<Vec<_>>>()?;
            if let Some(d) = degree {
                if d != imgs.len() {
                    return Err(Error::input(format!("expected {d} images, got {}", imgs.len())));
                }
            }
            Self::from_images(imgs)
        }
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// Image of a 0-based point.
    #[inline]
    pub fn apply(&self, p: usize) -> usize {
        self.images[p] as usize
    }

    pub fn images(&self) -> Vec<usize> {
        self.images.iter().map(|&i| i as usize).collect()
    }

    /// 1-based image list, as used by every output format.
    pub fn image_list(&self) -> Vec<usize> {
        self.images.iter().map(|&i| i as usize + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(p, &i)| p == i as usize)
    }

    /// `self` followed by `other`: `p ↦ other(self(p))`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation { images: self.images.iter().map(|&i| other.images[i as usize]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u8; self.images.len()];
        for (p, &i) in self.images.iter().enumerate() {
            inv[i as usize] = p as u8;
        }
        Permutation { images: inv }
    }

    /// Cycles in order of their smallest point, each starting there.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree()];
        let mut out = Vec::new();
        for start in 0..self.degree() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut p = start;
            while !seen[p] {
                seen[p] = true;
                cycle.push(p);
                p = self.apply(p);
            }
            out.push(cycle);
        }
        out
    }

    /// `self^k` in time linear in the degree.
    pub fn pow(&self, k: i64) -> Permutation {
        let mut images = vec![0u8; self.degree()];
        for cycle in self.cycles() {
            let len = cycle.len() as i64;
            let shift = k.rem_euclid(len) as usize;
            for (i, &p) in cycle.iter().enumerate() {
                images[p] = cycle[(i + shift) % cycle.len()] as u8;
            }
        }
        Permutation { images }
    }

    /// Length of the cycle through `p`.
    pub fn cycle_len(&self, p: usize) -> usize {
        let mut q = self.apply(p);
        let mut len = 1;
        while q != p {
            q = self.apply(q);
            len += 1;
        }
        len
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.image_list().iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation[{self}]")
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Permutation::parse(s, None)
    }
}

/// A homomorphism from the free group of rank `gens.len()` to `Sym(degree)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PermQuotient {
    gens: Vec<Permutation>,
    inverses: Vec<Permutation>,
    transitive: bool,
    regular: bool,
}

/// Serialized form of a [`PermQuotient`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientRecord {
    pub degree: usize,
    /// 1-based image lists, one per generator.
    pub gens: Vec<Vec<usize>>,
    pub transitive: bool,
    pub regular: bool,
    /// Image order, or `null` beyond [`RECORD_ORDER_CAP`].
    pub order: Option<usize>,
}

impl PermQuotient {
    pub fn new(gens: Vec<Permutation>) -> Result<Self> {
        let degree = gens.first().map(Permutation::degree).ok_or_else(|| Error::input("need at least one generator"))?;
        if let Some(g) = gens.iter().find(|g| g.degree() != degree) {
            return Err(Error::input(format!("generator degrees differ: {degree} vs {}", g.degree())));
        }
        if gens.len() > crate::words::MAX_RANK {
            return Err(Error::input(format!("rank {} too large", gens.len())));
        }
        let inverses = gens.iter().map(Permutation::inverse).collect();
        let mut q = PermQuotient { gens, inverses, transitive: false, regular: false };
        q.transitive = q.orbit(0).len() == degree;
        q.regular = q.transitive && q.image_order(degree) == Some(degree);
        Ok(q)
    }

    /// Parses generator images separated by `;`, e.g. `"(1 2 3)(4 5); (3 4)"`.
    pub fn parse(text: &str, degree: Option<usize>) -> Result<Self> {
        let parts: Vec<&str> = text.split(';').collect();
        let mut d = degree;
        if d.is_none() {
            // infer from the largest point mentioned anywhere
            let mut max_pt = 1;
            for part in &parts {
                for tok in part.split(|c: char| !c.is_ascii_digit()).filter(|s| !s.is_empty()) {
                    max_pt = max_pt.max(tok.parse::<usize>().map_err(|e| Error::input(e.to_string()))?);
                }
            }
            d = Some(max_pt);
        }
        let gens = parts.iter().map(|p| Permutation::parse(p, d)).collect::<Result<Vec<_>>>()?;
        Self::new(gens)
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn degree(&self) -> usize {
        self.gens[0].degree()
    }

    pub fn gens(&self) -> &[Permutation] {
        &self.gens
    }

    pub fn is_transitive(&self) -> bool {
        self.transitive
    }

    /// Transitive with image order equal to the degree: the point
    /// stabilizer is trivial and the kernel is normal of index `degree`.
    pub fn is_regular(&self) -> bool {
        self.regular
    }

    fn check_rank(&self, rank: usize) -> Result<()> {
        if rank != self.rank() {
            return Err(Error::RankMismatch { left: rank, right: self.rank() });
        }
        Ok(())
    }

    #[inline]
    fn step(&self, p: usize, l: i8) -> usize {
        let g = l.unsigned_abs() as usize - 1;
        if l > 0 {
            self.gens[g].apply(p)
        } else {
            self.inverses[g].apply(p)
        }
    }

    /// Image of `p` under a flat word, without building the permutation.
    pub fn trace(&self, w: &FreeWord, p: usize) -> Result<usize> {
        self.check_rank(w.rank())?;
        Ok(w.letters().iter().fold(p, |q, &l| self.step(q, l)))
    }

    pub fn eval_word(&self, w: &FreeWord) -> Result<Permutation> {
        self.check_rank(w.rank())?;
        let images = (0..self.degree()).map(|p| w.letters().iter().fold(p, |q, &l| self.step(q, l)) as u8);
        Ok(Permutation { images: images.collect() })
    }

    /// Evaluates a straight-line word; powers cost `O(degree)`.
    pub fn eval_sl(&self, w: &SlWord) -> Result<Permutation> {
        self.check_rank(w.rank())?;
        Ok(w.evaluate(self))
    }

    /// Sorted orbit of `p` under the generators.
    pub fn orbit(&self, p: usize) -> Vec<usize> {
        let d = self.degree();
        let mut seen = vec![false; d];
        seen[p] = true;
        let mut stack = vec![p];
        while let Some(q) = stack.pop() {
            for g in &self.gens {
                let r = g.apply(q);
                if !seen[r] {
                    seen[r] = true;
                    stack.push(r);
                }
            }
        }
        (0..d).filter(|&i| seen[i]).collect()
    }

    /// Order of the image group if at most `cap`, by closure enumeration.
    pub fn image_order(&self, cap: usize) -> Option<usize> {
        let id = Permutation::identity(self.degree());
        let mut seen: HashSet<Permutation> = HashSet::new();
        seen.insert(id.clone());
        let mut queue = VecDeque::from([id]);
        while let Some(e) = queue.pop_front() {
            for g in &self.gens {
                let f = e.then(g);
                if !seen.contains(&f) {
                    if seen.len() >= cap {
                        return None;
                    }
                    seen.insert(f.clone());
                    queue.push_back(f);
                }
            }
        }
        (seen.len() <= cap).then_some(seen.len())
    }

    /// Relabels points so that they appear in the order first reached by
    /// scanning points in label order and, for each point, the columns
    /// `g₁, g₁⁻¹, g₂, g₂⁻¹, ...`. Returns `order[new] = old`.
    fn standard_order(&self) -> Vec<usize> {
        let d = self.degree();
        let mut label = vec![UNSET; d];
        let mut order = vec![0usize];
        label[0] = 0;
        let mut i = 0;
        while i < order.len() {
            let p = order[i];
            for g in 0..self.rank() {
                for q in [self.gens[g].apply(p), self.inverses[g].apply(p)] {
                    if label[q] == UNSET {
                        label[q] = order.len() as u8;
                        order.push(q);
                    }
                }
            }
            i += 1;
        }
        order
    }

    /// A byte string equal for two transitive quotients iff their actions
    /// are isomorphic by a relabeling fixing the basepoint.
    pub fn canonical_key(&self) -> Result<Vec<u8>> {
        if !self.transitive {
            return Err(Error::input("canonical key requires a transitive action"));
        }
        let order = self.standard_order();
        let mut label = vec![0u8; self.degree()];
        for (new, &old) in order.iter().enumerate() {
            label[old] = new as u8;
        }
        let mut key = Vec::with_capacity(2 + self.degree() * self.rank());
        key.push(self.rank() as u8);
        key.push(self.degree() as u8);
        for &old in &order {
            for g in &self.gens {
                key.push(label[g.apply(old)]);
            }
        }
        Ok(key)
    }

    /// The action transported along the point bijection `sigma` (old ↦ new).
    pub fn relabel(&self, sigma: &[usize]) -> Result<PermQuotient> {
        let sigma = Permutation::from_images(sigma.to_vec())?;
        if sigma.degree() != self.degree() {
            return Err(Error::input("relabeling has the wrong degree"));
        }
        let inv = sigma.inverse();
        Self::new(self.gens.iter().map(|g| inv.then(g).then(&sigma)).collect())
    }

    /// `count` quotients with uniformly random generators, degrees cycling
    /// through `min_degree..=max_degree`. Deterministic in `seed`.
    pub fn sample(rank: usize, count: usize, min_degree: usize, max_degree: usize, seed: u64) -> Result<Vec<PermQuotient>> {
        if rank == 0 || min_degree == 0 || min_degree > max_degree || max_degree > MAX_POINTS {
            return Err(Error::input("invalid sampling parameters"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let span = max_degree - min_degree + 1;
        (0..count)
            .map(|i| {
                let degree = min_degree + i % span;
                let gens = (0..rank)
                    .map(|_| {
                        let mut images: Vec<u8> = (0..degree as u8).collect();
                        images.shuffle(&mut rng);
                        Permutation { images }
                    })
                    .collect();
                Self::new(gens)
            })
            .collect()
    }

    /// Restricts to the orbit of the basepoint, relabeled in standard order.
    pub fn transitive_part(&self) -> PermQuotient {
        let order = self.standard_order();
        let mut label = vec![0usize; self.degree()];
        for (new, &old) in order.iter().enumerate() {
            label[old] = new;
        }
        let gens = self
            .gens
            .iter()
            .map(|g| Permutation { images: order.iter().map(|&old| label[g.apply(old)] as u8).collect() })
            .collect();
        Self::new(gens).expect("orbit restriction is a valid action")
    }

    pub fn to_record(&self) -> QuotientRecord {
        QuotientRecord {
            degree: self.degree(),
            gens: self.gens.iter().map(Permutation::image_list).collect(),
            transitive: self.transitive,
            regular: self.regular,
            order: self.image_order(RECORD_ORDER_CAP),
        }
    }

    /// Rebuilds from a record, rejecting stale cached flags.
    pub fn from_record(rec: &QuotientRecord) -> Result<Self> {
        let gens = rec
            .gens
            .iter()
            .map(|imgs| {
                if imgs.len() != rec.degree || imgs.contains(&0) {
                    return Err(Error::input(format!("bad image list {imgs:?}")));
                }
                Permutation::from_images(imgs.iter().map(|i| i - 1).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        let q = Self::new(gens)?;
        if q.transitive != rec.transitive || q.regular != rec.regular {
            return Err(Error::input("record flags disagree with the generators"));
        }
        Ok(q)
    }
}

impl fmt::Debug for PermQuotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.gens.iter().map(|g| format!("[{g}]")).collect();
        write!(f, "PermQuotient(d={}; {})", self.degree(), gens.join(" "))
    }
}

impl Serialize for PermQuotient {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_record().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PermQuotient {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = QuotientRecord::deserialize(d)?;
        PermQuotient::from_record(&rec).map_err(serde::de::Error::custom)
    }
}

impl Evaluator for PermQuotient {
    type Elem = Permutation;

    fn identity(&self) -> Permutation {
        Permutation::identity(self.degree())
    }

    fn generator(&self, index: usize) -> Permutation {
        self.gens[index - 1].clone()
    }

    fn multiply(&self, a: &Permutation, b: &Permutation) -> Permutation {
        a.then(b)
    }

    fn inverse(&self, a: &Permutation) -> Permutation {
        a.inverse()
    }

    fn power(&self, a: &Permutation, k: i64) -> Permutation {
        a.pow(k)
    }
}

/// Words that can be evaluated in a permutation quotient.
pub trait GroupWord: Sync {
    fn rank(&self) -> usize;
    fn eval_in(&self, q: &PermQuotient) -> Result<Permutation>;
    /// Image of the basepoint; for regular actions this determines the element.
    fn base_image(&self, q: &PermQuotient) -> Result<usize> {
        Ok(self.eval_in(q)?.apply(0))
    }
    /// Whether the word is known to reduce to the identity.
    fn is_identity_word(&self) -> bool;
}

impl GroupWord for FreeWord {
    fn rank(&self) -> usize {
        FreeWord::rank(self)
    }

    fn eval_in(&self, q: &PermQuotient) -> Result<Permutation> {
        q.eval_word(self)
    }

    fn base_image(&self, q: &PermQuotient) -> Result<usize> {
        q.trace(self, 0)
    }

    fn is_identity_word(&self) -> bool {
        self.is_identity()
    }
}

impl GroupWord for SlWord {
    fn rank(&self) -> usize {
        SlWord::rank(self)
    }

    fn eval_in(&self, q: &PermQuotient) -> Result<Permutation> {
        q.eval_sl(self)
    }

    fn is_identity_word(&self) -> bool {
        self.flatten(0).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(text: &str, d: usize) -> PermQuotient {
        PermQuotient::parse(text, Some(d)).unwrap()
    }

    fn w(s: &str) -> FreeWord {
        FreeWord::parse(2, s).unwrap()
    }

    #[test]
    fn parse_formats_agree() {
        let a = Permutation::parse("2 3 1 5 4", None).unwrap();
        let b = Permutation::parse("(1 2 3)(4 5)", None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "2 3 1 5 4");
        assert_eq!(Permutation::parse("(1 2)", Some(4)).unwrap().to_string(), "2 1 3 4");
        assert!(Permutation::parse("1 1 2", None).is_err());
        assert!(Permutation::parse("(1 2)(2 3)", None).is_err());
        assert!(Permutation::parse("(1 2", None).is_err());
    }

    #[test]
    fn eval_examples() {
        let q1 = q("(1 2); ()", 2);
        assert!(q1.eval_word(&w("aa")).unwrap().is_identity());
        let q2 = q("(1 2 3); ()", 3);
        // right action: point 1 moves to 2 under x
        assert_eq!(q2.eval_word(&w("a")).unwrap().apply(0), 1);
        let q3 = q("(1 2 3)(4 5); (3 4)", 5);
        assert!(!q3.eval_word(&w("abAB")).unwrap().is_identity());
        assert!(q3.eval_word(&w("a")).is_ok());
        assert!(q3.eval_word(&FreeWord::parse(3, "c").unwrap()).is_err());
    }

    #[test]
    fn composition_is_left_to_right() {
        let q = q("(1 2); (2 3)", 3);
        // 1 -x-> 2 -y-> 3
        assert_eq!(q.trace(&w("ab"), 0).unwrap(), 2);
        let x = q.eval_word(&w("a")).unwrap();
        let y = q.eval_word(&w("b")).unwrap();
        assert_eq!(q.eval_word(&w("ab")).unwrap(), x.then(&y));
    }

    #[test]
    fn orbits() {
        assert_eq!(q("(1 2); ()", 3).orbit(0), vec![0, 1]);
        assert_eq!(q("(); ()", 3).orbit(0), vec![0]);
        assert_eq!(q("(1 2 3 4 5); (2 4)", 5).orbit(0), vec![0, 1, 2, 3, 4]);
        assert!(!q("(1 2); ()", 3).is_transitive());
    }

    #[test]
    fn image_orders_and_regularity() {
        assert_eq!(q("(1 2); ()", 2).image_order(100), Some(2));
        assert_eq!(q("(1 2 3); (1 2)", 3).image_order(100), Some(6));
        assert_eq!(q("(1 2 3); (1 2)", 3).image_order(5), None);
        assert_eq!(q("(); ()", 3).image_order(1), Some(1));
        assert!(q("(1 2); ()", 2).is_regular());
        assert!(!q("(1 2 3); (1 2)", 3).is_regular());
        assert!(q("(); ()", 1).is_regular());
    }

    #[test]
    fn sl_powers_match_flat() {
        let q = q("(1 2 3)(4 5); (3 4)", 5);
        let mut b = crate::words::SlBuilder::new(2).unwrap();
        let x = b.generator(1).unwrap();
        let y = b.generator(2).unwrap();
        let xy = b.product(x, y);
        let p = b.power(xy, -7);
        let sl = b.finish(p);
        assert_eq!(q.eval_sl(&sl).unwrap(), q.eval_word(&w("ab").power(-7)).unwrap());
    }

    #[test]
    fn canonical_keys() {
        let a = q("(1 2); ()", 2);
        let b = a.relabel(&[0, 1]).unwrap();
        assert_eq!(a.canonical_key().unwrap(), b.canonical_key().unwrap());
        let c = q("(); (1 2)", 2);
        assert_ne!(a.canonical_key().unwrap(), c.canonical_key().unwrap());
        assert!(q("(1 2); ()", 3).canonical_key().is_err());
        let d = q("(1 2 3)(4 5); (3 4)", 5);
        let e = d.relabel(&[0, 4, 2, 3, 1]).unwrap();
        assert_eq!(d.canonical_key().unwrap(), e.canonical_key().unwrap());
        // moving the basepoint generally changes the key
        let f = d.relabel(&[2, 1, 0, 3, 4]).unwrap();
        assert_ne!(d.canonical_key().unwrap(), f.canonical_key().unwrap());
    }

    #[test]
    fn record_roundtrip_rejects_stale_flags() {
        let a = q("(1 2 3); (1 2)", 3);
        let mut rec = a.to_record();
        assert_eq!(rec.order, Some(6));
        assert_eq!(PermQuotient::from_record(&rec).unwrap(), a);
        rec.regular = true;
        assert!(PermQuotient::from_record(&rec).is_err());
    }

    #[test]
    fn cycles_and_powers() {
        let p = Permutation::parse("(1 2 3)(4 5)", None).unwrap();
        assert_eq!(p.cycles(), vec![vec![0, 1, 2], vec![3, 4]]);
        assert!(p.pow(6).is_identity());
        assert_eq!(p.pow(-1), p.inverse());
        assert_eq!(p.pow(4), p.then(&p).then(&p).then(&p));
        assert_eq!(p.cycle_len(3), 2);
    }
}
