//! Free group words: reduction, arithmetic, balls and straight-line programs.

mod ball;
mod slp;

pub use ball::{word_growth, Ball, BallIter};
pub use slp::{Evaluator, Instr, NodeId, SlBuilder, SlWord, DEFAULT_WORK_LIMIT};

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Largest rank with a textual representation (`a`..`z`).
pub const MAX_RANK: usize = 26;

/// A signed generator index: `+i` is generator `i`, `-i` its inverse, `i >= 1`.
pub type Letter = i8;

/// Position of a letter in the enumeration order `a < A < b < B < ...`.
#[inline]
pub fn letter_key(l: Letter) -> u8 {
    let g = l.unsigned_abs() - 1;
    2 * g + u8::from(l < 0)
}

#[inline]
pub fn letter_from_key(key: u8) -> Letter {
    let g = (key / 2 + 1) as Letter;
    if key.is_multiple_of(2) {
        g
    } else {
        -g
    }
}

/// A freely reduced word in the free group of the given rank.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FreeWord {
    rank: usize,
    letters: Vec<Letter>,
}

fn check_rank(rank: usize) -> Result<()> {
    if rank == 0 || rank > MAX_RANK {
        return Err(Error::input(format!("rank must lie in 1..={MAX_RANK}, got {rank}")));
    }
    Ok(())
}

impl FreeWord {
    pub fn identity(rank: usize) -> Self {
        FreeWord { rank, letters: Vec::new() }
    }

    /// The `index`-th generator, counting from 1.
    pub fn generator(rank: usize, index: usize) -> Result<Self> {
        check_rank(rank)?;
        if index == 0 || index > rank {
            return Err(Error::GeneratorOutOfRange { index: index as i64, rank });
        }
        Ok(FreeWord { rank, letters: vec![index as Letter] })
    }

    /// Freely reduces a raw letter sequence.
    pub fn reduce(rank: usize, raw: &[Letter]) -> Result<Self> {
        check_rank(rank)?;
        let mut letters: Vec<Letter> = Vec::with_capacity(raw.len());
        for &l in raw {
            if l == 0 || l.unsigned_abs() as usize > rank {
                return Err(Error::GeneratorOutOfRange { index: l as i64, rank });
            }
            push_reduced(&mut letters, l);
        }
        Ok(FreeWord { rank, letters })
    }

    /// Builds from letters already known to be reduced and in range.
    pub(crate) fn from_reduced_unchecked(rank: usize, letters: Vec<Letter>) -> Self {
        debug_assert!(letters.windows(2).all(|w| w[0] != -w[1]));
        FreeWord { rank, letters }
    }

    /// Parses the textual syntax: `a..z` are generators, `A..Z` inverses.
    /// Whitespace is ignored and `1` or the empty string denote the identity.
    pub fn parse(rank: usize, text: &str) -> Result<Self> {
        check_rank(rank)?;
        let trimmed = text.trim();
        if trimmed == "1" {
            return Ok(Self::identity(rank));
        }
        let mut raw = Vec::with_capacity(trimmed.len());
        for c in trimmed.chars().filter(|c| !c.is_whitespace()) {
            let l = match c {
                'a'..='z' => (c as u8 - b'a' + 1) as Letter,
                'A'..='Z' => -((c as u8 - b'A' + 1) as Letter),
                _ => return Err(Error::input(format!("unexpected character {c:?} in word {text:?}"))),
            };
            raw.push(l);
        }
        Self::reduce(rank, &raw)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Word length `‖w‖` with respect to the free basis.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    fn same_rank(&self, other: &FreeWord) -> Result<()> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch { left: self.rank, right: other.rank });
        }
        Ok(())
    }

    pub fn multiply(&self, other: &FreeWord) -> Result<FreeWord> {
        self.same_rank(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &FreeWord) -> FreeWord {
        let mut letters = self.letters.clone();
        for &l in &other.letters {
            push_reduced(&mut letters, l);
        }
        FreeWord { rank: self.rank, letters }
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|&l| -l).collect(),
        }
    }

    /// `by · self · by⁻¹`.
    pub fn conjugate(&self, by: &FreeWord) -> Result<FreeWord> {
        self.same_rank(by)?;
        Ok(by.mul_unchecked(self).mul_unchecked(&by.inverse()))
    }

    /// `[self, other] = self · other · self⁻¹ · other⁻¹`.
    pub fn commutator(&self, other: &FreeWord) -> Result<FreeWord> {
        self.same_rank(other)?;
        Ok(self
            .mul_unchecked(other)
            .mul_unchecked(&self.inverse())
            .mul_unchecked(&other.inverse()))
    }

    /// `self^k`. The result is materialized, so callers bound `|k| · len`.
    pub fn power(&self, k: i64) -> FreeWord {
        if k == 0 {
            return FreeWord::identity(self.rank);
        }
        let (conj, core) = self.cyclic_split();
        let base = if k < 0 { core.inverse() } else { core };
        let mut letters = conj.letters.clone();
        letters.reserve(base.len() * k.unsigned_abs() as usize + conj.len());
        for _ in 0..k.unsigned_abs() {
            letters.extend_from_slice(&base.letters);
        }
        letters.extend(conj.letters.iter().rev().map(|&l| -l));
        FreeWord { rank: self.rank, letters }
    }

    /// Length of `self^k` without materializing it.
    pub fn power_len(&self, k: i64) -> u128 {
        if k == 0 || self.is_identity() {
            return 0;
        }
        let (conj, core) = self.cyclic_split();
        2 * conj.len() as u128 + core.len() as u128 * k.unsigned_abs() as u128
    }

    /// Writes `self = c · core · c⁻¹` with `core` cyclically reduced.
    pub fn cyclic_split(&self) -> (FreeWord, FreeWord) {
        let n = self.letters.len();
        let mut i = 0;
        while 2 * i + 1 < n && self.letters[i] == -self.letters[n - 1 - i] {
            i += 1;
        }
        (
            FreeWord { rank: self.rank, letters: self.letters[..i].to_vec() },
            FreeWord { rank: self.rank, letters: self.letters[i..n - i].to_vec() },
        )
    }

    /// Whether `self` and `other` commute; in a free group this holds iff
    /// they are powers of a common element.
    pub fn commutes_with(&self, other: &FreeWord) -> bool {
        self.mul_unchecked(other) == other.mul_unchecked(self)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

#[inline]
fn push_reduced(letters: &mut Vec<Letter>, l: Letter) {
    if letters.last() == Some(&-l) {
        letters.pop();
    } else {
        letters.push(l);
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.letters {
            let g = l.unsigned_abs() - 1;
            let c = if l > 0 { b'a' + g } else { b'A' + g };
            write!(f, "{}", c as char)?;
        }
        Ok(())
    }
}

impl fmt::Debug for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            write!(f, "FreeWord(1)")
        } else {
            write!(f, "FreeWord({self})")
        }
    }
}

/// Length first, then lexicographic in `a < A < b < B < ...`.
impl Ord for FreeWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank
            .cmp(&other.rank)
            .then(self.letters.len().cmp(&other.letters.len()))
            .then_with(|| {
                let a = self.letters.iter().map(|&l| letter_key(l));
                let b = other.letters.iter().map(|&l| letter_key(l));
                a.cmp(b)
            })
    }
}

impl PartialOrd for FreeWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
