use super::{check_rank, letter_from_key, letter_key, FreeWord, Letter};
use crate::error::{Error, Result};

/// `ω(n) = |B(n)| = 1 + Σ_{k=1..n} 2m(2m−1)^{k−1}` for the free group of rank `m`
/// with symmetric generating set.
pub fn word_growth(rank: usize, n: usize) -> Result<u128> {
    check_rank(rank)?;
    let overflow = || Error::Overflow(format!("word growth of rank {rank} at radius {n}"));
    let m = rank as u128;
    let mut total: u128 = 1;
    let mut sphere: u128 = 2 * m;
    for k in 1..=n {
        if k > 1 {
            sphere = sphere.checked_mul(2 * m - 1).ok_or_else(overflow)?;
        }
        total = total.checked_add(sphere).ok_or_else(overflow)?;
    }
    Ok(total)
}

/// The ball of reduced words of length at most `radius`, with respect to
/// `X ∪ X⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ball {
    rank: usize,
    radius: usize,
}

impl Ball {
    pub fn new(rank: usize, radius: usize) -> Result<Self> {
        check_rank(rank)?;
        Ok(Ball { rank, radius })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> Result<u128> {
        word_growth(self.rank, self.radius)
    }

    /// Every element once, ordered by length and then lexicographically
    /// with `a < A < b < B < ...`. The identity comes first.
    pub fn iter(&self) -> BallIter {
        BallIter { rank: self.rank, radius: self.radius, keys: Vec::new(), started: false }
    }

    /// The punctured ball `B•(n)`: every element except the identity.
    pub fn nontrivial(&self) -> impl Iterator<Item = FreeWord> {
        self.iter().skip(1)
    }

    pub fn to_vec(&self) -> Vec<FreeWord> {
        self.iter().collect()
    }
}

impl IntoIterator for &Ball {
    type Item = FreeWord;
    type IntoIter = BallIter;

    fn into_iter(self) -> BallIter {
        self.iter()
    }
}

/// Iterator over a [`Ball`] in enumeration order.
#[derive(Debug, Clone)]
pub struct BallIter {
    rank: usize,
    radius: usize,
    keys: Vec<u8>,
    started: bool,
}

impl BallIter {
    fn smallest_after(prev: Option<u8>) -> u8 {
        // any key except the inverse of the previous letter
        match prev {
            Some(p) if p ^ 1 == 0 => 1,
            _ => 0,
        }
    }

    fn advance(&mut self) -> bool {
        let max_key = (2 * self.rank) as u8;
        let len = self.keys.len();
        for i in (0..len).rev() {
            let forbidden = if i > 0 { Some(self.keys[i - 1] ^ 1) } else { None };
            let mut k = self.keys[i] + 1;
            if Some(k) == forbidden {
                k += 1;
            }
            if k < max_key {
                self.keys[i] = k;
                for j in i + 1..len {
                    self.keys[j] = Self::smallest_after(Some(self.keys[j - 1]));
                }
                return true;
            }
        }
        if len < self.radius {
            self.keys.clear();
            for j in 0..=len {
                let prev = if j > 0 { Some(self.keys[j - 1]) } else { None };
                self.keys.push(Self::smallest_after(prev));
            }
            return true;
        }
        false
    }
}

impl Iterator for BallIter {
    type Item = FreeWord;

    fn next(&mut self) -> Option<FreeWord> {
        if !self.started {
            self.started = true;
        } else if !self.advance() {
            self.radius = 0;
            self.keys.clear();
            return None;
        }
        let letters: Vec<Letter> = self.keys.iter().map(|&k| letter_from_key(k)).collect();
        debug_assert!(letters.iter().all(|&l| letter_key(l) < 2 * self.rank as u8));
        Some(FreeWord::from_reduced_unchecked(self.rank, letters))
    }
}
