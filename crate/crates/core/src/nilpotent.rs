//! The integer Heisenberg group inside 3×3 unipotent matrices, and the
//! polynomial girth bound obtained by reducing entries modulo `M`.

use std::collections::HashSet;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::words::{Evaluator, FreeWord, Letter, SlWord};

/// Upper triangular integer matrix with unit diagonal, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct UnipotentMatrix {
    dim: usize,
    entries: Vec<i64>,
}

impl UnipotentMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1;
        }
        UnipotentMatrix { dim, entries }
    }

    /// `I + E_{i,i+1}`, with `i` counted from 1.
    pub fn elementary(dim: usize, i: usize) -> Self {
        let mut m = Self::identity(dim);
        m.entries[(i - 1) * dim + i] = 1;
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::input("matrix must be square"));
            }
            for (j, &v) in row.iter().enumerate() {
                let ok = match i.cmp(&j) {
                    std::cmp::Ordering::Greater => v == 0,
                    std::cmp::Ordering::Equal => v == 1,
                    std::cmp::Ordering::Less => true,
                };
                if !ok {
                    return Err(Error::input("matrix is not upper unitriangular"));
                }
                entries.push(v);
            }
        }
        Ok(UnipotentMatrix { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry in row `i`, column `j`, both from 1.
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[(i - 1) * self.dim + (j - 1)]
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim)
    }

    pub fn max_abs_entry(&self) -> i64 {
        let d = self.dim;
        (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).map(|(i, j)| self.entries[i * d + j].abs()).max().unwrap_or(0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let d = self.dim;
        let mut entries = vec![0; d * d];
        for i in 0..d {
            for k in i..d {
                let a = self.entries[i * d + k];
                if a == 0 {
                    continue;
                }
                for j in k..d {
                    entries[i * d + j] += a * other.entries[k * d + j];
                }
            }
        }
        UnipotentMatrix { dim: d, entries }
    }

    /// `(I + N)⁻¹ = I − N + N² − …`, finite since `N` is nilpotent.
    pub fn inverse(&self) -> Self {
        let d = self.dim;
        let id = Self::identity(d);
        let mut n = self.clone();
        for i in 0..d {
            n.entries[i * d + i] = 0;
        }
        let mut acc = id.clone();
        let mut term = id;
        for k in 1..d {
            term = term.mul_raw(&n);
            let sign = if k % 2 == 1 { -1 } else { 1 };
            for (a, t) in acc.entries.iter_mut().zip(&term.entries) {
                *a += sign * t;
            }
        }
        acc
    }

    fn mul_raw(&self, other: &Self) -> Self {
        let d = self.dim;
        let mut entries = vec![0; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.entries[i * d + k];
                if a != 0 {
                    for j in 0..d {
                        entries[i * d + j] += a * other.entries[k * d + j];
                    }
                }
            }
        }
        UnipotentMatrix { dim: d, entries }
    }

    /// Entries reduced into `0..m`.
    pub fn reduce(&self, m: i64) -> Self {
        UnipotentMatrix { dim: self.dim, entries: self.entries.iter().map(|v| v.rem_euclid(m)).collect() }
    }
}

/// Evaluation in `U(d, ℤ)` or `U(d, ℤ/M)`, sending generator `i` to
/// `I + E_{i,i+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Unipotent {
    pub dim: usize,
    pub modulus: Option<i64>,
}

impl Unipotent {
    pub const HEISENBERG: Unipotent = Unipotent { dim: 3, modulus: None };

    pub fn modulo(dim: usize, m: i64) -> Self {
        Unipotent { dim, modulus: Some(m) }
    }

    fn fix(&self, a: UnipotentMatrix) -> UnipotentMatrix {
        match self.modulus {
            Some(m) => a.reduce(m),
            None => a,
        }
    }

    pub fn eval(&self, w: &FreeWord) -> Result<UnipotentMatrix> {
        if w.rank() >= self.dim {
            return Err(Error::input(format!("U({}) has only {} elementary generators", self.dim, self.dim - 1)));
        }
        let mut acc = self.identity();
        for &l in w.letters() {
            acc = self.multiply(&acc, &self.letter(l));
        }
        Ok(acc)
    }

    pub fn eval_sl(&self, w: &SlWord) -> Result<UnipotentMatrix> {
        if w.rank() >= self.dim {
            return Err(Error::input(format!("U({}) has only {} elementary generators", self.dim, self.dim - 1)));
        }
        Ok(w.evaluate(self))
    }

    fn letter(&self, l: Letter) -> UnipotentMatrix {
        let g = self.generator(l.unsigned_abs() as usize);
        if l > 0 {
            g
        } else {
            self.inverse(&g)
        }
    }
}

impl Evaluator for Unipotent {
    type Elem = UnipotentMatrix;

    fn identity(&self) -> UnipotentMatrix {
        UnipotentMatrix::identity(self.dim)
    }

    fn generator(&self, index: usize) -> UnipotentMatrix {
        UnipotentMatrix::elementary(self.dim, index)
    }

    fn multiply(&self, a: &UnipotentMatrix, b: &UnipotentMatrix) -> UnipotentMatrix {
        self.fix(a.mul(b))
    }

    fn inverse(&self, a: &UnipotentMatrix) -> UnipotentMatrix {
        self.fix(a.inverse())
    }
}

/// Image of a rank-2 word under `x ↦ E₁₂, y ↦ E₂₃`.
pub fn heisenberg_eval(w: &FreeWord) -> Result<UnipotentMatrix> {
    if w.rank() != 2 {
        return Err(Error::input("the Heisenberg representation takes rank-2 words"));
    }
    Unipotent::HEISENBERG.eval(w)
}

/// Largest radius accepted by [`heisenberg_ball`].
pub const MAX_BALL_RADIUS: usize = 24;

/// The images of `B(n)` in the Heisenberg group, found by breadth-first
/// search over group elements rather than words. Sorted.
pub fn heisenberg_ball(n: usize) -> Result<Vec<UnipotentMatrix>> {
    if n > MAX_BALL_RADIUS {
        return Err(Error::Resource { what: "Heisenberg ball radius".into(), cap: MAX_BALL_RADIUS });
    }
    let h = Unipotent::HEISENBERG;
    let steps: Vec<UnipotentMatrix> = [1, -1, 2, -2].iter().map(|&l| h.letter(l)).collect();
    let mut seen: HashSet<UnipotentMatrix> = HashSet::new();
    let mut frontier = vec![h.identity()];
    seen.insert(h.identity());
    for _ in 0..n {
        let mut next = Vec::new();
        for g in &frontier {
            for s in &steps {
                let e = g.mul(s);
                if seen.insert(e.clone()) {
                    next.push(e);
                }
            }
        }
        frontier = next;
    }
    let mut out: Vec<UnipotentMatrix> = seen.into_iter().collect();
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntryBound {
    pub n: usize,
    /// Largest absolute entry over the ball images.
    pub exact: i64,
    /// `n(n+1)/2 + 1`.
    pub analytic: i64,
}

pub fn entry_bound(n: usize) -> Result<EntryBound> {
    let exact = heisenberg_ball(n)?.iter().map(UnipotentMatrix::max_abs_entry).max().unwrap_or(0);
    let analytic = (n * (n + 1) / 2 + 1) as i64;
    if exact > analytic {
        return Err(Error::internal(format!("entry {exact} exceeds the analytic bound {analytic} at n = {n}")));
    }
    Ok(EntryBound { n, exact, analytic })
}

/// Girth bound for the Heisenberg group at radius `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NilpotentGirth {
    pub n: usize,
    pub modulus: i64,
    /// `|U(3, ℤ/M)| = M³`.
    pub bound: u64,
    pub injective: bool,
    pub ball_size: usize,
    pub entry_bound: EntryBound,
    /// The coarser count `M^{d²}` in decimal.
    pub coarse_bound: String,
}

/// Reduces the ball images modulo `M = 2·entry_bound(n) + 1` and checks
/// injectivity pairwise.
pub fn girth_upper_bound_nilpotent(n: usize) -> Result<NilpotentGirth> {
    if n == 0 {
        return Err(Error::input("the nilpotent girth bound needs n >= 1"));
    }
    let eb = entry_bound(n)?;
    let m = 2 * eb.exact + 1;
    let ball = heisenberg_ball(n)?;
    let mut reduced: Vec<UnipotentMatrix> = ball.iter().map(|g| g.reduce(m)).collect();
    reduced.sort();
    let injective = reduced.windows(2).all(|p| p[0] != p[1]);
    if !injective {
        return Err(Error::internal(format!("reduction modulo {m} is not injective on the ball of radius {n}")));
    }
    let bound = (m as u64).pow(3);
    let coarse = BigUint::from(m as u64).pow(9);
    Ok(NilpotentGirth {
        n,
        modulus: m,
        bound,
        injective,
        ball_size: ball.len(),
        entry_bound: eb,
        coarse_bound: coarse.to_string(),
    })
}
