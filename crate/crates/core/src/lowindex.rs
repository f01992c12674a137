//! Enumeration of finite-index subgroups of free groups.
//!
//! Subgroups of index `d` correspond to transitive actions on `d` points
//! with a marked basepoint, up to relabelings fixing the basepoint. The
//! search builds coset tables in standard form: scanning points in order and,
//! for each point, the columns `g₁, g₁⁻¹, g₂, g₂⁻¹, ...`, new points are
//! numbered in order of first appearance. Every subgroup has exactly one
//! standard table, so no deduplication pass is needed.
//!
//! Normal subgroups of index `q` are the regular actions of degree `q`. For
//! those the search also maintains, for every point `p`, the partial
//! automorphism `σ_p` of the table sending the basepoint to `p`; a regular
//! action has all of them, so inconsistencies prune and forced entries are
//! filled in as deductions.

use std::ops::ControlFlow;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::perm::{PermQuotient, Permutation};
use crate::words::{Ball, FreeWord, MAX_RANK};

/// Degree cap applied to every search unless lowered.
pub const DEFAULT_MAX_DEGREE: usize = 16;

static DEGREE_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_DEGREE);

/// Current process-wide degree cap.
pub fn degree_cap() -> usize {
    DEGREE_CAP.load(Ordering::Relaxed)
}

/// Lowers the degree cap; values above [`DEFAULT_MAX_DEGREE`] are clamped.
pub fn set_degree_cap(cap: usize) {
    DEGREE_CAP.store(cap.clamp(1, DEFAULT_MAX_DEGREE), Ordering::Relaxed);
}

const UNSET: u8 = u8::MAX;

/// Frontier size targeted before handing subtrees to worker threads.
const FRONTIER_TARGET: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubgroupKind {
    /// All subgroups of the given index (pointed transitive actions).
    All,
    /// Normal subgroups of the given index (regular actions).
    Normal,
}

/// A partial coset table with an undo trail.
#[derive(Clone)]
struct Table {
    cols: usize,
    n: usize,
    cells: Vec<u8>,
    trail: Vec<u32>,
}

impl Table {
    fn new(degree: usize, cols: usize) -> Self {
        Table { cols, n: 1, cells: vec![UNSET; degree * cols], trail: Vec::new() }
    }

    #[inline]
    fn get(&self, p: usize, c: usize) -> u8 {
        self.cells[p * self.cols + c]
    }

    #[inline]
    fn link(&mut self, p: usize, c: usize, j: usize) {
        let a = p * self.cols + c;
        let b = j * self.cols + (c ^ 1);
        self.cells[a] = j as u8;
        self.trail.push(a as u32);
        if a != b {
            self.cells[b] = p as u8;
            self.trail.push(b as u32);
        }
    }

    fn undo(&mut self, mark: usize) {
        for a in self.trail.drain(mark..) {
            self.cells[a as usize] = UNSET;
        }
    }

    fn first_undefined(&self, from: usize) -> Option<usize> {
        (from..self.n * self.cols).find(|&a| self.cells[a] == UNSET)
    }

    fn to_quotient(&self, rank: usize) -> PermQuotient {
        let gens = (0..rank)
            .map(|g| {
                let imgs = (0..self.n).map(|p| self.get(p, 2 * g) as usize).collect();
                Permutation::from_images(imgs).expect("complete coset table columns are bijections")
            })
            .collect();
        PermQuotient::new(gens).expect("coset tables give valid actions")
    }
}

enum Item {
    Leaf(PermQuotient),
    Partial(Table, usize),
}

/// Exhaustive search for subgroups of a fixed index in a free group.
#[derive(Debug, Clone, Copy)]
pub struct SubgroupSearch {
    rank: usize,
    degree: usize,
    kind: SubgroupKind,
}

impl SubgroupSearch {
    pub fn new(rank: usize, degree: usize, kind: SubgroupKind) -> Result<Self> {
        if rank == 0 || rank > MAX_RANK {
            return Err(Error::input(format!("rank must lie in 1..={MAX_RANK}, got {rank}")));
        }
        if degree == 0 {
            return Err(Error::input("index must be at least 1"));
        }
        let cap = degree_cap();
        if degree > cap {
            return Err(Error::Resource { what: format!("index {degree}"), cap });
        }
        Ok(SubgroupSearch { rank, degree, kind })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn kind(&self) -> SubgroupKind {
        self.kind
    }

    fn root(&self) -> Table {
        Table::new(self.degree, 2 * self.rank)
    }

    /// Deduces entries forced by regularity. Returns false on contradiction.
    fn propagate(&self, t: &mut Table) -> bool {
        if self.kind == SubgroupKind::All {
            return true;
        }
        let d = self.degree;
        let mut sigma = vec![UNSET; d];
        let mut sigma_inv = vec![UNSET; d];
        let mut queue: Vec<usize> = Vec::with_capacity(d);
        loop {
            let mut changed = false;
            for p in 1..t.n {
                sigma.fill(UNSET);
                sigma_inv.fill(UNSET);
                sigma[0] = p as u8;
                sigma_inv[p] = 0;
                queue.clear();
                queue.push(0);
                let mut head = 0;
                while head < queue.len() {
                    let i = queue[head];
                    head += 1;
                    let si = sigma[i] as usize;
                    for c in 0..t.cols {
                        let j = t.get(i, c);
                        if j == UNSET {
                            continue;
                        }
                        let j = j as usize;
                        let target = t.get(si, c);
                        if target != UNSET {
                            let target = target as usize;
                            if sigma[j] == UNSET {
                                if sigma_inv[target] != UNSET {
                                    return false;
                                }
                                sigma[j] = target as u8;
                                sigma_inv[target] = j as u8;
                                queue.push(j);
                            } else if sigma[j] as usize != target {
                                return false;
                            }
                        } else if sigma[j] != UNSET {
                            let s = sigma[j] as usize;
                            if t.get(s, c ^ 1) != UNSET {
                                return false;
                            }
                            t.link(si, c, s);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn leaf(&self, t: &Table) -> Option<PermQuotient> {
        let q = t.to_quotient(self.rank);
        match self.kind {
            SubgroupKind::All => Some(q),
            SubgroupKind::Normal => q.is_regular().then_some(q),
        }
    }

    /// Admissible values for entry `a`: each existing point whose inverse
    /// column is free, then a new point if room remains.
    fn candidates(&self, t: &Table, a: usize) -> impl Iterator<Item = usize> + '_ {
        let c = a % t.cols;
        let existing: Vec<usize> = (0..t.n).filter(|&j| t.get(j, c ^ 1) == UNSET).collect();
        let fresh = (t.n < self.degree).then_some(t.n);
        existing.into_iter().chain(fresh)
    }

    /// Sets entry `a` to `j` (a new point when `j == t.n`) and propagates.
    /// On failure the table is restored and false is returned.
    fn assign(&self, t: &mut Table, a: usize, j: usize) -> bool {
        let mark = t.trail.len();
        let fresh = j == t.n;
        if fresh {
            t.n += 1;
        }
        t.link(a / t.cols, a % t.cols, j);
        if self.propagate(t) {
            return true;
        }
        Self::retract(t, mark, fresh);
        false
    }

    fn retract(t: &mut Table, mark: usize, fresh: bool) {
        t.undo(mark);
        if fresh {
            t.n -= 1;
        }
    }

    fn dfs(
        &self,
        t: &mut Table,
        from: usize,
        visit: &mut dyn FnMut(PermQuotient) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let Some(a) = t.first_undefined(from) else {
            if t.n == self.degree {
                if let Some(q) = self.leaf(t) {
                    return visit(q);
                }
            }
            return ControlFlow::Continue(());
        };
        let choices: Vec<usize> = self.candidates(t, a).collect();
        for j in choices {
            let mark = t.trail.len();
            let fresh = j == t.n;
            if self.assign(t, a, j) {
                let flow = self.dfs(t, a + 1, visit);
                Self::retract(t, mark, fresh);
                flow?;
            }
        }
        ControlFlow::Continue(())
    }

    /// Children of a partial table, in search order.
    fn children(&self, t: &Table, a: usize) -> Vec<Item> {
        let mut out = Vec::new();
        for j in self.candidates(t, a).collect::<Vec<_>>() {
            let mut child = t.clone();
            if !self.assign(&mut child, a, j) {
                continue;
            }
            match child.first_undefined(a + 1) {
                None if child.n == self.degree => {
                    if let Some(q) = self.leaf(&child) {
                        out.push(Item::Leaf(q));
                    }
                }
                None => {}
                Some(next) => out.push(Item::Partial(child, next)),
            }
        }
        out
    }

    fn frontier(&self) -> Vec<Item> {
        let mut root = self.root();
        if !self.propagate(&mut root) {
            return Vec::new();
        }
        let mut items = match root.first_undefined(0) {
            None => self.leaf(&root).map(Item::Leaf).into_iter().collect(),
            Some(a) => vec![Item::Partial(root, a)],
        };
        loop {
            let partial = items.iter().filter(|i| matches!(i, Item::Partial(..))).count();
            if partial == 0 || partial >= FRONTIER_TARGET {
                return items;
            }
            let mut next = Vec::with_capacity(items.len() * 2);
            for item in items {
                match item {
                    Item::Leaf(q) => next.push(Item::Leaf(q)),
                    Item::Partial(t, a) => next.extend(self.children(&t, a)),
                }
            }
            items = next;
        }
    }

    /// Visits every subgroup sequentially in the deterministic search order.
    pub fn for_each(&self, mut visit: impl FnMut(PermQuotient) -> ControlFlow<()>) {
        let mut root = self.root();
        if self.propagate(&mut root) {
            let _ = self.dfs(&mut root, 0, &mut visit);
        }
    }

    /// All subgroups, in the same order as [`SubgroupSearch::for_each`],
    /// computed on the current rayon pool.
    pub fn collect(&self) -> Vec<PermQuotient> {
        self.frontier()
            .into_par_iter()
            .map(|item| match item {
                Item::Leaf(q) => vec![q],
                Item::Partial(mut t, a) => {
                    let mut out = Vec::new();
                    let _ = self.dfs(&mut t, a, &mut |q| {
                        out.push(q);
                        ControlFlow::Continue(())
                    });
                    out
                }
            })
            .flatten()
            .collect()
    }

    pub fn count(&self) -> usize {
        self.frontier()
            .into_par_iter()
            .map(|item| match item {
                Item::Leaf(_) => 1,
                Item::Partial(mut t, a) => {
                    let mut n = 0;
                    let _ = self.dfs(&mut t, a, &mut |_| {
                        n += 1;
                        ControlFlow::Continue(())
                    });
                    n
                }
            })
            .sum()
    }

    /// The first subgroup in search order satisfying `pred`. The answer does
    /// not depend on the number of worker threads.
    pub fn find_first<F>(&self, pred: F) -> Option<PermQuotient>
    where
        F: Fn(&PermQuotient) -> bool + Sync + Send,
    {
        self.frontier().into_par_iter().find_map_first(|item| match item {
            Item::Leaf(q) => pred(&q).then_some(q),
            Item::Partial(mut t, a) => {
                let mut found = None;
                let _ = self.dfs(&mut t, a, &mut |q| {
                    if pred(&q) {
                        found = Some(q);
                        ControlFlow::Break(())
                    } else {
                        ControlFlow::Continue(())
                    }
                });
                found
            }
        })
    }
}

/// One representative per subgroup of index `degree`: the pointed
/// transitive actions in standard form.
pub fn enumerate_subgroups(rank: usize, degree: usize) -> Result<Vec<PermQuotient>> {
    Ok(SubgroupSearch::new(rank, degree, SubgroupKind::All)?.collect())
}

/// One regular action per normal subgroup of index `order`.
pub fn enumerate_normal(rank: usize, order: usize) -> Result<Vec<PermQuotient>> {
    Ok(SubgroupSearch::new(rank, order, SubgroupKind::Normal)?.collect())
}

/// `s(n)`: the number of normal subgroups of index at most `n`.
pub fn normal_subgroup_growth(rank: usize, n: usize) -> Result<u64> {
    if n == 0 {
        return Err(Error::input("normal subgroup growth needs n >= 1"));
    }
    let mut total = 0u64;
    for q in 1..=n {
        total += SubgroupSearch::new(rank, q, SubgroupKind::Normal)?.count() as u64;
    }
    Ok(total)
}

/// Word battery separating kernels of regular actions of order `order`:
/// every reduced word of length at most `2⌈log₂ order⌉ + 2`.
pub fn fingerprint_battery(rank: usize, order: usize) -> Result<Vec<FreeWord>> {
    let log = usize::BITS - order.max(1).saturating_sub(1).leading_zeros();
    Ok(Ball::new(rank, 2 * log as usize + 2)?.to_vec())
}

/// Which battery words lie in the kernel of `q`.
pub fn kernel_fingerprint(q: &PermQuotient, battery: &[FreeWord]) -> Result<Vec<bool>> {
    battery.iter().map(|w| Ok(q.eval_word(w)?.is_identity())).collect()
}
