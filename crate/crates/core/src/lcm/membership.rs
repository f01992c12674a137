use serde::Serialize;

use crate::error::{Error, Result};
use crate::lowindex::enumerate_normal;
use crate::perm::PermQuotient;
use crate::words::{Ball, FreeWord};

/// Search limits for [`closure_membership`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MembershipBudget {
    /// Most conjugates of `γ^{±1}` in a product.
    pub max_factors: usize,
    /// Conjugators range over the ball of this radius.
    pub conjugator_radius: usize,
    /// Regular quotients up to this order are tried as refutations.
    pub quotient_order: usize,
}

impl Default for MembershipBudget {
    fn default() -> Self {
        MembershipBudget { max_factors: 4, conjugator_radius: 1, quotient_order: 8 }
    }
}

/// One factor `c γ^sign c⁻¹`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConjugateFactor {
    #[serde(serialize_with = "crate::serde_text")]
    pub conjugator: FreeWord,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "answer", rename_all = "snake_case")]
pub enum Membership {
    /// `δ` is this product of conjugates of `γ^{±1}`.
    Yes { factors: Vec<ConjugateFactor> },
    /// This quotient kills `γ` but not `δ`.
    No { quotient: PermQuotient },
    Unknown,
}

/// Regular quotients by order, enumerated once and shared between queries.
pub struct QuotientBank {
    rank: usize,
    by_order: Vec<Vec<PermQuotient>>,
}

impl QuotientBank {
    pub fn new(rank: usize) -> Self {
        QuotientBank { rank, by_order: Vec::new() }
    }

    /// Quotients of orders `2..=max_order`, in order.
    pub fn up_to(&mut self, max_order: usize) -> Result<impl Iterator<Item = &PermQuotient>> {
        while self.by_order.len() < max_order.saturating_sub(1) {
            let order = self.by_order.len() + 2;
            self.by_order.push(enumerate_normal(self.rank, order)?);
        }
        Ok(self.by_order.iter().take(max_order.saturating_sub(1)).flatten())
    }
}

/// Semi-decides `δ ∈ ⟨⟨γ⟩⟩`.
///
/// Refutations come first: a regular quotient that kills `γ` and not `δ`.
/// Otherwise the search looks for `δ` as a product of at most
/// `max_factors` conjugates `c γ^{±1} c⁻¹` with `c` in the conjugator ball.
pub fn closure_membership(delta: &FreeWord, gamma: &FreeWord, budget: MembershipBudget) -> Result<Membership> {
    let mut bank = QuotientBank::new(delta.rank());
    closure_membership_with(&mut bank, delta, gamma, budget)
}

pub fn closure_membership_with(
    bank: &mut QuotientBank,
    delta: &FreeWord,
    gamma: &FreeWord,
    budget: MembershipBudget,
) -> Result<Membership> {
    if delta.rank() != gamma.rank() {
        return Err(Error::RankMismatch { left: delta.rank(), right: gamma.rank() });
    }
    if bank.rank != delta.rank() {
        return Err(Error::RankMismatch { left: bank.rank, right: delta.rank() });
    }
    if let Some(q) = refute(bank, delta, gamma, budget.quotient_order)? {
        return Ok(Membership::No { quotient: q });
    }
    Ok(match confirm(delta, gamma, budget)? {
        Some(factors) => Membership::Yes { factors },
        None => Membership::Unknown,
    })
}

fn refute(bank: &mut QuotientBank, delta: &FreeWord, gamma: &FreeWord, order: usize) -> Result<Option<PermQuotient>> {
    for q in bank.up_to(order)? {
        if q.trace(gamma, 0)? == 0 && q.trace(delta, 0)? != 0 {
            return Ok(Some(q.clone()));
        }
    }
    Ok(None)
}

fn confirm(delta: &FreeWord, gamma: &FreeWord, budget: MembershipBudget) -> Result<Option<Vec<ConjugateFactor>>> {
    if delta.is_identity() {
        return Ok(Some(Vec::new()));
    }
    if gamma.is_identity() {
        return Ok(None);
    }
    let mut factors: Vec<(FreeWord, ConjugateFactor)> = Vec::new();
    for c in Ball::new(delta.rank(), budget.conjugator_radius)?.iter() {
        for sign in [1i8, -1] {
            let g = if sign > 0 { gamma.clone() } else { gamma.inverse() };
            let f = g.conjugate(&c)?;
            if !factors.iter().any(|(h, _)| *h == f) {
                factors.push((f, ConjugateFactor { conjugator: c.clone(), sign }));
            }
        }
    }
    let longest = factors.iter().map(|(f, _)| f.len()).max().unwrap_or(0);
    let mut path = Vec::new();
    for depth in 1..=budget.max_factors {
        if dfs(delta, depth, longest, &factors, &mut path) {
            return Ok(Some(path.into_iter().map(|i| factors[i].1.clone()).collect()));
        }
    }
    Ok(None)
}

/// Peels factors off the left of `rest`.
fn dfs(rest: &FreeWord, left: usize, longest: usize, factors: &[(FreeWord, ConjugateFactor)], path: &mut Vec<usize>) -> bool {
    if rest.is_identity() {
        return true;
    }
    if left == 0 || rest.len() > left * longest {
        return false;
    }
    for (i, (f, _)) in factors.iter().enumerate() {
        let next = f.inverse().mul_unchecked(rest);
        path.push(i);
        if dfs(&next, left - 1, longest, factors, path) {
            return true;
        }
        path.pop();
    }
    false
}

/// Result of [`exact_lcm_small`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExactLcm {
    /// Length of a shortest nontrivial element of `⋂ ⟨⟨γ⟩⟩`, when the scan
    /// decided every shorter word.
    pub value: Option<usize>,
    #[serde(serialize_with = "crate::serde_opt_text")]
    pub word: Option<FreeWord>,
    /// Words refuted at each length `1..`.
    pub refuted_by_length: Vec<usize>,
    /// First word the scan could not decide.
    #[serde(serialize_with = "crate::serde_opt_text")]
    pub undecided: Option<FreeWord>,
}

/// Largest set accepted by [`exact_lcm_small`].
pub const EXACT_MAX_SET: usize = 3;
/// Longest word length scanned by [`exact_lcm_small`].
pub const EXACT_MAX_LENGTH: usize = 12;

/// Scans nontrivial words in ball order for the first one lying in every
/// `⟨⟨γ⟩⟩`. Stops at the first word the budget cannot decide.
pub fn exact_lcm_small(set: &[FreeWord], length_cap: usize, budget: MembershipBudget) -> Result<ExactLcm> {
    let first = set.first().ok_or_else(|| Error::input("the input set must be nonempty"))?;
    if set.len() > EXACT_MAX_SET {
        return Err(Error::input(format!("exact scan takes at most {EXACT_MAX_SET} elements")));
    }
    if length_cap > EXACT_MAX_LENGTH {
        return Err(Error::Resource { what: "exact scan word length".into(), cap: EXACT_MAX_LENGTH });
    }
    let rank = first.rank();
    for g in set {
        if g.rank() != rank {
            return Err(Error::RankMismatch { left: rank, right: g.rank() });
        }
        if g.is_identity() {
            return Err(Error::input("the input set contains the identity"));
        }
    }
    let mut bank = QuotientBank::new(rank);
    let mut refuted_by_length = vec![0; length_cap];
    for w in Ball::new(rank, length_cap)?.nontrivial() {
        let mut all_yes = true;
        let mut refuted = false;
        for g in set {
            match closure_membership_with(&mut bank, &w, g, budget)? {
                Membership::Yes { .. } => {}
                Membership::No { .. } => {
                    refuted = true;
                    break;
                }
                Membership::Unknown => all_yes = false,
            }
        }
        if refuted {
            refuted_by_length[w.len() - 1] += 1;
        } else if all_yes {
            return Ok(ExactLcm { value: Some(w.len()), word: Some(w), refuted_by_length, undecided: None });
        } else {
            return Ok(ExactLcm { value: None, word: None, refuted_by_length, undecided: Some(w) });
        }
    }
    Ok(ExactLcm { value: None, word: None, refuted_by_length, undecided: None })
}
