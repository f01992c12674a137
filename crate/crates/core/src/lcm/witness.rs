use super::certificate::{Derivation, Evidence, MemberDerivation, WitnessCertificate};
use crate::error::{Error, Result};
use crate::perm::PermQuotient;
use crate::words::{Ball, FreeWord, NodeId, SlBuilder};

/// Flat forms longer than this are dropped and noncommutation is decided in
/// random permutation quotients instead.
const FLAT_CAP: usize = 1 << 20;

/// Seed for the random quotients used when flat forms are unavailable.
const QUOTIENT_SEED: u64 = 0x5eed_1c3d;

struct Item {
    node: NodeId,
    flat: Option<FreeWord>,
    derivs: Vec<(usize, Derivation)>,
}

/// `k` with `2^(k-1) < n <= 2^k`, and `0` for `n <= 1`.
pub fn levels(n: usize) -> u32 {
    n.max(1).next_power_of_two().trailing_zeros()
}

/// Declared length bound `6 d 4^k` for `n` elements of length at most `d`.
pub fn declared_bound(n: usize, d: u64) -> Result<u64> {
    let k = levels(n);
    4u64.checked_pow(k)
        .and_then(|p| p.checked_mul(6))
        .and_then(|p| p.checked_mul(d))
        .ok_or_else(|| Error::Overflow(format!("length bound 6·{d}·4^{k}")))
}

/// The extra length contributed by padding and conjugators after `j` rounds:
/// `a_0 = 0`, `a_j = 4 (a_{j-1} + 2)`.
pub fn padding_offset(j: u32) -> u128 {
    (0..j).fold(0u128, |a, _| 4 * (a + 2))
}

/// Closed form of [`padding_offset`]: `2 Σ_{ℓ=1}^{j} 4^ℓ`.
pub fn padding_offset_closed(j: u32) -> u128 {
    2 * (1..=j).map(|l| 4u128.pow(l)).sum::<u128>()
}

/// Builds the iterated-commutator witness for `S`.
///
/// Pads `S` to `2^k` elements with the first generator, then repeatedly
/// pairs neighbours `(u, v)` and replaces them with `[u, μ v μ⁻¹]`, where
/// `μ` is the first of `1, x_1, …, x_m` making the two entries fail to
/// commute.
pub fn lcm_witness(set: &[FreeWord]) -> Result<WitnessCertificate> {
    let rank = check_set(set)?;
    let mut b = SlBuilder::new(rank)?;
    let inputs = set.iter().map(|g| (b.word(g), Some(g.clone()))).collect();
    let d = set.iter().map(FreeWord::len).max().unwrap_or(0) as u64;
    build(b, set.to_vec(), inputs, d)
}

/// Witness for `{x^e : e ∈ exponents}` in the free group of rank `rank`,
/// keeping every power symbolic.
pub fn lcm_witness_powers(rank: usize, exponents: &[i64]) -> Result<WitnessCertificate> {
    if exponents.is_empty() {
        return Err(Error::input("the input set must be nonempty"));
    }
    if rank < 2 {
        return Err(Error::input("lcm witnesses need rank at least 2"));
    }
    if exponents.contains(&0) {
        return Err(Error::input("x^0 is the identity and has no proper normal closure"));
    }
    let mut b = SlBuilder::new(rank)?;
    let x = b.generator(1)?;
    let x_word = FreeWord::generator(rank, 1)?;
    let mut set = Vec::with_capacity(exponents.len());
    let mut inputs = Vec::with_capacity(exponents.len());
    for &e in exponents {
        let node = b.power(x, e);
        let flat = (e.unsigned_abs() as usize <= FLAT_CAP).then(|| x_word.power(e));
        set.push(flat.clone().ok_or_else(|| Error::Resource {
            what: format!("exponent {e} in the input set"),
            cap: FLAT_CAP,
        })?);
        inputs.push((node, flat));
    }
    let d = exponents.iter().map(|e| e.unsigned_abs()).max().unwrap_or(0);
    build(b, set, inputs, d)
}

/// Witness for the nontrivial part of the ball `B(n)`, in ball order.
pub fn lcm_ball_witness(rank: usize, n: usize) -> Result<WitnessCertificate> {
    if n == 0 {
        return Err(Error::input("the punctured ball of radius 0 is empty"));
    }
    let set: Vec<FreeWord> = Ball::new(rank, n)?.nontrivial().collect();
    lcm_witness(&set)
}

fn check_set(set: &[FreeWord]) -> Result<usize> {
    let first = set.first().ok_or_else(|| Error::input("the input set must be nonempty"))?;
    let rank = first.rank();
    if rank < 2 {
        return Err(Error::input("lcm witnesses need rank at least 2"));
    }
    for (i, g) in set.iter().enumerate() {
        if g.rank() != rank {
            return Err(Error::RankMismatch { left: rank, right: g.rank() });
        }
        if g.is_identity() {
            return Err(Error::input(format!("S[{i}] is the identity")));
        }
    }
    Ok(rank)
}

fn build(
    mut b: SlBuilder,
    set: Vec<FreeWord>,
    inputs: Vec<(NodeId, Option<FreeWord>)>,
    d: u64,
) -> Result<WitnessCertificate> {
    let rank = b.rank();
    let bound = declared_bound(set.len(), d)?;
    let mut items: Vec<Item> = inputs
        .into_iter()
        .enumerate()
        .map(|(i, (node, flat))| Item { node, flat, derivs: vec![(i, Derivation::Leaf { node })] })
        .collect();

    let width = items.len().next_power_of_two();
    if items.len() > 1 {
        let x = b.generator(1)?;
        let x_word = FreeWord::generator(rank, 1)?;
        while items.len() < width {
            items.push(Item { node: x, flat: Some(x_word.clone()), derivs: Vec::new() });
        }
    }
    let conjugators: Vec<FreeWord> = std::iter::once(Ok(FreeWord::identity(rank)))
        .chain((1..=rank).map(|i| FreeWord::generator(rank, i)))
        .collect::<Result<_>>()?;
    let mut quotients = QuotientPool::new(rank);

    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len() / 2);
        let mut it = items.into_iter();
        while let (Some(u), Some(v)) = (it.next(), it.next()) {
            next.push(pair(&mut b, &conjugators, &mut quotients, u, v)?);
        }
        items = next;
    }
    let top = items.pop().ok_or_else(|| Error::internal("no witness produced"))?;

    let delta = b.finish(top.node);
    let evidence = match &top.flat {
        Some(w) if !w.is_identity() => Evidence::ReducedLength { length: w.len() },
        Some(_) => return Err(Error::internal("witness reduced to the identity")),
        None => match quotients.separating(|q| q.eval_sl(&delta).map(|p| !p.is_identity()).unwrap_or(false)) {
            Some(q) => Evidence::Quotient { quotient: q },
            None => return Err(Error::internal("no quotient found where the witness survives")),
        },
    };
    let derivations = top.derivs.into_iter().map(|(member, tree)| MemberDerivation { member, tree }).collect();
    Ok(WitnessCertificate { set, delta, bound, derivations, evidence })
}

fn pair(
    b: &mut SlBuilder,
    conjugators: &[FreeWord],
    quotients: &mut QuotientPool,
    u: Item,
    v: Item,
) -> Result<Item> {
    for mu in conjugators {
        let conj_flat = v.flat.as_ref().map(|w| w.conjugate(mu)).transpose()?;
        let conj_flat = conj_flat.filter(|w| w.len() <= FLAT_CAP);
        let noncommuting = match (&u.flat, &conj_flat) {
            (Some(a), Some(c)) => !a.commutes_with(c),
            _ => {
                let mut probe = b.clone();
                let vc = conjugated(&mut probe, v.node, mu)?;
                let c = probe.commutator(u.node, vc);
                let program = probe.snapshot(c);
                quotients
                    .separating(|q| q.eval_sl(&program).map(|p| !p.is_identity()).unwrap_or(false))
                    .is_some()
            }
        };
        if !noncommuting {
            continue;
        }
        let vc = conjugated(b, v.node, mu)?;
        let node = b.commutator(u.node, vc);
        let flat = match (&u.flat, &conj_flat) {
            (Some(a), Some(c)) => Some(a.commutator(c)?).filter(|w| w.len() <= FLAT_CAP),
            _ => None,
        };
        let mut derivs: Vec<(usize, Derivation)> = u
            .derivs
            .into_iter()
            .map(|(m, t)| (m, Derivation::CommutatorLeft { node, of: Box::new(t) }))
            .collect();
        derivs.extend(v.derivs.into_iter().map(|(m, t)| {
            let t = if vc == v.node { t } else { Derivation::Conjugate { node: vc, of: Box::new(t) } };
            (m, Derivation::CommutatorRight { node, of: Box::new(t) })
        }));
        return Ok(Item { node, flat, derivs });
    }
    Err(Error::internal("no conjugator among 1 and the generators breaks commutation"))
}

fn conjugated(b: &mut SlBuilder, node: NodeId, mu: &FreeWord) -> Result<NodeId> {
    if mu.is_identity() {
        return Ok(node);
    }
    let m = b.word(mu);
    Ok(b.conjugate(node, m))
}

/// Seeded random permutation quotients, generated on first use.
struct QuotientPool {
    rank: usize,
    pool: Option<Vec<PermQuotient>>,
}

impl QuotientPool {
    const SIZE: usize = 400;

    fn new(rank: usize) -> Self {
        QuotientPool { rank, pool: None }
    }

    fn separating(&mut self, pred: impl Fn(&PermQuotient) -> bool) -> Option<PermQuotient> {
        let rank = self.rank;
        let pool = self
            .pool
            .get_or_insert_with(|| PermQuotient::sample(rank, Self::SIZE, 5, 12, QUOTIENT_SEED).unwrap_or_default());
        pool.iter().find(|q| pred(q)).cloned()
    }
}
