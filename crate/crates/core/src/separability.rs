//! Divisibility functions and residual girth, computed by scanning finite
//! quotients in increasing order. Every search is capped; past the cap the
//! answer is reported as unknown.

use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lcm::{lcm_ball_witness, WitnessCertificate};
use crate::lowindex::{degree_cap, SubgroupKind, SubgroupSearch};
use crate::perm::{GroupWord, PermQuotient, RECORD_ORDER_CAP};
use crate::words::{Ball, FreeWord, SlBuilder, SlWord};

/// A searched value: `Some(v)` with the quotient realizing it, or `None`
/// when nothing up to `cap` qualifies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SepResult {
    #[serde(serialize_with = "value_or_unknown")]
    pub value: Option<usize>,
    pub witness: Option<PermQuotient>,
    pub cap: usize,
}

fn value_or_unknown<S: Serializer>(v: &Option<usize>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_u64(*v as u64),
        None => s.serialize_str("unknown"),
    }
}

impl SepResult {
    fn unknown(cap: usize) -> Self {
        SepResult { value: None, witness: None, cap }
    }

    /// The value if known, otherwise the lower bound `cap + 1`.
    pub fn value_or_lower_bound(&self) -> usize {
        self.value.unwrap_or(self.cap + 1)
    }
}

fn check_cap(cap: usize) -> Result<()> {
    let limit = degree_cap();
    if cap > limit {
        return Err(Error::Resource { what: "search degree".into(), cap: limit });
    }
    Ok(())
}

fn check_nontrivial(w: &FreeWord) -> Result<()> {
    if w.is_identity() {
        return Err(Error::input("divisibility is undefined at the identity"));
    }
    Ok(())
}

/// `D(γ)`: the least index of a subgroup avoiding `γ`.
pub fn divisibility(gamma: &FreeWord, cap: usize) -> Result<SepResult> {
    check_nontrivial(gamma)?;
    check_cap(cap)?;
    for d in 2..=cap {
        let search = SubgroupSearch::new(gamma.rank(), d, SubgroupKind::All)?;
        if let Some(q) = search.find_first(|q| q.trace(gamma, 0).map(|p| p != 0).unwrap_or(false)) {
            return Ok(SepResult { value: Some(d), witness: Some(q), cap });
        }
    }
    Ok(SepResult::unknown(cap))
}

/// `D^⊴(γ)`: the least index of a normal subgroup avoiding `γ`. Accepts
/// flat and straight-line words.
pub fn normal_divisibility<W: GroupWord>(gamma: &W, cap: usize) -> Result<SepResult> {
    if gamma.is_identity_word() {
        return Err(Error::input("divisibility is undefined at the identity"));
    }
    check_cap(cap)?;
    for d in 2..=cap {
        let search = SubgroupSearch::new(gamma.rank(), d, SubgroupKind::Normal)?;
        if let Some(q) = search.find_first(|q| gamma.base_image(q).map(|p| p != 0).unwrap_or(false)) {
            return Ok(SepResult { value: Some(d), witness: Some(q), cap });
        }
    }
    Ok(SepResult::unknown(cap))
}

/// `D_max(n)` or `D^⊴_max(n)` with the element attaining it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DmaxRow {
    pub rank: usize,
    pub radius: usize,
    pub normal: bool,
    #[serde(serialize_with = "value_or_unknown")]
    pub value: Option<usize>,
    /// First element in ball order attaining the maximum, or the first
    /// element left unresolved when the value is unknown.
    #[serde(serialize_with = "crate::serde_opt_text")]
    pub argmax: Option<FreeWord>,
    pub cap: usize,
    pub unresolved: usize,
}

/// Maximum divisibility over the punctured ball of radius `n`. Quotients of
/// each order are enumerated once and shared by every element.
pub fn max_divisibility(rank: usize, n: usize, cap: usize, normal: bool) -> Result<DmaxRow> {
    if n == 0 {
        return Err(Error::input("the punctured ball of radius 0 is empty"));
    }
    check_cap(cap)?;
    let elements: Vec<FreeWord> = Ball::new(rank, n)?.nontrivial().collect();
    let kind = if normal { SubgroupKind::Normal } else { SubgroupKind::All };
    let mut values: Vec<Option<usize>> = vec![None; elements.len()];
    for d in 2..=cap {
        if values.iter().all(Option::is_some) {
            break;
        }
        let quotients = SubgroupSearch::new(rank, d, kind)?.collect();
        values.par_iter_mut().zip(elements.par_iter()).for_each(|(v, w)| {
            if v.is_none() && quotients.iter().any(|q| q.trace(w, 0).map(|p| p != 0).unwrap_or(false)) {
                *v = Some(d);
            }
        });
    }
    let unresolved = values.iter().filter(|v| v.is_none()).count();
    let (value, argmax) = if unresolved > 0 {
        (None, values.iter().position(Option::is_none).map(|i| elements[i].clone()))
    } else {
        let max = values.iter().flatten().copied().max();
        (max, values.iter().position(|v| *v == max).map(|i| elements[i].clone()))
    };
    Ok(DmaxRow { rank, radius: n, normal, value, argmax, cap, unresolved })
}

/// `G(n)`: the least order of a finite quotient injective on the ball of
/// radius `n`.
///
/// Two tests are run on every candidate and must agree: the ball maps
/// injectively, and no nontrivial element of the ball of radius `2n` dies.
pub fn residual_girth(rank: usize, n: usize, cap: usize) -> Result<SepResult> {
    check_cap(cap)?;
    let ball = Ball::new(rank, n)?.to_vec();
    let doubled: Vec<FreeWord> = Ball::new(rank, 2 * n)?.nontrivial().collect();
    let disagreement = AtomicBool::new(false);
    let injective = |q: &PermQuotient| {
        let mut images: Vec<usize> = ball.iter().map(|w| q.trace(w, 0).unwrap_or(usize::MAX)).collect();
        images.sort_unstable();
        images.windows(2).all(|p| p[0] != p[1])
    };
    let kernel_misses = |q: &PermQuotient| doubled.iter().all(|w| q.trace(w, 0).map(|p| p != 0).unwrap_or(false));
    let pred = |q: &PermQuotient| {
        let a = injective(q);
        if a != kernel_misses(q) {
            disagreement.store(true, Ordering::Relaxed);
        }
        a
    };
    for d in 1..=cap {
        let found = SubgroupSearch::new(rank, d, SubgroupKind::Normal)?.find_first(pred);
        if disagreement.load(Ordering::Relaxed) {
            return Err(Error::internal(format!("girth tests disagree at order {d}")));
        }
        if let Some(q) = found {
            return Ok(SepResult { value: Some(d), witness: Some(q), cap });
        }
    }
    Ok(SepResult::unknown(cap))
}

/// `G_ℤ(n) = 2n + 1`.
pub fn residual_girth_z(n: u64) -> u64 {
    2 * n + 1
}

/// Least `m ≥ 1` not dividing `k`; this is `D_ℤ(k)` for `k ≠ 0`.
pub fn smallest_nondivisor(k: u64) -> u64 {
    assert!(k != 0, "every integer divides 0");
    (1..).find(|m| !k.is_multiple_of(*m)).expect("some integer does not divide k")
}

/// A sound upper bound on `G(n)`: the least image order of a transitive
/// action of degree at most `max_degree` that is injective on the ball.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GirthUpperBound {
    pub bound: Option<usize>,
    pub witness: Option<PermQuotient>,
    pub max_degree: usize,
}

pub fn girth_upper_bound(rank: usize, n: usize, max_degree: usize) -> Result<GirthUpperBound> {
    check_cap(max_degree)?;
    let ball = Ball::new(rank, n)?.to_vec();
    let mut best: Option<(usize, PermQuotient)> = None;
    for d in 1..=max_degree {
        for q in SubgroupSearch::new(rank, d, SubgroupKind::All)?.collect() {
            let mut images = Vec::with_capacity(ball.len());
            for w in &ball {
                images.push(q.eval_word(w)?);
            }
            images.sort();
            if images.windows(2).any(|p| p[0] == p[1]) {
                continue;
            }
            if let Some(order) = q.image_order(RECORD_ORDER_CAP) {
                if best.as_ref().is_none_or(|(b, _)| order < *b) {
                    best = Some((order, q));
                }
            }
        }
    }
    Ok(match best {
        Some((bound, q)) => GirthUpperBound { bound: Some(bound), witness: Some(q), max_degree },
        None => GirthUpperBound { bound: None, witness: None, max_degree },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    fn from_links(links: &[Link]) -> Status {
        if links.iter().any(|l| l.holds == Some(false)) {
            Status::Fail
        } else if links.iter().all(|l| l.holds == Some(true)) {
            Status::Pass
        } else {
            Status::Inconclusive
        }
    }
}

/// One inequality in a chain, with its evaluated sides.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Link {
    pub name: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub holds: Option<bool>,
    pub note: String,
}

/// Caps for the inequality checkers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InequalityCaps {
    /// Order cap for regular quotients.
    pub order: usize,
    /// Degree cap for the transitive actions bounding the girth from above.
    pub upper_bound_degree: usize,
}

impl Default for InequalityCaps {
    fn default() -> Self {
        InequalityCaps { order: 12, upper_bound_degree: 6 }
    }
}

/// Check of `log ω(n) ≤ s(D_max(2n)) log D_max(2n)` and the same bound for
/// `log G(n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasicInequalityReport {
    pub rank: usize,
    pub n: usize,
    pub omega: u128,
    pub dmax_2n: DmaxRow,
    pub normal_growth: Option<u64>,
    #[serde(serialize_with = "value_or_unknown")]
    pub girth: Option<usize>,
    /// Whether `girth` is exact or only an upper bound.
    pub girth_exact: bool,
    /// The ball injects into the product of all regular quotients of order
    /// at most `D_max(2n)`.
    pub ball_injects: Option<bool>,
    pub links: Vec<Link>,
    pub status: Status,
}

pub fn check_basic_inequality(rank: usize, n: usize, caps: InequalityCaps) -> Result<BasicInequalityReport> {
    if n == 0 {
        return Err(Error::input("the inequality needs n >= 1"));
    }
    let omega = crate::words::word_growth(rank, n)?;
    let dmax = max_divisibility(rank, 2 * n, caps.order, true)?;

    let girth_search = residual_girth(rank, n, caps.order)?;
    let (girth, girth_exact) = match girth_search.value {
        Some(g) => (Some(g), true),
        None => (girth_upper_bound(rank, n, caps.upper_bound_degree)?.bound, false),
    };

    let Some(d) = dmax.value else {
        let links = vec![
            Link::undecided("log omega(n) <= s(D) log D", "D_max(2n) is beyond the order cap"),
            Link::undecided("log G(n) <= s(D) log D", "D_max(2n) is beyond the order cap"),
        ];
        return Ok(BasicInequalityReport {
            rank,
            n,
            omega,
            dmax_2n: dmax,
            normal_growth: None,
            girth,
            girth_exact,
            ball_injects: None,
            links,
            status: Status::Inconclusive,
        });
    };

    let mut regular = Vec::new();
    let mut s = 0u64;
    for order in 1..=d {
        let qs = SubgroupSearch::new(rank, order, SubgroupKind::Normal)?.collect();
        s += qs.len() as u64;
        regular.extend(qs);
    }
    let ball = Ball::new(rank, n)?.to_vec();
    let mut fingerprints = Vec::with_capacity(ball.len());
    for w in &ball {
        let f: Result<Vec<usize>> = regular.iter().map(|q| q.trace(w, 0)).collect();
        fingerprints.push(f?);
    }
    fingerprints.sort();
    let ball_injects = fingerprints.windows(2).all(|p| p[0] != p[1]);

    let rhs = s as f64 * (d as f64).ln();
    let omega_lhs = (omega as f64).ln();
    let mut links = vec![Link::compare("log omega(n) <= s(D) log D", omega_lhs, rhs, "D = D_max(2n)")];
    links.push(match girth {
        Some(g) => {
            let lhs = (g as f64).ln();
            let holds = lhs <= rhs + 1e-12;
            if girth_exact || holds {
                let note = if girth_exact { "exact girth" } else { "girth upper bound" };
                Link { name: "log G(n) <= s(D) log D".into(), lhs: Some(lhs), rhs: Some(rhs), holds: Some(holds), note: note.into() }
            } else {
                Link::undecided("log G(n) <= s(D) log D", "girth upper bound too weak")
            }
        }
        None => Link::undecided("log G(n) <= s(D) log D", "girth beyond every cap"),
    });
    links.push(Link {
        name: "ball injects into the product of quotients of order <= D".into(),
        lhs: None,
        rhs: None,
        holds: Some(ball_injects),
        note: format!("{} regular quotients", regular.len()),
    });
    let status = Status::from_links(&links);
    Ok(BasicInequalityReport {
        rank,
        n,
        omega,
        dmax_2n: dmax,
        normal_growth: Some(s),
        girth,
        girth_exact,
        ball_injects: Some(ball_injects),
        links,
        status,
    })
}

impl Link {
    fn compare(name: &str, lhs: f64, rhs: f64, note: &str) -> Link {
        Link { name: name.into(), lhs: Some(lhs), rhs: Some(rhs), holds: Some(lhs <= rhs + 1e-12), note: note.into() }
    }

    fn undecided(name: &str, note: &str) -> Link {
        Link { name: name.into(), lhs: None, rhs: None, holds: None, note: note.into() }
    }
}

/// Check of `G(n/2) ≤ D^⊴(δ) ≤ D^⊴_max(‖δ‖) ≤ D^⊴_max(6 n ω(n)²)` for the
/// ball witness `δ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GirthInequalityReport {
    pub rank: usize,
    pub n: usize,
    pub girth_half: SepResult,
    /// Reduced length of the witness, when it could be flattened.
    pub delta_length: Option<u64>,
    pub declared_bound: u64,
    /// `6 n ω(n)²`.
    pub length_bound: u128,
    pub dnormal_delta: SepResult,
    pub links: Vec<Link>,
    pub status: Status,
}

pub fn check_girth_inequality(rank: usize, n: usize, caps: InequalityCaps) -> Result<GirthInequalityReport> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::input("the girth inequality needs an even n >= 2"));
    }
    let omega = crate::words::word_growth(rank, n)?;
    let length_bound = omega
        .checked_mul(omega)
        .and_then(|o| o.checked_mul(6 * n as u128))
        .ok_or_else(|| Error::Overflow("6 n omega(n)^2".into()))?;
    let girth_half = residual_girth(rank, n / 2, caps.order)?;

    let (delta, delta_length, declared_bound) = if rank == 1 {
        let l = lcm_up_to(n as u64);
        let mut b = SlBuilder::new(1)?;
        let x = b.generator(1)?;
        let root = b.power(x, l as i64);
        (b.finish(root), Some(l), l)
    } else {
        let cert: WitnessCertificate = lcm_ball_witness(rank, n)?;
        let len = cert.flat_delta(cert.bound as usize).map(|w| w.len() as u64);
        (cert.delta, len, cert.bound)
    };
    let dnormal_delta = normal_divisibility::<SlWord>(&delta, caps.order)?;

    let mut links = Vec::new();
    links.push(match (girth_half.value, dnormal_delta.value) {
        (Some(g), Some(v)) => Link::compare("G(n/2) <= D(delta)", g as f64, v as f64, "both exact"),
        (Some(g), None) => {
            let lb = dnormal_delta.value_or_lower_bound();
            if g <= lb {
                Link {
                    name: "G(n/2) <= D(delta)".into(),
                    lhs: Some(g as f64),
                    rhs: Some(lb as f64),
                    holds: Some(true),
                    note: "right side is a lower bound".into(),
                }
            } else {
                Link::undecided("G(n/2) <= D(delta)", "order cap below G(n/2)")
            }
        }
        (None, _) => Link::undecided("G(n/2) <= D(delta)", "G(n/2) beyond the order cap"),
    });
    links.push(match delta_length {
        Some(len) => Link {
            name: "D(delta) <= D_max(|delta|)".into(),
            lhs: None,
            rhs: Some(len as f64),
            holds: Some(len > 0),
            note: "delta is a nontrivial element of the ball of radius |delta|".into(),
        },
        None => Link::undecided("D(delta) <= D_max(|delta|)", "delta too long to flatten"),
    });
    let len_for_bound = delta_length.unwrap_or(declared_bound);
    links.push(Link {
        name: "|delta| <= 6 n omega(n)^2".into(),
        lhs: Some(len_for_bound as f64),
        rhs: Some(length_bound as f64),
        holds: Some(len_for_bound as u128 <= length_bound),
        note: "D_max is monotone in the radius".into(),
    });
    let status = Status::from_links(&links);
    Ok(GirthInequalityReport {
        rank,
        n,
        girth_half,
        delta_length,
        declared_bound,
        length_bound,
        dnormal_delta,
        links,
        status,
    })
}

/// `lcm(1, …, n)`.
pub fn lcm_up_to(n: u64) -> u64 {
    (1..=n).fold(1u64, num_integer::lcm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> FreeWord {
        FreeWord::parse(2, s).unwrap()
    }

    fn z(k: i64) -> FreeWord {
        FreeWord::generator(1, 1).unwrap().power(k)
    }

    #[test]
    fn integer_divisibility_is_smallest_nondivisor() {
        for k in 1..=64i64 {
            let r = divisibility(&z(k), 16).unwrap();
            assert_eq!(r.value, Some(smallest_nondivisor(k as u64) as usize), "k = {k}");
            let r = normal_divisibility(&z(-k), 16).unwrap();
            assert_eq!(r.value, Some(smallest_nondivisor(k as u64) as usize), "k = {k}");
        }
    }

    #[test]
    fn smallest_nondivisors() {
        assert_eq!(smallest_nondivisor(1), 2);
        assert_eq!(smallest_nondivisor(6), 4);
        assert_eq!(smallest_nondivisor(12), 5);
        assert_eq!(smallest_nondivisor(60), 7);
    }

    #[test]
    fn integer_girth_matches_closed_form() {
        for n in 1..=7 {
            let r = residual_girth(1, n, 16).unwrap();
            assert_eq!(r.value, Some(residual_girth_z(n as u64) as usize));
        }
        assert_eq!(residual_girth(1, 8, 16).unwrap().value, None);
    }

    #[test]
    fn free_group_divisibility_examples() {
        assert_eq!(divisibility(&w("a"), 8).unwrap().value, Some(2));
        assert_eq!(divisibility(&w("aa"), 8).unwrap().value, Some(3));
        assert_eq!(divisibility(&w("abAB"), 8).unwrap().value, Some(3));
        assert_eq!(normal_divisibility(&w("abAB"), 8).unwrap().value, Some(6));
        assert!(divisibility(&FreeWord::identity(2), 8).is_err());
        assert!(normal_divisibility(&w("abBA"), 8).is_err());
        // x⁶ survives once x has order 4
        assert_eq!(normal_divisibility(&w("aaaaaa"), 8).unwrap().value, Some(4));
        assert_eq!(normal_divisibility(&w("a").power(60), 8).unwrap().value, Some(7));
    }

    #[test]
    fn witness_quotient_separates() {
        let g = w("abAB");
        let r = normal_divisibility(&g, 8).unwrap();
        let q = r.witness.unwrap();
        assert!(q.is_regular());
        assert!(!q.eval_word(&g).unwrap().is_identity());
    }

    #[test]
    fn dmax_for_integers() {
        let r = max_divisibility(1, 6, 16, true).unwrap();
        assert_eq!(r.value, Some(4));
        assert_eq!(r.argmax.unwrap().to_string(), "aaaaaa");
    }

    #[test]
    fn caps_above_degree_limit_are_rejected() {
        assert!(matches!(divisibility(&w("a"), 40), Err(Error::Resource { .. })));
    }

    #[test]
    fn free_girth_radius_one() {
        // the five elements of B(1) need a quotient of order at least 5
        let r = residual_girth(2, 1, 12).unwrap();
        assert_eq!(r.value, Some(5));
    }

    #[test]
    fn girth_upper_bound_is_sound() {
        let ub = girth_upper_bound(2, 1, 4).unwrap();
        assert!(ub.bound.unwrap() >= 5);
    }

    #[test]
    fn lcm_values() {
        assert_eq!(lcm_up_to(1), 1);
        assert_eq!(lcm_up_to(6), 60);
        assert_eq!(lcm_up_to(10), 2520);
    }
}
