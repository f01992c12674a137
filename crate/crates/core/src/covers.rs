//! Finite covers of the figure eight, seen as transitive actions of `F₂`,
//! and the x-cycle bookkeeping behind the lower bound for normal residual
//! girth.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lcm::lcm_witness_powers;
use crate::lowindex::enumerate_subgroups;
use crate::perm::PermQuotient;
use crate::separability::normal_divisibility;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverAnalysis {
    pub cover: PermQuotient,
    /// Cycles of `x`, longest first, ties broken by least point.
    pub x_cycles: Vec<Vec<usize>>,
    pub x_cycle_lengths: Vec<usize>,
    pub basepoint_cycle_length: usize,
}

pub fn analyze_cover(q: &PermQuotient) -> Result<CoverAnalysis> {
    if q.rank() != 2 {
        return Err(Error::input("covers of the figure eight have rank 2"));
    }
    if !q.is_transitive() {
        return Err(Error::input("cover must be connected (a transitive action)"));
    }
    let x = &q.gens()[0];
    let mut cycles = x.cycles();
    for c in &mut cycles {
        c.sort_unstable();
    }
    cycles.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    Ok(CoverAnalysis {
        cover: q.clone(),
        x_cycle_lengths: cycles.iter().map(Vec::len).collect(),
        basepoint_cycle_length: x.cycle_len(0),
        x_cycles: cycles,
    })
}

/// Whether the lift of `x^ℓ` starting at `p` is closed, that is whether the
/// x-cycle through `p` has length dividing `ℓ`.
pub fn lift_closed(q: &PermQuotient, p: usize, exponent: &BigUint) -> Result<bool> {
    if p >= q.degree() {
        return Err(Error::input(format!("point {} outside 1..={}", p + 1, q.degree())));
    }
    let len = BigUint::from(q.gens()[0].cycle_len(p));
    Ok((exponent % len).is_zero())
}

/// Key identifying a cover up to isomorphism, forgetting the basepoint.
pub fn unpointed_key(q: &PermQuotient) -> Result<Vec<u8>> {
    let d = q.degree();
    let mut best: Option<Vec<u8>> = None;
    for p in 0..d {
        let mut sigma: Vec<usize> = (0..d).collect();
        sigma.swap(0, p);
        let key = q.relabel(&sigma)?.canonical_key()?;
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
        }
    }
    best.ok_or_else(|| Error::input("empty cover"))
}

/// Connected covers of degree at most `max_degree`, one per isomorphism
/// class, ordered by degree and then key.
pub fn covers_up_to(max_degree: usize) -> Result<Vec<PermQuotient>> {
    let mut out = Vec::new();
    for d in 1..=max_degree {
        let keyed: Vec<(Vec<u8>, PermQuotient)> = enumerate_subgroups(2, d)?
            .into_par_iter()
            .map(|q| Ok((unpointed_key(&q)?, q)))
            .collect::<Result<_>>()?;
        let mut classes: BTreeMap<Vec<u8>, PermQuotient> = BTreeMap::new();
        for (k, q) in keyed {
            classes.entry(k).or_insert(q);
        }
        out.extend(classes.into_values());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObstructionViolation {
    pub cover: PermQuotient,
    pub point: usize,
    pub cycle_length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObstructionReport {
    pub m: usize,
    pub max_degree: usize,
    /// `lcm(1, …, m)` in decimal.
    pub exponent: String,
    pub covers: usize,
    pub pairs_checked: usize,
    pub non_closing: usize,
    pub violations: Vec<ObstructionViolation>,
}

/// For every cover of degree at most `max_degree` and every point where the
/// lift of `x^{lcm(1..m)}` fails to close, checks that the x-cycle through
/// that point is longer than `m`.
pub fn obstruction_scan(m: usize, max_degree: usize) -> Result<ObstructionReport> {
    if m == 0 {
        return Err(Error::input("obstruction scan needs m >= 1"));
    }
    let exponent = chebyshev(m as u64).0;
    let covers = covers_up_to(max_degree)?;
    let per_cover: Vec<(usize, usize, Vec<ObstructionViolation>)> = covers
        .par_iter()
        .map(|q| {
            let mut non_closing = 0;
            let mut violations = Vec::new();
            for p in 0..q.degree() {
                if !lift_closed(q, p, &exponent)? {
                    non_closing += 1;
                    let len = q.gens()[0].cycle_len(p);
                    if len <= m {
                        violations.push(ObstructionViolation { cover: q.clone(), point: p, cycle_length: len });
                    }
                }
            }
            Ok((q.degree(), non_closing, violations))
        })
        .collect::<Result<_>>()?;
    Ok(ObstructionReport {
        m,
        max_degree,
        exponent: exponent.to_string(),
        covers: covers.len(),
        pairs_checked: per_cover.iter().map(|r| r.0).sum(),
        non_closing: per_cover.iter().map(|r| r.1).sum(),
        violations: per_cover.into_iter().flat_map(|r| r.2).collect(),
    })
}

/// Row of the finite experiment on `S(n) = {x, x², …, x^{lcm(1..n)}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Theorem4Row {
    pub n: usize,
    pub lcm: u64,
    pub witness_bound: u64,
    /// `D^⊴(δ_n)` when found within the cap, otherwise `cap + 1`.
    pub dnormal_lower: usize,
    pub dnormal_exact: bool,
    /// Whether the row certifies `D^⊴(δ_n) ≥ lcm(1..n) + 1`.
    pub resolved: bool,
    pub cap: usize,
}

/// Largest `lcm(1..n)` accepted by [`theorem4_experiment`].
pub const THEOREM4_MAX_LCM: u64 = 60;

/// Builds the witness for `S(n)` with symbolic powers and bounds its normal
/// divisibility. A quotient in which `δ_n` survives is injective on `S(n)`,
/// so its order exceeds `lcm(1..n)`.
pub fn theorem4_experiment(n: usize, cap: usize) -> Result<Theorem4Row> {
    if n == 0 {
        return Err(Error::input("theorem 4 experiment needs n >= 1"));
    }
    let lcm = chebyshev(n as u64).0.to_u64().unwrap_or(u64::MAX);
    if lcm > THEOREM4_MAX_LCM {
        return Err(Error::Resource { what: "lcm(1..n) in the theorem 4 experiment".into(), cap: THEOREM4_MAX_LCM as usize });
    }
    let exponents: Vec<i64> = (1..=lcm as i64).collect();
    let cert = lcm_witness_powers(2, &exponents)?;
    let found = normal_divisibility(&cert.delta, cap)?;
    if let Some(q) = &found.witness {
        let x = &q.gens()[0];
        let mut images: Vec<usize> = exponents.iter().map(|&e| x.pow(e).apply(0)).collect();
        images.sort_unstable();
        if images.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::internal(format!("quotient of order {} detects delta but is not injective on S(n)", q.degree())));
        }
    }
    let dnormal_lower = found.value_or_lower_bound();
    Ok(Theorem4Row {
        n,
        lcm,
        witness_bound: cert.bound,
        dnormal_lower,
        dnormal_exact: found.value.is_some(),
        resolved: dnormal_lower as u64 > lcm,
        cap,
    })
}

/// `lcm(1, …, n)` exactly, and `ψ(n) = log lcm(1, …, n)`.
pub fn chebyshev(n: u64) -> (BigUint, f64) {
    let mut lcm = BigUint::from(1u32);
    let mut psi = 0.0;
    for p in primes_up_to(n) {
        let (mut q, mut k) = (p, 1);
        while q <= n / p {
            q *= p;
            k += 1;
        }
        lcm *= BigUint::from(q);
        psi += k as f64 * (p as f64).ln();
    }
    (lcm, psi)
}

fn primes_up_to(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if sieve[i] {
            out.push(i as u64);
            for j in (i * i..=n).step_by(i) {
                sieve[j] = false;
            }
        }
    }
    out
}

/// One row of the prime number theorem window `ψ(n)/n ∈ [1/2, 3/2]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PntRow {
    pub n: u64,
    pub lcm: String,
    pub log_lcm: f64,
    pub ratio: f64,
    pub in_window: bool,
}

pub fn pnt_row(n: u64) -> Result<PntRow> {
    if n == 0 {
        return Err(Error::input("pnt rows start at n = 1"));
    }
    let (lcm, log_lcm) = chebyshev(n);
    let ratio = log_lcm / n as f64;
    Ok(PntRow { n, lcm: lcm.to_string(), log_lcm, ratio, in_window: (0.5..=1.5).contains(&ratio) })
}

/// Least `N` such that every `n` in `N..=max` lies in the window.
pub fn pnt_threshold(max: u64) -> Result<u64> {
    let mut threshold = max + 1;
    for n in (1..=max).rev() {
        if !pnt_row(n)?.in_window {
            break;
        }
        threshold = n;
    }
    Ok(threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(text: &str, d: usize) -> PermQuotient {
        PermQuotient::parse(text, Some(d)).unwrap()
    }

    #[test]
    fn cycle_lengths_of_examples() {
        let a = analyze_cover(&q("(1 2 3)(4 5); (3 4)", 5)).unwrap();
        assert_eq!(a.x_cycle_lengths, vec![3, 2]);
        assert_eq!(a.x_cycles, vec![vec![0, 1, 2], vec![3, 4]]);
        let b = analyze_cover(&q("1 2 3; (1 2 3)", 3)).unwrap();
        assert_eq!(b.x_cycle_lengths, vec![1, 1, 1]);
        assert!(analyze_cover(&q("(1 2); (1 2)", 3)).is_err());
    }

    #[test]
    fn lift_closure_examples() {
        let c = q("(1 2 3); (3 4)", 4);
        assert!(lift_closed(&c, 0, &BigUint::from(6u32)).unwrap());
        assert!(!lift_closed(&c, 0, &BigUint::from(4u32)).unwrap());
        assert!(lift_closed(&c, 0, &BigUint::from(0u32)).unwrap());
        assert!(lift_closed(&c, 3, &BigUint::from(7u32)).unwrap());
    }

    #[test]
    fn cover_classes() {
        // conjugacy classes of subgroups of index 1, 2, 3 number 1, 3, 7
        let counts: Vec<usize> = (1..=3).map(|d| covers_up_to(d).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 4, 11]);
    }

    #[test]
    fn obstruction_small() {
        let r = obstruction_scan(1, 2).unwrap();
        assert!(r.violations.is_empty());
        assert!(r.non_closing > 0);
        let r = obstruction_scan(2, 4).unwrap();
        assert!(r.violations.is_empty());
    }

    #[test]
    fn chebyshev_values() {
        assert_eq!(chebyshev(1), (BigUint::from(1u32), 0.0));
        assert_eq!(chebyshev(10).0, BigUint::from(2520u32));
        assert!((chebyshev(10).1 - 2520f64.ln()).abs() < 1e-9);
        let r = pnt_row(100).unwrap();
        assert!(r.in_window);
    }

    #[test]
    fn pnt_threshold_small() {
        assert_eq!(pnt_threshold(64).unwrap(), 3);
    }

    #[test]
    fn theorem4_small() {
        let r = theorem4_experiment(1, 4).unwrap();
        assert_eq!(r.lcm, 1);
        assert!(r.resolved);
        let r = theorem4_experiment(2, 4).unwrap();
        assert_eq!(r.lcm, 2);
        assert!(r.dnormal_lower >= 3);
        assert!(r.resolved);
    }
}
