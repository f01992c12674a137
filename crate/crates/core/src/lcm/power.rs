use serde::Serialize;

use super::certificate::WitnessCertificate;
use super::witness::lcm_witness_powers;
use crate::error::{Error, Result};
use crate::lowindex::{degree_cap, SubgroupKind, SubgroupSearch};
use crate::separability::Status;

/// Separation report for `S = {x, x², …, xⁿ}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PowerSetReport {
    pub n: usize,
    pub certificate: WitnessCertificate,
    pub flat_length: Option<usize>,
    /// Regular quotients were scanned for orders `2..=cap`.
    pub cap: usize,
    pub quotients_checked: usize,
    /// Quotients of order at most `n` in which `δ` survives; must be empty.
    pub small_survivors: usize,
    /// Quotients in which `δ` survives but `S ∪ {1}` is not mapped injectively.
    pub injectivity_violations: usize,
    /// Least order where `δ` survives, if within the cap.
    pub dnormal: Option<usize>,
    /// `dnormal`, or `cap + 1` when nothing within the cap detects `δ`.
    pub dnormal_lower: usize,
    pub status: Status,
}

/// Builds the witness for `{x, …, xⁿ}` and scans every regular quotient of
/// order at most `cap`: those of order `≤ n` must kill `δ`, and any quotient
/// where `δ` survives must separate `1, x, …, xⁿ`.
pub fn power_set_witness(n: usize, cap: usize) -> Result<PowerSetReport> {
    if n == 0 {
        return Err(Error::input("power set witness needs n >= 1"));
    }
    if cap > degree_cap() {
        return Err(Error::Resource { what: "search degree".into(), cap: degree_cap() });
    }
    let exponents: Vec<i64> = (1..=n as i64).collect();
    let certificate = lcm_witness_powers(2, &exponents)?;
    let flat_length = certificate.flat_delta(certificate.bound as usize).map(|w| w.len());
    let mut checked = 0;
    let mut small_survivors = 0;
    let mut injectivity_violations = 0;
    let mut dnormal = None;
    for order in 2..=cap {
        for q in SubgroupSearch::new(2, order, SubgroupKind::Normal)?.collect() {
            checked += 1;
            if q.eval_sl(&certificate.delta)?.is_identity() {
                continue;
            }
            dnormal.get_or_insert(order);
            if order <= n {
                small_survivors += 1;
            }
            let x = &q.gens()[0];
            let mut images: Vec<usize> = (0..=n as i64).map(|e| x.pow(e).apply(0)).collect();
            images.sort_unstable();
            if images.windows(2).any(|p| p[0] == p[1]) {
                injectivity_violations += 1;
            }
        }
    }
    let status = if small_survivors > 0 || injectivity_violations > 0 {
        Status::Fail
    } else if cap < n {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    Ok(PowerSetReport {
        n,
        certificate,
        flat_length,
        cap,
        quotients_checked: checked,
        small_survivors,
        injectivity_violations,
        dnormal,
        dnormal_lower: dnormal.unwrap_or(cap + 1),
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_power_sets_separate() {
        for n in 1..=3 {
            let r = power_set_witness(n, 6).unwrap();
            assert_eq!(r.status, Status::Pass, "n = {n}");
            assert!(r.dnormal_lower > n);
        }
    }

    #[test]
    fn low_cap_is_inconclusive() {
        assert_eq!(power_set_witness(4, 3).unwrap().status, Status::Inconclusive);
    }
}
