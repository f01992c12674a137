//! Independent oracles for the low-index search.

use std::collections::BTreeSet;

use resfin::lowindex::{enumerate_normal, enumerate_subgroups, fingerprint_battery, kernel_fingerprint};
use resfin::{PermQuotient, Permutation};

fn all_perms(d: usize) -> Vec<Permutation> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Permutation>) {
        let d = used.len();
        if prefix.len() == d {
            out.push(Permutation::from_images(prefix.clone()).unwrap());
            return;
        }
        for i in 0..d {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; d], &mut out);
    out
}

/// Canonical keys of every transitive action of `F₂` on `d` points, and of
/// the regular ones among them.
fn brute_force_keys(d: usize) -> (BTreeSet<Vec<u8>>, BTreeSet<Vec<u8>>) {
    let perms = all_perms(d);
    let mut all = BTreeSet::new();
    let mut regular = BTreeSet::new();
    for a in &perms {
        for b in &perms {
            let q = PermQuotient::new(vec![a.clone(), b.clone()]).unwrap();
            if q.is_transitive() {
                let key = q.canonical_key().unwrap();
                if q.is_regular() {
                    regular.insert(key.clone());
                }
                all.insert(key);
            }
        }
    }
    (all, regular)
}

/// Hall's recursion for the number of index-`n` subgroups of `F_r`.
fn hall_counts(rank: u32, max: usize) -> Vec<u128> {
    let fact: Vec<u128> = (0..=max).scan(1u128, |f, i| {
        if i > 0 {
            *f *= i as u128;
        }
        Some(*f)
    }).collect();
    let mut a = vec![0u128; max + 1];
    for n in 1..=max {
        let mut v = n as u128 * fact[n].pow(rank - 1);
        for k in 1..n {
            v -= fact[n - k].pow(rank - 1) * a[k];
        }
        a[n] = v;
    }
    a
}

fn keys(qs: &[PermQuotient]) -> (usize, BTreeSet<Vec<u8>>) {
    (qs.len(), qs.iter().map(|q| q.canonical_key().unwrap()).collect())
}

#[test]
fn searches_are_complete_and_duplicate_free() {
    for d in 1..=5 {
        let (all, regular) = brute_force_keys(d);
        let (n, found) = keys(&enumerate_subgroups(2, d).unwrap());
        assert_eq!(n, found.len(), "duplicate subgroups at degree {d}");
        assert_eq!(found, all, "subgroups of index {d}");
        let (n, found) = keys(&enumerate_normal(2, d).unwrap());
        assert_eq!(n, found.len(), "duplicate normal subgroups at order {d}");
        assert_eq!(found, regular, "normal subgroups of index {d}");
    }
}

#[test]
fn subgroup_counts_follow_hall() {
    let hall = hall_counts(2, 7);
    for d in 1..=7 {
        assert_eq!(enumerate_subgroups(2, d).unwrap().len() as u128, hall[d], "index {d}");
    }
    let hall3 = hall_counts(3, 4);
    for d in 1..=4 {
        assert_eq!(enumerate_subgroups(3, d).unwrap().len() as u128, hall3[d], "rank 3 index {d}");
    }
}

#[test]
fn kernels_are_distinct() {
    for order in 2..=8 {
        let battery = fingerprint_battery(2, order).unwrap();
        let qs = enumerate_normal(2, order).unwrap();
        let prints: BTreeSet<Vec<bool>> = qs.iter().map(|q| kernel_fingerprint(q, &battery).unwrap()).collect();
        assert_eq!(prints.len(), qs.len(), "two regular actions of order {order} share a kernel");
    }
}

#[test]
fn normal_results_are_regular_and_all_results_transitive() {
    for d in 1..=6 {
        for q in enumerate_subgroups(2, d).unwrap() {
            assert!(q.is_transitive());
            assert_eq!(q.is_regular(), q.image_order(1000) == Some(d));
        }
        for q in enumerate_normal(2, d).unwrap() {
            assert!(q.is_regular());
        }
    }
}
