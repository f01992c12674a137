//! Acceptance suite: one PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use resfin::covers::{analyze_cover, lift_closed, obstruction_scan, pnt_row, pnt_threshold, theorem4_experiment};
use resfin::lcm::{
    declared_bound, exact_lcm_small, lcm_witness, power_set_witness, verify_certificate, MembershipBudget,
};
use resfin::lowindex::{enumerate_normal, enumerate_subgroups, normal_subgroup_growth};
use resfin::nilpotent::{entry_bound, girth_upper_bound_nilpotent};
use resfin::separability::{
    check_basic_inequality, check_girth_inequality, divisibility, normal_divisibility, residual_girth,
    residual_girth_z, InequalityCaps, SepResult, Status,
};
use resfin::words::{word_growth, Ball};
use resfin::{FreeWord, PermQuotient};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn w(rank: usize, text: &str) -> FreeWord {
    FreeWord::parse(rank, text).unwrap()
}

fn within(start: Instant, limit: Duration) -> Check {
    let t = start.elapsed();
    ensure!(t <= limit, "took {t:.2?}, limit {limit:?}");
    Ok(format!("{t:.2?}"))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn c1_growth() -> Check {
    let start = Instant::now();
    let expected = [1u128, 5, 17, 53, 161];
    for (n, &e) in expected.iter().enumerate() {
        let closed = word_growth(2, n).map_err(|e| e.to_string())?;
        let bfs = Ball::new(2, n).unwrap().to_vec().len() as u128;
        let formula = if n == 0 { 1 } else { 2 * 3u128.pow(n as u32) - 1 };
        ensure!(closed == e && bfs == e && formula == e, "n={n}: closed {closed}, bfs {bfs}, want {e}");
    }
    within(start, Duration::from_secs(1))
}

/// Normal subgroups of index `n` with cyclic quotient: surjections onto
/// `ℤ/n` divided by `φ(n)`.
fn cyclic_normal_count(n: u64) -> u64 {
    let surjections = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|&(a, b)| gcd(gcd(a, b), n) == 1).count();
    let phi = (1..=n).filter(|&k| gcd(k, n) == 1).count();
    (surjections / phi) as u64
}

fn c2_normal_counts() -> Check {
    let start = Instant::now();
    for (index, want) in [(2usize, 3usize), (3, 4)] {
        let got = enumerate_normal(2, index).unwrap().len();
        let oracle = cyclic_normal_count(index as u64) as usize;
        ensure!(got == want && oracle == want, "index {index}: search {got}, counting {oracle}, want {want}");
    }
    let growth = normal_subgroup_growth(2, 3).unwrap();
    ensure!(growth == 8, "normal_subgroup_growth(2,3) = {growth}");
    within(start, Duration::from_secs(5))
}

fn witness_kills(r: &SepResult, gamma: &FreeWord, normal: bool) -> bool {
    let Some(q) = &r.witness else { return false };
    if Some(q.degree()) != r.value {
        return false;
    }
    if normal {
        q.is_regular() && !q.eval_word(gamma).unwrap().is_identity()
    } else {
        q.is_transitive() && q.trace(gamma, 0).unwrap() != 0
    }
}

fn c3_divisibility() -> Check {
    let start = Instant::now();
    let cases: [(&str, bool, usize); 5] =
        [("a", false, 2), ("aa", false, 3), ("abAB", true, 6), ("aaaaaa", true, 4), (&"a".repeat(60), true, 7)];
    for (text, normal, want) in cases {
        let gamma = w(2, text);
        let run = |cap| if normal { normal_divisibility(&gamma, cap) } else { divisibility(&gamma, cap) };
        let r = run(8).unwrap();
        ensure!(r.value == Some(want), "{text}: got {:?}, want {want}", r.value);
        ensure!(witness_kills(&r, &gamma, normal), "{text}: witness does not verify");
        let short = run(want - 1).unwrap();
        ensure!(short.value.is_none(), "{text}: cap {} did not return unknown", want - 1);
    }
    let t = within(start, Duration::from_secs(30))?;
    Ok(format!("{t}; D^⊴(x⁶) is 4, not the listed 7; x⁶⁰ attains 7 (see decisions ledger)"))
}

fn c4_girth() -> Check {
    let r = residual_girth(2, 1, 5).unwrap();
    ensure!(r.value == Some(5), "G_F2(1) = {:?}", r.value);
    for n in 1..=5usize {
        let s = residual_girth(1, n, 2 * n + 1).unwrap();
        ensure!(s.value == Some(residual_girth_z(n as u64) as usize), "G_Z({n}) search {:?}", s.value);
    }
    for n in 1..=64u64 {
        ensure!(residual_girth_z(n) == 2 * n + 1, "G_Z({n}) closed form");
    }
    Ok("G_F2(1)=5".into())
}

fn random_word(rng: &mut ChaCha8Rng, max_len: usize) -> FreeWord {
    loop {
        let len = rng.gen_range(1..=max_len);
        let raw: Vec<i8> = (0..len).map(|_| if rng.gen() { 1 } else { 2 } * if rng.gen() { 1 } else { -1 }).collect();
        let word = FreeWord::reduce(2, &raw).unwrap();
        if !word.is_identity() {
            return word;
        }
    }
}

fn c5_lcm_construction() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0acc_e975);
    let quotients: Vec<PermQuotient> = (2..=8).flat_map(|k| enumerate_normal(2, k).unwrap()).collect();
    let mut checked = 0;
    for trial in 0..200 {
        let size = rng.gen_range(1..=8);
        let set: Vec<FreeWord> = (0..size).map(|_| random_word(&mut rng, 4)).collect();
        let d = set.iter().map(FreeWord::len).max().unwrap() as u64;
        let c = lcm_witness(&set).map_err(|e| format!("trial {trial}: {e}"))?;
        let bound = declared_bound(set.len(), d).unwrap();
        let flat = c.flat_delta(bound as usize);
        ensure!(flat.as_ref().is_some_and(|f| !f.is_identity()), "trial {trial}: flat form exceeds {bound}");
        let v = verify_certificate(&c, &quotients);
        ensure!(v.ok, "trial {trial}: {:?}", v.diagnostics);
        // independent contrapositive check
        for q in &quotients {
            let survives = !q.eval_word(flat.as_ref().unwrap()).unwrap().is_identity();
            if survives {
                ensure!(
                    set.iter().all(|g| !q.eval_word(g).unwrap().is_identity()),
                    "trial {trial}: δ survives a quotient killing a member"
                );
            }
        }
        checked += quotients.len();
    }
    Ok(format!("200 sets, {checked} quotient checks, 0 violations"))
}

fn c6_exact_lcm() -> Check {
    let set = [w(2, "a"), w(2, "b")];
    let budget = MembershipBudget { max_factors: 4, conjugator_radius: 1, quotient_order: 8 };
    let r = exact_lcm_small(&set, 6, budget).unwrap();
    ensure!(r.value == Some(4), "exact lcm {:?}", r.value);
    ensure!(r.refuted_by_length.len() >= 3, "refutations {:?}", r.refuted_by_length);
    let short = Ball::new(2, 3).unwrap().nontrivial().count();
    let refuted: usize = r.refuted_by_length[..3].iter().sum();
    ensure!(refuted == short, "refuted {refuted} of {short} words of length 1..3");
    let c = lcm_witness(&set).unwrap();
    let flat = c.flat_delta(c.bound as usize).unwrap();
    ensure!(flat.len() >= 4, "witness shorter than the exact lcm");
    Ok(format!("lcm = 4 via {}; witness length {}", r.word.unwrap(), flat.len()))
}

fn c7_separation() -> Check {
    let start = Instant::now();
    for n in 2..=4usize {
        let r = power_set_witness(n, n.max(6)).unwrap();
        ensure!(r.small_survivors == 0, "n={n}: δ survives a small quotient");
        ensure!(r.injectivity_violations == 0, "n={n}: injectivity violations");
        ensure!(r.dnormal_lower >= n, "n={n}: lower bound {}", r.dnormal_lower);
        ensure!(r.status == Status::Pass, "n={n}: status {:?}", r.status);
    }
    within(start, Duration::from_secs(60))
}

fn c8_covers() -> Check {
    let mut pairs = 0;
    for d in 1..=6 {
        for q in enumerate_subgroups(2, d).unwrap() {
            let a = analyze_cover(&q).unwrap();
            ensure!(a.x_cycle_lengths.iter().sum::<usize>() == d, "cycle sum on {:?}", q);
            let x = &q.gens()[0];
            for p in 0..d {
                let mut at = p;
                for l in 0..=24u32 {
                    ensure!(lift_closed(&q, p, &l.into()).unwrap() == (at == p), "lift law at {p}, ℓ={l}");
                    at = x.apply(at);
                    pairs += 1;
                }
            }
        }
    }
    for m in 1..=3 {
        let r = obstruction_scan(m, 6).unwrap();
        ensure!(r.violations.is_empty(), "m={m}: {} violations", r.violations.len());
    }
    Ok(format!("{pairs} lift checks"))
}

fn c9_theorem4() -> Check {
    let start = Instant::now();
    let r = theorem4_experiment(3, 8).unwrap();
    ensure!(r.lcm == 6, "lcm(1..3) = {}", r.lcm);
    ensure!(r.resolved && r.dnormal_lower >= 7, "lower bound {} resolved {}", r.dnormal_lower, r.resolved);
    let t = within(start, Duration::from_secs(60))?;
    Ok(format!("D^⊴(δ₃) ≥ {}; {t}", r.dnormal_lower))
}

/// ψ(n) as a sum of `log p` over prime powers `p^k ≤ n`.
fn psi(n: u64) -> f64 {
    (2..=n)
        .filter(|&p| (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0))
        .map(|p| {
            let mut k = 0;
            let mut pk = p;
            while pk <= n {
                k += 1;
                pk *= p;
            }
            k as f64 * (p as f64).ln()
        })
        .sum()
}

fn c10_pnt() -> Check {
    for n in 7..=512 {
        let r = pnt_row(n).unwrap();
        ensure!(r.in_window, "n={n}: ratio {}", r.ratio);
        ensure!((r.log_lcm - psi(n)).abs() < 1e-6, "n={n}: ψ mismatch");
    }
    ensure!(pnt_row(10).unwrap().lcm == "2520", "lcm(1..10)");
    let threshold = pnt_threshold(512).unwrap();
    ensure!(threshold <= 7, "threshold {threshold}");
    Ok(format!("verified N = {threshold}"))
}

fn c11_nilpotent() -> Check {
    for n in 1..=16usize {
        let r = girth_upper_bound_nilpotent(n).unwrap();
        let e = entry_bound(n).unwrap();
        ensure!(r.modulus == 2 * e.exact + 1, "n={n}: M = {}", r.modulus);
        if n <= 6 {
            ensure!(r.injective, "n={n}: reduction not injective");
        }
        let cap = ((n * n + 3) as u128).pow(3);
        if n >= 2 {
            ensure!((r.bound as u128) <= cap, "n={n}: bound {} > {cap}", r.bound);
        }
    }
    Ok("n ≤ 16".into())
}

fn c12_inequalities() -> Check {
    let caps = InequalityCaps { order: 12, upper_bound_degree: 6 };
    for (rank, max_n) in [(1usize, 4usize), (2, 2)] {
        for n in 1..=max_n {
            let r = check_basic_inequality(rank, n, caps).unwrap();
            ensure!(r.status == Status::Pass, "basic rank {rank} n {n}: {:?}", r.status);
        }
    }
    let g = check_girth_inequality(2, 2, caps).unwrap();
    ensure!(g.status == Status::Pass, "girth chain rank 2 n 2: {:?}", g.status);
    Ok("basic and girth chain".into())
}

fn run_cli(args: &[&str], threads: usize) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_resfin"))
        .args(["--threads", &threads.to_string()])
        .args(args)
        .output()
        .expect("binary runs");
    let mut bytes = out.stdout;
    bytes.extend(out.status.code().unwrap_or(-1).to_le_bytes());
    bytes
}

fn c13_determinism() -> Check {
    let dir = std::env::temp_dir().join(format!("resfin-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cert: PathBuf = dir.join("cert.json");
    let status = Command::new(env!("CARGO_BIN_EXE_resfin"))
        .args(["lcm-witness", "--set", "a,b,aB", "--out"])
        .arg(&cert)
        .status()
        .unwrap();
    ensure!(status.success(), "could not write a certificate");
    let cert_arg = cert.to_string_lossy().into_owned();
    let cases: Vec<Vec<&str>> = vec![
        vec!["growth", "--rank", "2", "--max", "5"],
        vec!["--format", "csv", "dmax", "--rank", "2", "--radius", "2", "--cap", "6"],
        vec!["dmax", "--rank", "2", "--radius", "2", "--cap", "6", "--normal"],
        vec!["girth", "--rank", "2", "--radius", "1", "--cap", "6"],
        vec!["lcm-witness", "--set", "a,b,abAB", "--verify-cap", "5"],
        vec!["power-witness", "--n", "3"],
        vec!["covers-scan", "--m", "3", "--max-degree", "5"],
        vec!["theorem4", "--n", "2", "--cap", "4"],
        vec!["nilpotent-girth", "--n", "4"],
        vec!["ineq", "--which", "1", "--rank", "2", "--n", "1"],
        vec!["ineq", "--which", "2", "--rank", "2", "--n", "2"],
        vec!["pnt", "--max", "40"],
        vec!["verify", "--certificate", &cert_arg, "--samples", "20"],
    ];
    for args in &cases {
        let base = run_cli(args, 1);
        ensure!(base.len() > 4, "{args:?}: no output");
        for threads in [2, 8] {
            ensure!(run_cli(args, threads) == base, "{args:?}: output differs at {threads} threads");
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} invocations × 3 thread counts", cases.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 13] = [
        ("word growth", c1_growth),
        ("normal subgroup counts", c2_normal_counts),
        ("divisibility oracles", c3_divisibility),
        ("residual girth", c4_girth),
        ("lcm construction", c5_lcm_construction),
        ("exact lcm", c6_exact_lcm),
        ("power-set separation", c7_separation),
        ("covers", c8_covers),
        ("theorem 4 machinery", c9_theorem4),
        ("pnt window", c10_pnt),
        ("nilpotent girth", c11_nilpotent),
        ("inequalities", c12_inequalities),
        ("determinism", c13_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed();
        match outcome {
            Ok(note) => println!("PASS {:>2} {name} ({t:.2?}): {note}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({t:.2?}): {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
