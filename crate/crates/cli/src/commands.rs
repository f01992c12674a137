use std::path::Path;

use anyhow::{bail, Context};
use serde_json::Value;

use resfin::covers::{obstruction_scan, pnt_row, theorem4_experiment};
use resfin::lcm::{lcm_witness, levels, power_set_witness, verify_certificate, WitnessCertificate};
use resfin::lowindex::enumerate_normal;
use resfin::nilpotent::girth_upper_bound_nilpotent;
use resfin::separability::{
    check_basic_inequality, check_girth_inequality, max_divisibility, residual_girth, InequalityCaps, Link, Status,
};
use resfin::words::word_growth;
use resfin::{degree_cap, FreeWord, PermQuotient};

use crate::table::{decimal, known, Table};

/// How a finished command should exit, beyond its table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    /// A cap was hit; the table says where.
    Inconclusive,
    /// The input was well-formed but rejected, such as a bad certificate.
    Rejected,
    /// A checked invariant failed.
    Violated,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Ok => 0,
            Verdict::Rejected => 1,
            Verdict::Inconclusive => 2,
            Verdict::Violated => 3,
        }
    }

    fn from_status(s: Status) -> Self {
        match s {
            Status::Pass => Verdict::Ok,
            Status::Inconclusive => Verdict::Inconclusive,
            Status::Fail => Verdict::Violated,
        }
    }
}

pub type Outcome = anyhow::Result<(Table, Verdict)>;

fn quotient_text(q: &Option<PermQuotient>) -> Value {
    match q {
        Some(q) => Value::from(q.gens().iter().map(|g| g.to_string()).collect::<Vec<_>>().join("; ")),
        None => Value::Null,
    }
}

fn status_text(s: Status) -> Value {
    Value::from(match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Inconclusive => "inconclusive",
    })
}

pub fn growth(rank: usize, max: usize) -> Outcome {
    let mut t = Table::new("growth", &["n", "size"]).cap("max", max);
    for n in 0..=max {
        let size = word_growth(rank, n)?;
        let size = u64::try_from(size).context("ball size exceeds 64 bits")?;
        t.push(vec![n.into(), size.into()]);
    }
    Ok((t, Verdict::Ok))
}

pub fn dmax(rank: usize, radius: usize, cap: usize, normal: bool) -> Outcome {
    let r = max_divisibility(rank, radius, cap, normal)?;
    let mut t = Table::new("dmax", &["rank", "radius", "normal", "value", "argmax", "unresolved"]).cap("order", cap);
    t.push(vec![
        rank.into(),
        radius.into(),
        normal.into(),
        known(r.value),
        r.argmax.map_or(Value::Null, |w| w.to_string().into()),
        r.unresolved.into(),
    ]);
    let v = if r.value.is_some() { Verdict::Ok } else { Verdict::Inconclusive };
    Ok((t, v))
}

pub fn girth(rank: usize, radius: usize, cap: usize) -> Outcome {
    let r = residual_girth(rank, radius, cap)?;
    let mut t = Table::new("girth", &["rank", "radius", "value", "witness"]).cap("order", cap);
    t.push(vec![rank.into(), radius.into(), known(r.value), quotient_text(&r.witness)]);
    let v = if r.value.is_some() { Verdict::Ok } else { Verdict::Inconclusive };
    Ok((t, v))
}

fn parse_set(text: &str, rank: Option<usize>) -> anyhow::Result<Vec<FreeWord>> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let inferred = parts
        .iter()
        .flat_map(|p| p.chars())
        .filter(|c| c.is_ascii_alphabetic())
        .map(|c| (c.to_ascii_lowercase() as u8 - b'a' + 1) as usize)
        .max()
        .unwrap_or(1)
        .max(2);
    let rank = rank.unwrap_or(inferred);
    parts.iter().map(|p| Ok(FreeWord::parse(rank, p)?)).collect()
}

fn regular_quotients(rank: usize, max_order: usize) -> anyhow::Result<Vec<PermQuotient>> {
    let mut out = Vec::new();
    for order in 2..=max_order {
        out.extend(enumerate_normal(rank, order)?);
    }
    Ok(out)
}

pub fn lcm_witness_cmd(set: &str, rank: Option<usize>, verify_cap: Option<usize>) -> Outcome {
    let s = parse_set(set, rank)?;
    let cert = lcm_witness(&s)?;
    let flat = cert.flat_delta(cert.bound as usize);
    let mut t = Table::new(
        "lcm-witness",
        &["size", "k", "bound", "flat_length", "delta", "verified", "quotients_checked", "certificate"],
    );
    if let Some(k) = verify_cap {
        t = t.cap("verify_order", k);
    }
    let (verified, checked, verdict) = match verify_cap {
        Some(k) => {
            let qs = regular_quotients(cert.rank(), k)?;
            let v = verify_certificate(&cert, &qs);
            let verdict = if v.ok { Verdict::Ok } else { Verdict::Violated };
            (Value::from(v.ok), Value::from(v.quotients_checked), verdict)
        }
        None => (Value::Null, Value::Null, Verdict::Ok),
    };
    t.push(vec![
        s.len().into(),
        levels(s.len()).into(),
        cert.bound.into(),
        flat.as_ref().map_or(Value::Null, |w| w.len().into()),
        flat.as_ref().map_or(Value::Null, |w| w.to_string().into()),
        verified,
        checked,
        serde_json::to_value(&cert)?,
    ]);
    Ok((t, verdict))
}

pub fn power_witness(n: usize, cap: Option<usize>) -> Outcome {
    let cap = cap.unwrap_or_else(|| n.max(6).min(degree_cap()));
    let r = power_set_witness(n, cap)?;
    let mut t = Table::new(
        "power-witness",
        &[
            "n",
            "k",
            "bound",
            "flat_length",
            "quotients_checked",
            "small_survivors",
            "injectivity_violations",
            "dnormal_lower",
            "status",
        ],
    )
    .cap("order", cap);
    t.push(vec![
        n.into(),
        levels(n).into(),
        r.certificate.bound.into(),
        r.flat_length.map_or(Value::Null, Value::from),
        r.quotients_checked.into(),
        r.small_survivors.into(),
        r.injectivity_violations.into(),
        r.dnormal_lower.into(),
        status_text(r.status),
    ]);
    Ok((t, Verdict::from_status(r.status)))
}

pub fn covers_scan(m: usize, max_degree: usize) -> Outcome {
    let r = obstruction_scan(m, max_degree)?;
    let mut t = Table::new(
        "covers-scan",
        &["m", "exponent", "covers", "pairs_checked", "non_closing", "violations"],
    )
    .cap("max_degree", max_degree);
    t.push(vec![
        m.into(),
        r.exponent.into(),
        r.covers.into(),
        r.pairs_checked.into(),
        r.non_closing.into(),
        r.violations.len().into(),
    ]);
    let v = if r.violations.is_empty() { Verdict::Ok } else { Verdict::Violated };
    Ok((t, v))
}

pub fn theorem4(n: usize, cap: usize) -> Outcome {
    let mut t = Table::new("theorem4", &["n", "lcm", "witness_bound", "dnormal_lower", "resolved"]).cap("order", cap);
    let mut verdict = Verdict::Ok;
    for i in 1..=n {
        let r = theorem4_experiment(i, cap)?;
        if !r.resolved {
            verdict = Verdict::Inconclusive;
        }
        t.push(vec![i.into(), r.lcm.into(), r.witness_bound.into(), r.dnormal_lower.into(), r.resolved.into()]);
    }
    Ok((t, verdict))
}

pub fn nilpotent_girth(n: usize) -> Outcome {
    let mut t = Table::new(
        "nilpotent-girth",
        &["n", "M", "bound", "injective", "entry_bound", "analytic_entry_bound", "ball_size", "coarse_bound"],
    );
    for i in 1..=n {
        let r = girth_upper_bound_nilpotent(i)?;
        t.push(vec![
            i.into(),
            r.modulus.into(),
            r.bound.into(),
            r.injective.into(),
            r.entry_bound.exact.into(),
            r.entry_bound.analytic.into(),
            r.ball_size.into(),
            r.coarse_bound.into(),
        ]);
    }
    Ok((t, Verdict::Ok))
}

pub fn ineq(which: u8, rank: usize, n: usize, caps: InequalityCaps) -> Outcome {
    let (links, status): (Vec<Link>, Status) = match which {
        1 => {
            let r = check_basic_inequality(rank, n, caps)?;
            (r.links, r.status)
        }
        2 => {
            let r = check_girth_inequality(rank, n, caps)?;
            (r.links, r.status)
        }
        _ => bail!("--which must be 1 or 2"),
    };
    let mut t = Table::new("ineq", &["which", "rank", "n", "link", "lhs", "rhs", "holds", "note", "status"])
        .cap("order", caps.order)
        .cap("upper_bound_degree", caps.upper_bound_degree);
    for l in links {
        t.push(vec![
            which.into(),
            rank.into(),
            n.into(),
            l.name.into(),
            l.lhs.map_or(Value::Null, decimal),
            l.rhs.map_or(Value::Null, decimal),
            l.holds.map_or(Value::Null, Value::from),
            l.note.into(),
            status_text(status),
        ]);
    }
    Ok((t, Verdict::from_status(status)))
}

pub fn pnt(max: u64) -> Outcome {
    let mut t = Table::new("pnt", &["n", "lcm", "log", "ratio", "in_window"]).cap("max", max);
    for n in 1..=max {
        let r = pnt_row(n)?;
        t.push(vec![n.into(), r.lcm.into(), decimal(r.log_lcm), decimal(r.ratio), r.in_window.into()]);
    }
    Ok((t, Verdict::Ok))
}

fn read_certificate(path: &Path) -> anyhow::Result<WitnessCertificate> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).context("certificate is not valid JSON")?;
    let inner = match value.get("rows").and_then(|r| r.get(0)).and_then(|r| r.get("certificate")) {
        Some(c) => c.clone(),
        None => value,
    };
    serde_json::from_value(inner).context("not a witness certificate")
}

pub fn verify(path: &Path, order: usize, samples: usize, seed: u64) -> Outcome {
    let cert = read_certificate(path)?;
    let mut quotients = regular_quotients(cert.rank(), order)?;
    quotients.extend(PermQuotient::sample(cert.rank(), samples, 3, 8, seed)?);
    let v = verify_certificate(&cert, &quotients);
    let mut t = Table::new(
        "verify",
        &["ok", "size", "quotients_checked", "quotients_killing_a_member", "diagnostics"],
    )
    .cap("order", order)
    .cap("samples", samples)
    .cap("seed", seed);
    t.push(vec![
        v.ok.into(),
        cert.set.len().into(),
        v.quotients_checked.into(),
        v.quotients_killing_a_member.into(),
        v.diagnostics.join("; ").into(),
    ]);
    let verdict = if v.ok { Verdict::Ok } else { Verdict::Rejected };
    Ok((t, verdict))
}
