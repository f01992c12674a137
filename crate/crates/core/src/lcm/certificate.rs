use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::PermQuotient;
use crate::words::{FreeWord, Instr, NodeId, SlWord};

/// Why a node of the witness program lies in the normal closure of one
/// member of the input set.
///
/// The rules are the closure properties of a normal closure `⟨⟨γ⟩⟩`: it
/// contains `γ`, is closed under inverses, powers, products and conjugation,
/// and contains `[u, v]` as soon as it contains `u` or `v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Derivation {
    /// The node evaluates to the member itself.
    Leaf { node: NodeId },
    Inverse { node: NodeId, of: Box<Derivation> },
    Power { node: NodeId, of: Box<Derivation> },
    Conjugate { node: NodeId, of: Box<Derivation> },
    /// `[u, v]` with `u` a member.
    CommutatorLeft { node: NodeId, of: Box<Derivation> },
    /// `[u, v]` with `v` a member.
    CommutatorRight { node: NodeId, of: Box<Derivation> },
    Product { node: NodeId, left: Box<Derivation>, right: Box<Derivation> },
}

impl Derivation {
    pub fn node(&self) -> NodeId {
        match *self {
            Derivation::Leaf { node }
            | Derivation::Inverse { node, .. }
            | Derivation::Power { node, .. }
            | Derivation::Conjugate { node, .. }
            | Derivation::CommutatorLeft { node, .. }
            | Derivation::CommutatorRight { node, .. }
            | Derivation::Product { node, .. } => node,
        }
    }

    /// Checks every step against the program; returns the broken rule.
    fn replay(&self, delta: &SlWord, member: &FreeWord) -> std::result::Result<(), String> {
        let nodes = delta.nodes();
        let node = self.node();
        let instr = nodes.get(node).ok_or_else(|| format!("node {node} does not exist"))?;
        let expect_child = |child: &Derivation, operand: NodeId, rule: &str| {
            if child.node() != operand {
                return Err(format!("{rule} at node {node}: child node {} is not operand {operand}", child.node()));
            }
            child.replay(delta, member)
        };
        match (self, *instr) {
            (Derivation::Leaf { .. }, _) => {
                match delta.flatten_at(node, member.len()) {
                    Some(w) if &w == member => Ok(()),
                    _ => Err(format!("leaf at node {node} does not evaluate to {member}")),
                }
            }
            (Derivation::Inverse { of, .. }, Instr::Inverse { of: a }) => expect_child(of, a, "inverse"),
            (Derivation::Power { of, .. }, Instr::Power { base, .. }) => expect_child(of, base, "power"),
            (Derivation::Conjugate { of, .. }, Instr::Conjugate { target, .. }) => {
                expect_child(of, target, "conjugate")
            }
            (Derivation::CommutatorLeft { of, .. }, Instr::Commutator { left, .. }) => {
                expect_child(of, left, "commutator")
            }
            (Derivation::CommutatorRight { of, .. }, Instr::Commutator { right, .. }) => {
                expect_child(of, right, "commutator")
            }
            (Derivation::Product { left, right, .. }, Instr::Product { left: a, right: b }) => {
                expect_child(left, a, "product")?;
                expect_child(right, b, "product")
            }
            (rule, instr) => Err(format!("rule {} does not apply to {instr:?} at node {node}", rule_name(rule))),
        }
    }
}

fn rule_name(d: &Derivation) -> &'static str {
    match d {
        Derivation::Leaf { .. } => "leaf",
        Derivation::Inverse { .. } => "inverse",
        Derivation::Power { .. } => "power",
        Derivation::Conjugate { .. } => "conjugate",
        Derivation::CommutatorLeft { .. } => "commutator_left",
        Derivation::CommutatorRight { .. } => "commutator_right",
        Derivation::Product { .. } => "product",
    }
}

/// Derivation of `δ ∈ ⟨⟨S[member]⟩⟩`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberDerivation {
    pub member: usize,
    pub tree: Derivation,
}

/// Evidence that the witness is not the identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// The reduced flat form has exactly this many (> 0) letters.
    ReducedLength { length: usize },
    /// The witness evaluates to a non-identity permutation here.
    Quotient { quotient: PermQuotient },
}

/// A witness `δ` for the least common multiple of `S`, with the evidence
/// needed to re-check `δ ∈ ⋂ ⟨⟨γ⟩⟩` and `δ ≠ 1` without trusting the
/// construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CertificateRecord", into = "CertificateRecord")]
pub struct WitnessCertificate {
    pub set: Vec<FreeWord>,
    pub delta: SlWord,
    /// Declared upper bound on the flat length of `delta`.
    pub bound: u64,
    pub derivations: Vec<MemberDerivation>,
    pub evidence: Evidence,
}

#[derive(Serialize, Deserialize)]
struct CertificateRecord {
    rank: usize,
    #[serde(rename = "S")]
    set: Vec<String>,
    delta: SlWord,
    bound: u64,
    derivations: Vec<MemberDerivation>,
    evidence: Evidence,
}

impl From<WitnessCertificate> for CertificateRecord {
    fn from(c: WitnessCertificate) -> Self {
        CertificateRecord {
            rank: c.delta.rank(),
            set: c.set.iter().map(FreeWord::to_string).collect(),
            delta: c.delta,
            bound: c.bound,
            derivations: c.derivations,
            evidence: c.evidence,
        }
    }
}

impl TryFrom<CertificateRecord> for WitnessCertificate {
    type Error = Error;

    fn try_from(r: CertificateRecord) -> Result<Self> {
        if r.rank != r.delta.rank() {
            return Err(Error::RankMismatch { left: r.rank, right: r.delta.rank() });
        }
        let set = r.set.iter().map(|s| FreeWord::parse(r.rank, s)).collect::<Result<Vec<_>>>()?;
        Ok(WitnessCertificate { set, delta: r.delta, bound: r.bound, derivations: r.derivations, evidence: r.evidence })
    }
}

/// Outcome of [`verify_certificate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verification {
    pub ok: bool,
    pub diagnostics: Vec<String>,
    pub quotients_checked: usize,
    /// Quotients that kill some member of `S`, and therefore had to kill `δ`.
    pub quotients_killing_a_member: usize,
}

impl WitnessCertificate {
    pub fn rank(&self) -> usize {
        self.delta.rank()
    }

    /// Flat form of the witness, if at most `cap` letters.
    pub fn flat_delta(&self, cap: usize) -> Option<FreeWord> {
        self.delta.flatten(cap)
    }
}

/// Replays every derivation, checks the nontriviality evidence and the
/// declared length bound, and checks that each supplied quotient killing a
/// member of `S` also kills `δ`.
pub fn verify_certificate(c: &WitnessCertificate, quotients: &[PermQuotient]) -> Verification {
    let mut diagnostics = Vec::new();
    let rank = c.rank();

    if c.set.is_empty() {
        diagnostics.push("empty input set".to_string());
    }
    for (i, g) in c.set.iter().enumerate() {
        if g.rank() != rank {
            diagnostics.push(format!("S[{i}] has rank {} but delta has rank {rank}", g.rank()));
        }
        if g.is_identity() {
            diagnostics.push(format!("S[{i}] is the identity"));
        }
    }

    for i in 0..c.set.len() {
        let trees: Vec<&MemberDerivation> = c.derivations.iter().filter(|d| d.member == i).collect();
        if trees.is_empty() {
            diagnostics.push(format!("membership: no derivation for S[{i}]"));
        }
        for d in trees {
            if d.tree.node() != c.delta.root() {
                diagnostics.push(format!("membership: derivation for S[{i}] does not end at delta"));
            } else if let Err(e) = d.tree.replay(&c.delta, &c.set[i]) {
                diagnostics.push(format!("membership of S[{i}]: {e}"));
            }
        }
    }
    if let Some(d) = c.derivations.iter().find(|d| d.member >= c.set.len()) {
        diagnostics.push(format!("membership: derivation for nonexistent S[{}]", d.member));
    }

    match &c.evidence {
        Evidence::ReducedLength { length } => match c.delta.flatten(*length) {
            Some(w) if w.len() == *length && *length > 0 => {}
            Some(w) => diagnostics.push(format!(
                "nontriviality: reduced form has length {} rather than the claimed {length}",
                w.len()
            )),
            None => diagnostics.push(format!("nontriviality: reduced form is longer than the claimed {length}")),
        },
        Evidence::Quotient { quotient } => match quotient.eval_sl(&c.delta) {
            Ok(p) if !p.is_identity() => {}
            Ok(_) => diagnostics.push("nontriviality: evidence quotient kills delta".to_string()),
            Err(e) => diagnostics.push(format!("nontriviality: {e}")),
        },
    }

    let length_bound = c.delta.length_bound();
    if length_bound > c.bound as u128 {
        diagnostics.push(format!("length: program length bound {length_bound} exceeds declared bound {}", c.bound));
    }

    let mut killing = 0;
    for (k, q) in quotients.iter().enumerate() {
        if q.rank() != rank {
            diagnostics.push(format!("quotient {k} has rank {}", q.rank()));
            continue;
        }
        let kills_member = c.set.iter().any(|g| q.eval_word(g).map(|p| p.is_identity()).unwrap_or(false));
        if kills_member {
            killing += 1;
            match q.eval_sl(&c.delta) {
                Ok(p) if p.is_identity() => {}
                _ => diagnostics.push(format!(
                    "lcm contrapositive: quotient {k} ({q:?}) kills a member of S but not delta"
                )),
            }
        }
    }

    Verification {
        ok: diagnostics.is_empty(),
        diagnostics,
        quotients_checked: quotients.len(),
        quotients_killing_a_member: killing,
    }
}
