//! Least common multiples of finite sets in a free group: the witness
//! construction, its certificate and checker, and a bounded exact search.

mod certificate;
mod membership;
mod power;
mod witness;

pub use certificate::{verify_certificate, Derivation, Evidence, MemberDerivation, Verification, WitnessCertificate};
pub use membership::{
    closure_membership, closure_membership_with, exact_lcm_small, ConjugateFactor, ExactLcm, Membership,
    MembershipBudget, QuotientBank, EXACT_MAX_LENGTH, EXACT_MAX_SET,
};
pub use power::{power_set_witness, PowerSetReport};
pub use witness::{
    declared_bound, lcm_ball_witness, lcm_witness, lcm_witness_powers, levels, padding_offset,
    padding_offset_closed,
};
