//! Quantifying residual finiteness of free groups, the integers and the
//! integer Heisenberg group.
//!
//! The crate computes divisibility functions, residual girth and normal
//! subgroup growth by exhaustive search over permutation representations of
//! free groups, and builds certified least-common-multiple witnesses as
//! straight-line words.
//!
//! Conventions used throughout:
//!
//! * Words are written with `a, b, c, ...` for generators and `A, B, C, ...`
//!   for their inverses; `"abAB"` is the commutator `[a, b] = a b a⁻¹ b⁻¹`.
//! * Permutations act on the right: the image of point `p` under the word
//!   `uv` is `(p·u)·v`. Points are numbered from 0 in the API and from 1 in
//!   the text formats; the basepoint is point 0.
//! * Every search takes an explicit cap and reports `unknown` rather than
//!   extrapolating past it.

pub mod covers;
pub mod error;
pub mod lcm;
pub mod lowindex;
pub mod nilpotent;
pub mod perm;
pub mod separability;
pub mod words;

pub use error::{Error, Result};
pub use lowindex::{degree_cap, set_degree_cap, SubgroupKind, SubgroupSearch, DEFAULT_MAX_DEGREE};
pub use perm::{PermQuotient, Permutation};
pub use words::{Ball, FreeWord, SlBuilder, SlWord};

pub(crate) fn serde_text<S: serde::Serializer>(w: &FreeWord, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(w)
}

pub(crate) fn serde_opt_text<S: serde::Serializer>(
    w: &Option<FreeWord>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match w {
        Some(w) => s.collect_str(w),
        None => s.serialize_none(),
    }
}
