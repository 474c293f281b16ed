//! Exact subsequence-sum counting over finite abelian groups.
//!
//! For a sequence `S` over a finite abelian group `G` and `g ∈ G`, `N_g(S)` is
//! the number of index subsets of `S` summing to `g`. Whenever `N_g(S) > 0` it
//! is at least `2^{|S| − D(G) + 1}`, with `D(G)` the Davenport constant. This
//! crate computes these counts exactly, computes Davenport constants of small
//! groups, and mechanically checks the structure of sequences that attain the
//! bound (extremal sequences) by exhaustive and randomized search.

pub mod counting;
pub mod davenport;
pub mod error;
pub mod group;
pub mod report;
pub mod search;
pub mod sequence;
pub mod snf;
pub mod structure;
pub mod verify;

pub use counting::{count_all, count_brute, CountVector, ExtremalSet};
pub use davenport::{davenport_value, DavenportResult, Method};
pub use error::{Error, Result};
pub use group::{Group, GroupElement, Quotient, Subgroup};
pub use report::{Verdict, VerificationReport};
pub use sequence::{iterate_multisets, Sequence};
