//! Davenport constants: exact search, closed forms for the settled classes,
//! and the standard inequalities.
//!
//! The exact search walks multisets in canonical (non-decreasing) element
//! order, carrying the subsum set `Σ•(S)` as a 64-bit mask. Appending `a`
//! keeps `S` zero-sum free iff `−a ∉ Σ•(S)`, and then
//! `Σ•(S·a) = Σ•(S) ∪ (Σ•(S) + a)` gains at least one element; so a branch
//! at `S` can reach at most `|S| + |G| − |Σ•(S)|` terms.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::counting::count_all;
use crate::error::{Error, Result};
use crate::group::{Group, Subgroup};
use crate::report::VerificationReport;
use crate::sequence::Sequence;

/// Default ceiling on `|G|` for exact search.
pub const DEFAULT_EXACT_CAP: u64 = 36;
/// Hard ceiling imposed by the 64-bit subsum masks.
pub const MAX_EXACT_ORDER: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Formula,
    Both,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DavenportResult {
    pub group: Group,
    pub value: u64,
    pub method: Method,
    /// A zero-sum free sequence of length `value − 1`.
    pub witness: Sequence,
}

/// No nonempty subsequence sums to zero, i.e. `N_0(S) = 1`.
pub fn is_zero_sum_free(s: &Sequence) -> bool {
    count_all(s).zero_count() == &num_bigint::BigUint::from(1u32)
}

/// `d*(G) + 1` for cyclic groups, groups of rank at most two and p-groups.
/// Everything else has no settled closed form and yields `None`.
pub fn davenport_formula(group: &Group) -> Option<u64> {
    (group.rank() <= 2 || group.is_p_group()).then(|| group.d_star() + 1)
}

/// `∏ e_i^{n_i − 1}`, zero-sum free of length `d*(G)`.
pub fn standard_witness(group: &Group) -> Sequence {
    Sequence::from_terms(group, group.basis().into_iter().zip(group.invariants().iter().map(|n| n - 1)))
        .expect("basis elements belong to the group")
}

/// Precomputed translation tables for mask arithmetic.
struct MaskSearch {
    order: usize,
    /// `plus[a][g] = index(g + a)`
    plus: Vec<Vec<usize>>,
    neg: Vec<usize>,
}

impl MaskSearch {
    fn new(group: &Group) -> Self {
        let elems = group.elements();
        let order = elems.len();
        let plus =
            elems.iter().map(|a| elems.iter().map(|g| group.index_of(&group.add_unchecked(g, a))).collect()).collect();
        let neg = elems.iter().map(|a| group.index_of(&group.neg_unchecked(a))).collect();
        MaskSearch { order, plus, neg }
    }

    fn extend(&self, mask: u64, a: usize) -> u64 {
        let table = &self.plus[a];
        let mut out = mask;
        let mut bits = mask;
        while bits != 0 {
            let g = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            out |= 1 << table[g];
        }
        out
    }

    fn legal(&self, mask: u64, a: usize) -> bool {
        mask >> self.neg[a] & 1 == 0
    }

    fn headroom(&self, mask: u64) -> u64 {
        (self.order - mask.count_ones() as usize) as u64
    }

    /// Raises `best` whenever a longer zero-sum free multiset is found below `(mask, len, start)`.
    fn longest(&self, mask: u64, len: u64, start: usize, best: &AtomicU64) {
        for a in start..self.order {
            if !self.legal(mask, a) {
                continue;
            }
            let next = self.extend(mask, a);
            let next_len = len + 1;
            best.fetch_max(next_len, Ordering::Relaxed);
            if next_len + self.headroom(next) > best.load(Ordering::Relaxed) {
                self.longest(next, next_len, a, best);
            }
        }
    }

    /// Lexicographically first zero-sum free multiset of exactly `target`
    /// terms that satisfies `accept`.
    fn first<F>(&self, mask: u64, path: &mut Vec<usize>, start: usize, target: u64, accept: &mut F) -> bool
    where
        F: FnMut(&[usize], u64) -> bool,
    {
        if path.len() as u64 == target {
            return accept(path, mask);
        }
        if path.len() as u64 + self.headroom(mask) < target {
            return false;
        }
        for a in start..self.order {
            if !self.legal(mask, a) {
                continue;
            }
            path.push(a);
            if self.first(self.extend(mask, a), path, a, target, accept) {
                return true;
            }
            path.pop();
        }
        false
    }
}

fn check_exact_cap(group: &Group, cap: u64) -> Result<()> {
    let cap = cap.min(MAX_EXACT_ORDER);
    if group.order() > cap {
        return Err(Error::CapExceeded { what: "group order for exact Davenport search", actual: group.order(), cap });
    }
    Ok(())
}

/// `D(G)` by exhaustive search with the default order cap.
pub fn davenport_exact(group: &Group) -> Result<DavenportResult> {
    davenport_exact_with_cap(group, DEFAULT_EXACT_CAP)
}

pub fn davenport_exact_with_cap(group: &Group, cap: u64) -> Result<DavenportResult> {
    check_exact_cap(group, cap)?;
    let search = MaskSearch::new(group);
    // ∏ e_i^{n_i − 1} is zero-sum free, so the longest length is at least d*.
    let best = AtomicU64::new(group.d_star());
    (1..search.order).into_par_iter().for_each(|a| {
        if search.legal(1, a) {
            let mask = search.extend(1, a);
            best.fetch_max(1, Ordering::Relaxed);
            if 1 + search.headroom(mask) > best.load(Ordering::Relaxed) {
                search.longest(mask, 1, a, &best);
            }
        }
    });
    let longest = best.into_inner();
    let mut path = Vec::new();
    let found = search.first(1, &mut path, 1, longest, &mut |_, _| true);
    assert!(found, "a zero-sum free multiset of the maximal length exists");
    Ok(DavenportResult {
        group: group.clone(),
        value: longest + 1,
        method: Method::Exact,
        witness: Sequence::from_indices(group, &path),
    })
}

/// Dispatches on `method`. `Both` runs the search and, when a closed form is
/// known, insists that the two agree.
pub fn davenport(group: &Group, method: Method, cap: u64) -> Result<DavenportResult> {
    match method {
        Method::Formula => {
            let value = davenport_formula(group)
                .ok_or_else(|| Error::Undefined(format!("no settled closed form for D({group})")))?;
            Ok(DavenportResult { group: group.clone(), value, method, witness: standard_witness(group) })
        }
        Method::Exact => davenport_exact_with_cap(group, cap),
        Method::Both => {
            let mut exact = davenport_exact_with_cap(group, cap)?;
            if let Some(formula) = davenport_formula(group) {
                if formula != exact.value {
                    return Err(Error::ConstructionFailed(format!(
                        "exact search gives D({group}) = {} but the formula gives {formula}",
                        exact.value
                    )));
                }
                exact.method = Method::Both;
            }
            Ok(exact)
        }
    }
}

fn cache() -> &'static Mutex<HashMap<Group, u64>> {
    static CACHE: OnceLock<Mutex<HashMap<Group, u64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `D(G)` from the closed form when one is settled, otherwise by exact
/// search under the default cap. Memoized per process.
pub fn davenport_value(group: &Group) -> Result<u64> {
    if let Some(&v) = cache().lock().expect("cache lock").get(group) {
        return Ok(v);
    }
    let value = match davenport_formula(group) {
        Some(v) => v,
        None => davenport_exact(group)?.value,
    };
    cache().lock().expect("cache lock").insert(group.clone(), value);
    Ok(value)
}

/// Lexicographically first zero-sum free sequence of `length` nonzero terms
/// accepted by `accept`, or `None` when the search is exhausted.
pub fn find_zero_sum_free<F>(group: &Group, length: u64, mut accept: F) -> Result<Option<Sequence>>
where
    F: FnMut(&Sequence) -> bool,
{
    check_exact_cap(group, MAX_EXACT_ORDER)?;
    let search = MaskSearch::new(group);
    let mut path = Vec::new();
    let found = search.first(1, &mut path, 1, length, &mut |p, _| accept(&Sequence::from_indices(group, p)));
    Ok(found.then(|| Sequence::from_indices(group, &path)))
}

/// `D(G) ≥ D(H) + D(G/H) − 1` and `D(G) ≥ d*(G) + 1`.
pub fn check_davenport_inequalities(group: &Group, h: &Subgroup) -> Result<VerificationReport> {
    let quotient = group.quotient(h)?;
    let sub = h.structure(group);
    let d_g = davenport_value(group)?;
    let d_h = davenport_value(&sub)?;
    let d_q = davenport_value(quotient.group())?;
    let mut report = VerificationReport::new("davenport-inequalities", group);
    report.examined = 1;
    report.note(format!("D(G) = {d_g}, D(H) = {d_h} (H = {sub}), D(G/H) = {d_q} (G/H = {})", quotient.group()));
    if d_g + 1 < d_h + d_q {
        report.fail(format!("D(G) = {d_g} < D(H) + D(G/H) - 1 = {}", d_h + d_q - 1));
    }
    if d_g < group.d_star() + 1 {
        report.fail(format!("D(G) = {d_g} < d*(G) + 1 = {}", group.d_star() + 1));
    }
    Ok(report)
}

/// `t(G) = D(G) + |G| − 1`.
pub fn t_bound(group: &Group) -> Result<u64> {
    Ok(davenport_value(group)? + group.order() - 1)
}
