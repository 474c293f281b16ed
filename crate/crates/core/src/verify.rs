//! Bounded sweeps that run the single-sequence checkers over every `0 ∤ S`
//! up to a length cap, plus the equivalence check for the order-two quotient
//! condition. A passing sweep reports "no counterexample up to cap".

use rayon::prelude::*;
use serde::Serialize;

use crate::counting::extremal_set_from_counts;
use crate::counting::{count_all, transform, Cayley};
use crate::davenport::davenport_value;
use crate::error::Result;
use crate::group::Group;
use crate::report::VerificationReport;
use crate::search::{below, find_extremals_with_budget, sweep, trial_rng, uniform_multiset, Sweep};
use crate::sequence::Sequence;
use crate::structure::{
    check_corollary_decomposition, check_es_chain, check_odd_group_structure, condition_profile,
    construct_unbounded_family, max_subgroups_in_extremal_set, minimal_zero_sums, ConditionProfile,
    MINIMAL_ENUMERATION_CAP,
};

pub use crate::search::DEFAULT_BUDGET;

/// Folds a per-sequence report into a sweep-level one.
fn absorb(total: &mut VerificationReport, part: &VerificationReport) {
    if part.is_skipped() {
        total.skipped += 1;
        return;
    }
    total.examined += part.examined;
    if part.verdict.is_failure() {
        total.verdict = part.verdict.clone();
        total.witnesses.extend(part.witnesses.iter().cloned());
    }
}

fn finish<T>(mut report: VerificationReport, swept: &Sweep<T>, max_len: u64) -> VerificationReport {
    report.exhaustive = swept.exhaustive;
    report.metrics.insert("sequences_counted".into(), swept.examined);
    if !swept.exhaustive {
        report.note("budget reached before the length cap; sweep is partial");
    }
    report.bounded(max_len)
}

fn bound(len: u64, d: u64) -> Option<u128> {
    (len + 1 >= d).then(|| 1u128 << (len + 1 - d))
}

/// `N_g(S) ≥ 2^{|S|−D+1}` for every `g ∈ Σ•(S)`, over all `0 ∤ S` with `|S| ≤ max_len`.
pub fn sweep_lower_bound(group: &Group, max_len: u64, budget: u64) -> Result<VerificationReport> {
    let d = davenport_value(group)?;
    let cayley = Cayley::new(group);
    let swept =
        sweep(&cayley, 0..=max_len, budget, |idx, counts| {
            let b = bound(idx.len() as u64, d)?;
            counts.iter().enumerate().find(|(_, &c)| c != 0 && c < b).map(|(g, &c)| {
                format!("S = {}: N_{} = {c} < {b}", Sequence::from_indices(group, idx), group.element_at(g))
            })
        });
    let mut report = VerificationReport::new("lower-bound", group);
    report.examined = swept.examined;
    for w in &swept.items {
        report.fail(w.clone());
    }
    Ok(finish(report, &swept, max_len))
}

/// If one `N_h(S)` attains the bound then all counts reach it.
pub fn sweep_one_and_all(group: &Group, max_len: u64, budget: u64) -> Result<VerificationReport> {
    let d = davenport_value(group)?;
    let cayley = Cayley::new(group);
    let swept = sweep(&cayley, (d - 1)..=max_len, budget, |idx, counts| {
        let b = bound(idx.len() as u64, d)?;
        if !counts.contains(&b) {
            return Some(None);
        }
        Some(counts.iter().enumerate().find(|(_, &c)| c < b).map(|(g, &c)| {
            format!(
                "S = {}: E(S) nonempty but N_{} = {c} < {b}",
                Sequence::from_indices(group, idx),
                group.element_at(g)
            )
        }))
    });
    let mut report = VerificationReport::new("one-and-all", group);
    report.examined = swept.items.len() as u64;
    report.skipped = swept.examined - report.examined;
    for w in swept.items.iter().flatten() {
        report.fail(w.clone());
    }
    Ok(finish(report, &swept, max_len))
}

/// `E(S) + {0, −a} ⊆ E(S·a^{−1})` for every qualifying `(S, a)`.
pub fn sweep_es_chain(group: &Group, max_len: u64, budget: u64) -> Result<VerificationReport> {
    let d = davenport_value(group)?;
    let cayley = Cayley::new(group);
    let swept = sweep(&cayley, d..=max_len, budget, |idx, counts| {
        (Some(counts[0]) == bound(idx.len() as u64, d)).then(|| {
            let s = Sequence::from_indices(group, idx);
            s.support().map(|a| check_es_chain(&s, a, d).expect("supported term, |S| >= D")).collect::<Vec<_>>()
        })
    });
    let mut report = VerificationReport::new("es-chain", group);
    for part in swept.items.iter().flatten() {
        absorb(&mut report, part);
    }
    Ok(finish(report, &swept, max_len))
}

/// Every nontrivial subgroup inside some `E(S)` is elementary 2-abelian of
/// rank `r` with `D(G) = D(G/H) + r`.
pub fn sweep_subgroup_es(group: &Group, max_len: u64, budget: u64) -> Result<VerificationReport> {
    let d = davenport_value(group)?;
    let masks: Vec<u128> = group
        .all_subgroups()?
        .iter()
        .filter(|h| !h.is_trivial())
        .map(|h| h.elements().iter().fold(0u128, |m, x| m | 1 << group.index_of(x)))
        .collect();
    let cayley = Cayley::new(group);
    let swept = sweep(&cayley, (d - 1)..=max_len, budget, |idx, counts| {
        let b = bound(idx.len() as u64, d)?;
        let e = counts.iter().enumerate().filter(|(_, &c)| c == b).fold(0u128, |m, (i, _)| m | 1 << i);
        masks.iter().any(|&h| e & h == h).then(|| {
            let es =
                extremal_set_from_counts(&cayley.wrap(counts.to_vec(), idx.len() as u64), d).expect("|S| >= D - 1");
            (Sequence::from_indices(group, idx), es)
        })
    });
    let mut report = VerificationReport::new("subgroup-es", group);
    let mut largest = 0u64;
    for (s, es) in &swept.items {
        let found = max_subgroups_in_extremal_set(es, d)?;
        for (h, _) in found.contained.iter().filter(|(h, maximal)| *maximal && !h.is_trivial()) {
            largest = largest.max(h.order() as u64);
        }
        if found.report.verdict.is_failure() {
            report.note(format!("in E({s})"));
        }
        absorb(&mut report, &found.report);
    }
    report.metrics.insert("sets_with_subgroups".into(), swept.items.len() as u64);
    report.metrics.insert("largest_subgroup".into(), largest);
    Ok(finish(report, &swept, max_len))
}

/// Minimal zero-sum structure of every extremal `0 ∤ S` up to `max_len`.
pub fn sweep_odd_structure(group: &Group, max_len: u64, budget: u64) -> Result<VerificationReport> {
    let name = "odd-structure";
    if group.order() % 2 == 0 {
        return Ok(VerificationReport::skipped(name, group, "group order is even"));
    }
    let catalog = find_extremals_with_budget(group, max_len, budget)?;
    let mut report = VerificationReport::new(name, group);
    for s in catalog.sequences() {
        absorb(&mut report, &check_odd_group_structure(s, catalog.davenport)?);
    }
    report.exhaustive = catalog.exhaustive;
    report.metrics.insert("extremals".into(), catalog.len() as u64);
    report.metrics.insert("sequences_counted".into(), catalog.examined);
    Ok(report.bounded(max_len))
}

/// Every extremal `0 ∤ S` with `E(S) = {0}` is the product of its minimal
/// zero-sum subsequences.
pub fn sweep_corollary(group: &Group, max_len: u64, budget: u64) -> Result<VerificationReport> {
    let name = "corollary";
    if group.order() % 2 == 0 {
        return Ok(VerificationReport::skipped(name, group, "group order is even"));
    }
    let catalog = find_extremals_with_budget(group, max_len, budget)?;
    let mut report = VerificationReport::new(name, group);
    for (s, es) in &catalog.entries {
        if es.members.len() == 1 {
            absorb(&mut report, &check_corollary_decomposition(s, catalog.davenport)?);
        } else {
            report.skipped += 1;
        }
    }
    report.exhaustive = catalog.exhaustive;
    report.metrics.insert("extremals".into(), catalog.len() as u64);
    Ok(report.bounded(max_len))
}

/// `N_{σ(T)}(S) = N_0(T·(−(S·T^{−1})))` for `trials` random pairs `T | S`
/// with `|S| ≤ max_len`, zero terms allowed.
pub fn check_transform_random(group: &Group, max_len: u64, trials: u64, seed: u64) -> Result<VerificationReport> {
    let order = group.order();
    let failures: Vec<String> = (0..trials)
        .into_par_iter()
        .filter_map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let len = below(&mut rng, max_len + 1);
            let idx: Vec<usize> = if len == 0 {
                Vec::new()
            } else {
                uniform_multiset(&mut rng, order, len).into_iter().map(|i| i as usize).collect()
            };
            let t_idx: Vec<usize> = idx.iter().copied().filter(|_| below(&mut rng, 2) == 1).collect();
            let s = Sequence::from_indices(group, &idx);
            let t = Sequence::from_indices(group, &t_idx);
            let w = transform(&s, &t).expect("T divides S");
            let lhs = count_all(&s).get(&t.sum()).clone();
            let rhs = count_all(&w).zero_count().clone();
            (lhs != rhs).then(|| format!("S = {s}, T = {t}: N_sigma(T)(S) = {lhs}, N_0(W) = {rhs}"))
        })
        .collect();
    let mut report = VerificationReport::new("transform", group);
    report.examined = trials;
    report.exhaustive = false;
    for f in failures {
        report.fail(f);
    }
    report.note(format!("{trials} random pairs, seed {seed}"));
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub report: VerificationReport,
    pub profile: ConditionProfile,
    /// `S·h^k` for `k = 1..=10` when the quotient condition fails.
    pub family: Vec<Sequence>,
    /// Longest extremal length seen in the sweep, when the condition holds.
    pub extremal_ceiling: Option<u64>,
    pub sweep_cap: u64,
}

/// Number of family members exhibited when the quotient condition fails.
pub const FAMILY_SIZE: u64 = 10;

/// The order-two quotient condition against its equivalent forms.
///
/// When it fails, an unbounded family of extremal sequences whose `E(S)`
/// contains `H` is exhibited, so the bounded-length and subgroup-free forms
/// fail as well. When it holds, every `0 ∤ S` up to `min(max_len, t(G))` is
/// checked for a nontrivial subgroup inside `E(S)`, and the longest extremal
/// length is recorded together with the disjoint-decomposition evidence.
pub fn equivalences(group: &Group, max_len: u64, budget: u64) -> Result<EquivalenceReport> {
    let profile = condition_profile(group)?;
    let d = davenport_value(group)?;
    let mut report = VerificationReport::new("equivalences", group);
    if let Some(h) = profile.offending_h.clone() {
        let hgen = h.elements()[1].clone();
        let mut family = Vec::new();
        for k in 1..=FAMILY_SIZE {
            let s = construct_unbounded_family(group, &h, k)?;
            let counts = count_all(&s);
            report.examined += 1;
            if counts.zero_count() != counts.get(&hgen) {
                report.fail(format!("{s}: N_0 != N_h"));
            }
            family.push(s);
        }
        report.metrics.insert("family_size".into(), family.len() as u64);
        report.note(format!(
            "condition fails at H = <{hgen}>: extremal S h^k for k = 1..{FAMILY_SIZE}, lengths unbounded, H inside every E(S h^k)"
        ));
        return Ok(EquivalenceReport { report, profile, family, extremal_ceiling: None, sweep_cap: 0 });
    }

    let cap = max_len.min(profile.t);
    let masks: Vec<u128> = group
        .all_subgroups()?
        .iter()
        .filter(|h| !h.is_trivial())
        .map(|h| h.elements().iter().fold(0u128, |m, x| m | 1 << group.index_of(x)))
        .collect();
    let cayley = Cayley::new(group);
    // (length when extremal, subgroup violation)
    let swept = sweep(&cayley, (d - 1)..=cap, budget, |idx, counts| {
        let len = idx.len() as u64;
        let b = bound(len, d)?;
        let e = counts.iter().enumerate().filter(|(_, &c)| c == b).fold(0u128, |m, (i, _)| m | 1 << i);
        let violation = masks.iter().any(|&h| e & h == h).then(|| Sequence::from_indices(group, idx));
        let extremal = (counts[0] == b).then(|| Sequence::from_indices(group, idx));
        (violation.is_some() || extremal.is_some()).then_some((extremal, violation))
    });
    report.examined = swept.examined;
    for (_, v) in &swept.items {
        if let Some(s) = v {
            report.fail(format!("E({s}) contains a nontrivial subgroup"));
        }
    }
    let extremals: Vec<&Sequence> = swept.items.iter().filter_map(|(e, _)| e.as_ref()).collect();
    let extremal_ceiling = extremals.iter().map(|s| s.len()).max();
    let mut decomposed = 0u64;
    let mut checked = 0u64;
    for s in extremals.iter().filter(|s| s.len() <= MINIMAL_ENUMERATION_CAP) {
        checked += 1;
        if minimal_zero_sums(s)?.with_davenport(d).is_disjoint_decomposition() {
            decomposed += 1;
        }
    }
    report.metrics.insert("extremals".into(), extremals.len() as u64);
    report.metrics.insert("decomposition_evidence".into(), decomposed);
    report.metrics.insert("t".into(), profile.t);
    if let Some(c) = extremal_ceiling {
        report.metrics.insert("extremal_ceiling".into(), c);
    }
    report.note(format!(
        "condition holds; disjoint decomposition seen on {decomposed} of {checked} extremal sequences (evidence only)"
    ));
    if let Some(c) = extremal_ceiling {
        report.note(format!("extremal lengths stop at {c} within cap {cap} (t = {})", profile.t));
    }
    let report = finish(report, &swept, cap);
    Ok(EquivalenceReport { report, profile, family: Vec::new(), extremal_ceiling, sweep_cap: cap })
}
