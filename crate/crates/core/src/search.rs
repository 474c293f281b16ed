//! Exhaustive and randomized extremal-sequence search, the extremal
//! construction from a maximal zero-sum free sequence, and the two
//! conjecture harnesses.
//!
//! Sweeps enumerate sequences without the zero term in canonical order, split
//! into contiguous chunks that are counted in parallel and merged in order,
//! so every result is independent of the thread count. Budgets count
//! sequences, not time.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::counting::subsums;
use crate::counting::{count_all, extremal_bound, extremal_set_from_counts, Cayley, ExtremalSet};
use crate::davenport::{davenport_value, find_zero_sum_free};
use crate::error::{Error, Result};
use crate::group::{Group, GroupElement};
use crate::report::VerificationReport;
use crate::sequence::{MultisetIndices, Sequence};
use crate::structure::{condition_profile, minimal_zero_sums};

/// Default number of sequences a sweep may count.
pub const DEFAULT_BUDGET: u64 = 5_000_000;

const CHUNK: usize = 4096;

pub(crate) struct Sweep<T> {
    pub(crate) items: Vec<T>,
    pub(crate) examined: u64,
    pub(crate) exhaustive: bool,
}

/// Runs `f` on every `0 ∤ S` with length in `lengths`, passing the occurrence
/// indices and the full count vector. Results come back in enumeration order.
pub(crate) fn sweep<T, F>(cayley: &Cayley, lengths: RangeInclusive<u64>, budget: u64, f: F) -> Sweep<T>
where
    T: Send,
    F: Fn(&[usize], &[u128]) -> Option<T> + Sync,
{
    let mut out = Sweep { items: Vec::new(), examined: 0, exhaustive: true };
    let alphabet = cayley.order() - 1;
    'lengths: for len in lengths {
        let mut stream = MultisetIndices::new(alphabet, len as usize).peekable();
        while stream.peek().is_some() {
            let room = budget - out.examined;
            if room == 0 {
                out.exhaustive = false;
                break 'lengths;
            }
            let chunk: Vec<Vec<usize>> = stream
                .by_ref()
                .take(CHUNK.min(usize::try_from(room).unwrap_or(usize::MAX)))
                .map(|mut idx| {
                    idx.iter_mut().for_each(|i| *i += 1);
                    idx
                })
                .collect();
            out.examined += chunk.len() as u64;
            let found: Vec<T> = chunk.par_iter().filter_map(|idx| f(idx, &cayley.counts(idx))).collect();
            out.items.extend(found);
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtremalCatalog {
    pub group: Group,
    pub davenport: u64,
    /// Extremal sequences with their extremal sets, in shortlex order.
    pub entries: Vec<(Sequence, ExtremalSet)>,
    pub max_length_found: Option<u64>,
    pub length_cap: u64,
    /// False for random catalogs and for sweeps cut short by the budget.
    pub exhaustive: bool,
    /// Sequences counted (exhaustive) or sampled (random).
    pub examined: u64,
}

impl ExtremalCatalog {
    pub fn sequences(&self) -> impl Iterator<Item = &Sequence> + '_ {
        self.entries.iter().map(|(s, _)| s)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Every extremal `0 ∤ S` with `D(G) − 1 ≤ |S| ≤ length_cap`.
pub fn find_extremals(group: &Group, length_cap: u64) -> Result<ExtremalCatalog> {
    find_extremals_with_budget(group, length_cap, DEFAULT_BUDGET)
}

pub fn find_extremals_with_budget(group: &Group, length_cap: u64, budget: u64) -> Result<ExtremalCatalog> {
    let d = davenport_value(group)?;
    let cayley = Cayley::new(group);
    let swept = sweep(&cayley, (d - 1)..=length_cap, budget, |idx, counts| {
        let len = idx.len() as u64;
        (counts[0] == 1u128 << (len + 1 - d)).then(|| {
            let es = extremal_set_from_counts(&cayley.wrap(counts.to_vec(), len), d).expect("|S| >= D - 1");
            (Sequence::from_indices(group, idx), es)
        })
    });
    Ok(catalog(group, d, swept.items, length_cap, swept.exhaustive, swept.examined))
}

fn catalog(
    group: &Group,
    davenport: u64,
    mut entries: Vec<(Sequence, ExtremalSet)>,
    length_cap: u64,
    exhaustive: bool,
    examined: u64,
) -> ExtremalCatalog {
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    entries.dedup_by(|a, b| a.0 == b.0);
    let max_length_found = entries.last().map(|(s, _)| s.len());
    ExtremalCatalog { group: group.clone(), davenport, entries, max_length_found, length_cap, exhaustive, examined }
}

/// Shortest, then lexicographically first, `T | U` with `σ(T) = g`.
fn shortest_subsum(u: &Sequence, g: &GroupElement) -> Option<Sequence> {
    let group = u.group();
    let support: Vec<(GroupElement, u64)> = u.iter().map(|(a, m)| (a.clone(), m)).collect();
    let mut best: Option<Sequence> = None;
    let mut take = vec![0u64; support.len()];
    loop {
        let t = Sequence::from_terms(group, support.iter().zip(&take).map(|((a, _), &k)| (a.clone(), k)))
            .expect("terms of U");
        if t.sum() == *g && best.as_ref().is_none_or(|b| t < *b) {
            best = Some(t);
        }
        // odometer over 0..=multiplicity for each supported term
        let Some(i) = (0..take.len()).rev().find(|&i| take[i] < support[i].1) else {
            break;
        };
        take[i] += 1;
        take[i + 1..].iter_mut().for_each(|k| *k = 0);
    }
    best
}

/// `S = T·(−(U·T^{−1}))·0^{m−D+1}` for the lexicographically first zero-sum
/// free `U` of length `D(G) − 1` that has a subsum equal to `g`, and the
/// shortest such `T | U`. Then `N_g(S) = 2^{m−D+1}`, which is re-checked.
pub fn construct_extremal(group: &Group, g: &GroupElement, m: u64) -> Result<Sequence> {
    if !group.contains(g) {
        return Err(Error::Precondition(format!("{g} is not an element of {group}")));
    }
    let d = davenport_value(group)?;
    if m + 1 < d {
        return Err(Error::Precondition(format!("m = {m} is below D({group}) - 1 = {}", d - 1)));
    }
    let u = find_zero_sum_free(group, d - 1, |u| subsums(u).contains(g))?.ok_or_else(|| {
        Error::ConstructionFailed(format!(
            "{g} is a subsum of no zero-sum free sequence of length {} over {group}",
            d - 1
        ))
    })?;
    let t = shortest_subsum(&u, g).expect("g is a subsum of U");
    let s = t.mul(&u.div(&t)?.neg())?.with(&group.zero(), m + 1 - d)?;
    let expected = extremal_bound(m, d).expect("m >= D - 1");
    let got = count_all(&s).get(g).clone();
    if got != expected {
        return Err(Error::ConstructionFailed(format!("{s}: N_{g} = {got}, expected {expected}")));
    }
    Ok(s)
}

/// For groups with `D(G) ≥ D(G/H) + 2` for every `H ≅ C_2`: every extremal
/// `0 ∤ S` up to the cap has exactly `|S| − D + 1` pairwise disjoint minimal
/// zero-sum subsequences.
pub fn conjecture1_harness(group: &Group, length_cap: u64) -> Result<VerificationReport> {
    conjecture1_harness_with_budget(group, length_cap, DEFAULT_BUDGET)
}

pub fn conjecture1_harness_with_budget(group: &Group, length_cap: u64, budget: u64) -> Result<VerificationReport> {
    let name = "conjecture-1";
    let profile = condition_profile(group)?;
    if let Some(h) = profile.offending_h {
        let q = group.quotient(&h)?;
        return Ok(VerificationReport::skipped(
            name,
            group,
            format!(
                "non-qualifying group: H = <{}> has D(G) = {} < D(G/H) + 2 = {}",
                h.generators()[0],
                davenport_value(group)?,
                davenport_value(q.group())? + 2
            ),
        ));
    }
    let catalog = find_extremals_with_budget(group, length_cap, budget)?;
    let mut report = VerificationReport::new(name, group);
    report.exhaustive = catalog.exhaustive;
    report.metrics.insert("sequences_counted".into(), catalog.examined);
    report.metrics.insert("extremals".into(), catalog.len() as u64);
    if let Some(max) = catalog.max_length_found {
        report.metrics.insert("max_extremal_length".into(), max);
    }
    for s in catalog.sequences() {
        report.examined += 1;
        let mz = minimal_zero_sums(s)?.with_davenport(catalog.davenport);
        if !mz.is_disjoint_decomposition() {
            let listed: Vec<String> = mz.minimals.iter().map(ToString::to_string).collect();
            report.fail(format!(
                "S = {s}: minimal zero-sums [{}], expected {} pairwise disjoint",
                listed.join("; "),
                mz.expected_count.unwrap_or_default()
            ));
        }
    }
    if !catalog.exhaustive {
        report.note(format!("budget of {budget} sequences reached before length {length_cap}"));
    }
    Ok(report.bounded(length_cap))
}

#[derive(Clone, Debug, Serialize)]
pub struct Conjecture2Outcome {
    pub report: VerificationReport,
    /// `d*(G) + rank(G)`.
    pub bound: u64,
    /// Longest in-scope sequence found: `0 ∤ S`, `E(S)` nonempty and free of
    /// nontrivial subgroups.
    pub max_length: Option<u64>,
    pub longest: Vec<Sequence>,
    /// `∏ e_i^{n_i}` over the invariant-factor basis.
    pub product_witness: Sequence,
    pub product_witness_extremal: bool,
    pub product_witness_in_scope: bool,
    /// The maximum equals the bound and the product witness is among the longest.
    pub bound_attained: bool,
}

/// Index bitmasks of the nontrivial subgroups.
fn subgroup_masks(group: &Group) -> Result<Vec<u128>> {
    Ok(group
        .all_subgroups()?
        .iter()
        .filter(|h| !h.is_trivial())
        .map(|h| h.elements().iter().fold(0u128, |m, x| m | 1 << group.index_of(x)))
        .collect())
}

/// For groups with `D(G) = d*(G) + 1`: an `S` with `0 ∤ S` whose `E(S)` is
/// nonempty and contains no nontrivial subgroup has `|S| ≤ d*(G) + rank`.
pub fn conjecture2_harness(group: &Group, length_cap: u64) -> Result<Conjecture2Outcome> {
    conjecture2_harness_with_budget(group, length_cap, DEFAULT_BUDGET)
}

pub fn conjecture2_harness_with_budget(group: &Group, length_cap: u64, budget: u64) -> Result<Conjecture2Outcome> {
    let name = "conjecture-2";
    let d = davenport_value(group)?;
    let bound = group.d_star() + group.rank() as u64;
    let product_witness = Sequence::from_terms(group, group.basis().into_iter().zip(group.invariants().to_vec()))?;
    if length_cap < bound + 1 {
        return Err(Error::Precondition(format!(
            "length cap must reach d*(G) + rank + 1 = {}, got {length_cap}",
            bound + 1
        )));
    }
    let masks = subgroup_masks(group)?;
    let in_scope = |counts: &[u128], len: u64| -> bool {
        let Some(b) = (len + 1 >= d).then(|| 1u128 << (len + 1 - d)) else {
            return false;
        };
        let e = counts.iter().enumerate().filter(|(_, &c)| c == b).fold(0u128, |m, (i, _)| m | 1 << i);
        e != 0 && masks.iter().all(|&h| e & h != h)
    };
    let witness_counts: Vec<u128> =
        count_all(&product_witness).as_slice().iter().map(|c| c.try_into().expect("small")).collect();
    let product_witness_extremal =
        extremal_bound(product_witness.len(), d).is_some_and(|b| count_all(&product_witness).zero_count() == &b);
    let product_witness_in_scope = in_scope(&witness_counts, product_witness.len());

    if d != group.d_star() + 1 {
        let report = VerificationReport::skipped(
            name,
            group,
            format!("hypothesis fails: D(G) = {d} but d*(G) + 1 = {}", group.d_star() + 1),
        );
        return Ok(Conjecture2Outcome {
            report,
            bound,
            max_length: None,
            longest: Vec::new(),
            product_witness,
            product_witness_extremal,
            product_witness_in_scope,
            bound_attained: false,
        });
    }

    let cayley = Cayley::new(group);
    let swept = sweep(&cayley, (d - 1)..=length_cap, budget, |idx, counts| {
        in_scope(counts, idx.len() as u64).then(|| Sequence::from_indices(group, idx))
    });
    let mut report = VerificationReport::new(name, group);
    report.exhaustive = swept.exhaustive;
    report.examined = swept.examined;
    let max_length = swept.items.iter().map(Sequence::len).max();
    let longest: Vec<Sequence> = swept.items.iter().filter(|s| Some(s.len()) == max_length).cloned().collect();
    for s in swept.items.iter().filter(|s| s.len() > bound) {
        report.fail(format!("S = {s}: |S| = {} > d*(G) + rank = {bound}", s.len()));
    }
    let bound_attained = max_length == Some(bound) && longest.contains(&product_witness);
    report.metrics.insert("in_scope".into(), swept.items.len() as u64);
    report.metrics.insert("bound".into(), bound);
    if let Some(max) = max_length {
        report.metrics.insert("max_length".into(), max);
    }
    report.note(format!(
        "product witness {product_witness}: extremal {product_witness_extremal}, in scope {product_witness_in_scope}"
    ));
    match max_length {
        Some(max) if bound_attained => report.note(format!("bound {bound} is tight, attained at length {max}")),
        Some(max) => {
            report.note(format!("longest in-scope length {max}, bound {bound} not attained by the product witness"))
        }
        None => report.note("no sequence satisfies the subgroup-free filter up to the cap"),
    }
    if !swept.exhaustive {
        report.note(format!("budget of {budget} sequences reached before length {length_cap}"));
    }
    Ok(Conjecture2Outcome {
        report: report.bounded(length_cap),
        bound,
        max_length,
        longest,
        product_witness,
        product_witness_extremal,
        product_witness_in_scope,
        bound_attained,
    })
}

/// Uniform in `0..n` by rejection on `next_u64`.
pub(crate) fn below(rng: &mut impl RngCore, n: u64) -> u64 {
    assert!(n > 0);
    let reject = n.wrapping_neg() % n;
    loop {
        let x = rng.next_u64();
        if x >= reject {
            return x % n;
        }
    }
}

/// Uniform multiset of `length` values in `0..alphabet`, as a sorted vector.
///
/// Floyd's algorithm picks `length` distinct positions among
/// `alphabet + length − 1`; subtracting each rank maps them to a multiset.
pub(crate) fn uniform_multiset(rng: &mut impl RngCore, alphabet: u64, length: u64) -> Vec<u64> {
    let slots = alphabet + length - 1;
    let mut chosen = BTreeSet::new();
    for j in (slots - length)..slots {
        let t = below(rng, j + 1);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    chosen.into_iter().enumerate().map(|(r, p)| p - r as u64).collect()
}

/// Per-trial generator: ChaCha8 seeded from `seed`, on stream `trial`.
pub(crate) fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Samples `trials` multisets of `length` nonzero terms uniformly and keeps
/// the extremal ones. Trial `i` draws from ChaCha8 seeded by `seed` on stream
/// `i`, so catalogs are reproducible and independent of scheduling.
pub fn random_search(group: &Group, length: u64, trials: u64, seed: u64) -> Result<ExtremalCatalog> {
    let d = davenport_value(group)?;
    let alphabet = group.order() - 1;
    if alphabet == 0 && length > 0 || length + 1 < d {
        return Ok(catalog(group, d, Vec::new(), length, false, trials));
    }
    let cayley = Cayley::new(group);
    let hits: BTreeMap<Sequence, ExtremalSet> = (0..trials)
        .into_par_iter()
        .filter_map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let idx: Vec<usize> = if length == 0 {
                Vec::new()
            } else {
                uniform_multiset(&mut rng, alphabet, length).into_iter().map(|i| i as usize + 1).collect()
            };
            let counts = cayley.counts(&idx);
            (counts[0] == 1u128 << (length + 1 - d)).then(|| {
                let es = extremal_set_from_counts(&cayley.wrap(counts, length), d).expect("|S| >= D - 1");
                (Sequence::from_indices(group, &idx), es)
            })
        })
        .collect();
    Ok(catalog(group, d, hits.into_iter().collect(), length, false, trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::multichoose;

    fn g(spec: &str) -> Group {
        spec.parse().unwrap()
    }

    fn seq(group: &Group, text: &str) -> Sequence {
        Sequence::parse(group, text).unwrap()
    }

    fn names(c: &ExtremalCatalog) -> Vec<String> {
        c.sequences().map(ToString::to_string).collect()
    }

    #[test]
    fn catalogs() {
        let c = find_extremals(&g("C3"), 5).unwrap();
        assert_eq!(names(&c), ["1^2", "2^2", "1^3", "2^3"]);
        assert_eq!(c.max_length_found, Some(3));
        assert!(c.exhaustive);

        let c = find_extremals(&g("C2"), 6).unwrap();
        assert_eq!(names(&c), ["1", "1^2", "1^3", "1^4", "1^5", "1^6"]);

        let c33 = g("C3xC3");
        let c = find_extremals(&c33, 7).unwrap();
        assert!(c.sequences().any(|s| *s == seq(&c33, "(1,0)^3 (0,1)^3")));
        for (s, es) in &c.entries {
            assert!(!s.contains_zero());
            assert!(es.contains(&c33.zero()));
            assert_eq!(count_all(s).zero_count(), &extremal_bound(s.len(), 5).unwrap());
        }
        assert_eq!(c.examined, (4..=7).map(|k| multichoose(8, k)).sum::<u64>());
    }

    #[test]
    fn catalog_matches_plain_enumeration() {
        for spec in ["C4", "C2xC2", "C6", "C2xC4"] {
            let group = g(spec);
            let d = davenport_value(&group).unwrap();
            let expected: Vec<Sequence> = ((d - 1)..=d + 2)
                .flat_map(|k| crate::sequence::iterate_multisets(&group, k as usize, true))
                .filter(|s| count_all(s).zero_count() == &extremal_bound(s.len(), d).unwrap())
                .collect();
            let got: Vec<Sequence> = find_extremals(&group, d + 2).unwrap().sequences().cloned().collect();
            assert_eq!(got, expected, "{spec}");
        }
    }

    #[test]
    fn budget_truncates() {
        let c = find_extremals_with_budget(&g("C3xC3"), 7, 100).unwrap();
        assert!(!c.exhaustive);
        assert_eq!(c.examined, 100);
    }

    #[test]
    fn construction() {
        let c5 = g("C5");
        let s = construct_extremal(&c5, &c5.element(&[2]).unwrap(), 6).unwrap();
        assert_eq!(s, seq(&c5, "0^2 1^2 4^2"));
        let s = construct_extremal(&c5, &c5.zero(), 4).unwrap();
        assert_eq!(s, seq(&c5, "4^4"));
        assert!(matches!(construct_extremal(&c5, &c5.zero(), 3), Err(Error::Precondition(_))));

        for spec in ["C2xC2", "C6", "C2xC4", "C3xC3", "C2xC2xC2"] {
            let group = g(spec);
            let d = davenport_value(&group).unwrap();
            for x in group.elements() {
                for m in [d - 1, d, d + 2] {
                    let s = construct_extremal(&group, &x, m).unwrap();
                    assert_eq!(s.len(), m);
                    assert_eq!(count_all(&s).get(&x), &extremal_bound(m, d).unwrap());
                }
            }
        }
    }

    #[test]
    fn conjecture_one() {
        let r = conjecture1_harness(&g("C3xC3"), 7).unwrap();
        assert_eq!(r.verdict, crate::report::Verdict::NoCounterexample { cap: 7 });
        assert!(conjecture1_harness(&g("C4"), 8).unwrap().passed());
        assert!(conjecture1_harness(&g("C2xC2"), 6).unwrap().is_skipped());
    }

    #[test]
    fn conjecture_two() {
        let c33 = g("C3xC3");
        let o = conjecture2_harness(&c33, 7).unwrap();
        assert!(o.report.passed());
        assert_eq!(o.max_length, Some(6));
        assert!(o.bound_attained);
        assert!(o.longest.contains(&seq(&c33, "(0,1)^3 (1,0)^3")));

        let c5 = g("C5");
        let o = conjecture2_harness(&c5, 7).unwrap();
        assert_eq!(o.max_length, Some(5));
        assert!(o.bound_attained);
        assert_eq!(o.product_witness, seq(&c5, "1^5"));

        let v = g("C2xC2");
        let o = conjecture2_harness(&v, 6).unwrap();
        assert!(o.report.passed());
        assert!(o.product_witness_extremal);
        assert!(!o.product_witness_in_scope);
        assert_eq!(o.max_length, None);

        assert!(matches!(conjecture2_harness(&c5, 5), Err(Error::Precondition(_))));
    }

    #[test]
    fn sampling_is_uniform_over_multisets() {
        let mut rng = trial_rng(7, 0);
        let mut freq = BTreeMap::new();
        let draws = 60_000;
        for _ in 0..draws {
            *freq.entry(uniform_multiset(&mut rng, 3, 2)).or_insert(0u32) += 1;
        }
        assert_eq!(freq.len(), 6);
        for (_, n) in freq {
            assert!((9_000..11_000).contains(&n));
        }
        for _ in 0..1000 {
            assert!(below(&mut rng, 3) < 3);
        }
    }

    #[test]
    fn random_catalogs() {
        let v = g("C2xC2");
        assert!(random_search(&v, 10, 0, 1).unwrap().is_empty());
        let a = random_search(&v, 10, 10_000, 1).unwrap();
        let b = random_search(&v, 10, 10_000, 1).unwrap();
        assert_eq!(names(&a), names(&b));
        assert!(!a.exhaustive);
        for (s, _) in &a.entries {
            assert_eq!(count_all(s).zero_count(), &extremal_bound(10, 3).unwrap());
        }
        let family = seq(&v, "(1,0) (0,1) (1,1)^8");
        assert!(a.sequences().any(|s| *s == family));
    }
}
