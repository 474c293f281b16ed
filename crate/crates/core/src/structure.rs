//! Minimal zero-sum subsequences and the structural checks on extremal
//! sequences: disjoint decompositions over odd groups, the `E(S)` chain under
//! term removal, subgroups inside `E(S)`, the order-two quotient condition,
//! and the cyclic characterization.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::counting::{count_all, extremal_bound, extremal_set, subsums, ExtremalSet};
use crate::davenport::{davenport_value, is_zero_sum_free, t_bound};
use crate::error::{Error, Result};
use crate::group::{gcd, Group, GroupElement, Subgroup};
use crate::report::VerificationReport;
use crate::sequence::{iterate_multisets, Sequence};

/// Longest sequence accepted by [`minimal_zero_sums`].
pub const MINIMAL_ENUMERATION_CAP: u64 = 25;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinZeroSumReport {
    pub sequence: Sequence,
    /// Each distinct minimal zero-sum subsequence, as a multiset, in shortlex order.
    pub minimals: Vec<Sequence>,
    /// Number of index subsets realizing each entry of `minimals`.
    pub occurrences: Vec<u64>,
    /// `gcd(T_i, T_j)` is empty for every pair.
    pub pairwise_disjoint: bool,
    /// `|S| − D(G) + 1`, when a Davenport constant was supplied.
    pub expected_count: Option<i64>,
}

impl MinZeroSumReport {
    pub fn with_davenport(mut self, davenport: u64) -> Self {
        self.expected_count = Some(self.sequence.len() as i64 - davenport as i64 + 1);
        self
    }

    /// Exactly `expected_count` minimal zero-sum subsequences, pairwise disjoint.
    pub fn is_disjoint_decomposition(&self) -> bool {
        self.pairwise_disjoint && self.expected_count == Some(self.minimals.len() as i64)
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// `T` is minimal zero-sum iff `σ(T) = 0`, `T` is nonempty and removing any
/// single supported term leaves a zero-sum free sequence.
pub fn is_minimal_zero_sum(t: &Sequence) -> bool {
    !t.is_empty() && t.sum().is_zero() && t.support().all(|a| is_zero_sum_free(&t.without(a).expect("supported term")))
}

/// All minimal zero-sum subsequences of `s`, each listed once as a multiset.
///
/// Walks sub-multisets in canonical order. A minimal zero-sum `T` with its last
/// term removed is zero-sum free, so only zero-sum free prefixes are extended.
pub fn minimal_zero_sums(s: &Sequence) -> Result<MinZeroSumReport> {
    if s.len() > MINIMAL_ENUMERATION_CAP {
        return Err(Error::CapExceeded {
            what: "sequence length for minimal zero-sum enumeration",
            actual: s.len(),
            cap: MINIMAL_ENUMERATION_CAP,
        });
    }
    let group = s.group();
    let support: Vec<(GroupElement, u64)> = s.iter().map(|(g, m)| (g.clone(), m)).collect();
    let mut found = Vec::new();
    let mut used = vec![0u64; support.len()];
    let reach = BTreeSet::from([group.zero()]);
    walk(group, &support, &mut used, 0, &reach, &mut found);
    found.sort();

    let occurrences = found.iter().map(|t| t.iter().map(|(g, m)| binomial(s.multiplicity(g), m)).product()).collect();
    let mut pairwise_disjoint = true;
    for (i, a) in found.iter().enumerate() {
        for b in &found[i + 1..] {
            if !Sequence::gcd(&[a.clone(), b.clone()])?.is_empty() {
                pairwise_disjoint = false;
            }
        }
    }
    Ok(MinZeroSumReport { sequence: s.clone(), minimals: found, occurrences, pairwise_disjoint, expected_count: None })
}

fn walk(
    group: &Group,
    support: &[(GroupElement, u64)],
    used: &mut Vec<u64>,
    start: usize,
    reach: &BTreeSet<GroupElement>,
    found: &mut Vec<Sequence>,
) {
    for j in start..support.len() {
        let (a, limit) = &support[j];
        if used[j] == *limit {
            continue;
        }
        used[j] += 1;
        let current = || {
            Sequence::from_terms(group, support.iter().zip(used.iter()).map(|((g, _), &k)| (g.clone(), k)))
                .expect("terms of the parent sequence")
        };
        if reach.contains(&group.neg_unchecked(a)) {
            let t = current();
            if t.sum().is_zero() && is_minimal_zero_sum(&t) {
                found.push(t);
            }
        } else {
            let mut next = reach.clone();
            next.extend(reach.iter().map(|x| group.add_unchecked(x, a)));
            walk(group, support, used, j, &next, found);
        }
        used[j] -= 1;
    }
}

fn is_extremal(s: &Sequence, davenport: u64) -> bool {
    extremal_bound(s.len(), davenport).is_some_and(|b| count_all(s).zero_count() == &b)
}

/// Over a group of odd order, an extremal `S` with `0 ∤ S` has exactly
/// `|S| − D + 1` minimal zero-sum subsequences, pairwise disjoint.
pub fn check_odd_group_structure(s: &Sequence, davenport: u64) -> Result<VerificationReport> {
    let group = s.group();
    let name = "odd-structure";
    if group.order() % 2 == 0 {
        return Ok(VerificationReport::skipped(name, group, "group order is even"));
    }
    if s.contains_zero() {
        return Ok(VerificationReport::skipped(name, group, "0 divides S"));
    }
    if !is_extremal(s, davenport) {
        return Ok(VerificationReport::skipped(name, group, "N_0(S) != 2^(|S|-D+1)"));
    }
    let mz = minimal_zero_sums(s)?.with_davenport(davenport);
    let mut report = VerificationReport::new(name, group);
    report.examined = 1;
    if !mz.is_disjoint_decomposition() {
        let listed: Vec<String> = mz.minimals.iter().map(ToString::to_string).collect();
        report.fail(format!(
            "S = {s}: {} minimal zero-sums [{}], expected {}, pairwise disjoint: {}",
            mz.minimals.len(),
            listed.join("; "),
            mz.expected_count.unwrap_or_default(),
            mz.pairwise_disjoint
        ));
    }
    Ok(report)
}

/// Over a group of odd order, `0 ∤ S` and `E(S) = {0}` force `S` to be the
/// product of its minimal zero-sum subsequences.
pub fn check_corollary_decomposition(s: &Sequence, davenport: u64) -> Result<VerificationReport> {
    let group = s.group();
    let name = "corollary";
    if group.order() % 2 == 0 {
        return Ok(VerificationReport::skipped(name, group, "group order is even"));
    }
    if s.contains_zero() {
        return Ok(VerificationReport::skipped(name, group, "0 divides S"));
    }
    let Ok(es) = extremal_set(s, davenport) else {
        return Ok(VerificationReport::skipped(name, group, "|S| < D - 1, E(S) undefined"));
    };
    if es.members != BTreeSet::from([group.zero()]) {
        return Ok(VerificationReport::skipped(name, group, "E(S) != {0}"));
    }
    let mz = minimal_zero_sums(s)?.with_davenport(davenport);
    let product = mz.minimals.iter().try_fold(Sequence::empty(group), |acc, t| acc.mul(t))?;
    let mut report = VerificationReport::new(name, group);
    report.examined = 1;
    if !mz.is_disjoint_decomposition() || product != *s {
        report.fail(format!("S = {s}: product of minimal zero-sums is {product}"));
    }
    Ok(report)
}

/// `a` lies in some nonempty zero-sum subsequence of `s`.
pub fn in_some_zero_sum(s: &Sequence, a: &GroupElement) -> bool {
    s.multiplicity(a) > 0 && {
        let rest = s.without(a).expect("a divides s");
        subsums(&rest).contains(&s.group().neg_unchecked(a))
    }
}

/// For `0 ∤ S`, `|S| ≥ D`, `0 ∈ E(S)` and `a` a term of a nonempty zero-sum
/// subsequence: `E(S) + {0, −a} ⊆ E(S·a^{−1})`.
pub fn check_es_chain(s: &Sequence, a: &GroupElement, davenport: u64) -> Result<VerificationReport> {
    let group = s.group();
    let name = "es-chain";
    if s.contains_zero() {
        return Ok(VerificationReport::skipped(name, group, "0 divides S"));
    }
    if s.len() < davenport {
        return Ok(VerificationReport::skipped(name, group, "|S| < D"));
    }
    if !in_some_zero_sum(s, a) {
        return Ok(VerificationReport::skipped(
            name,
            group,
            format!("{a} is not a term of a nonempty zero-sum subsequence"),
        ));
    }
    let es = extremal_set(s, davenport)?;
    if !es.contains(&group.zero()) {
        return Ok(VerificationReport::skipped(name, group, "0 not in E(S)"));
    }
    let smaller = extremal_set(&s.without(a)?, davenport)?;
    let mut report = VerificationReport::new(name, group);
    report.examined = 1;
    for e in &es.members {
        let shifted = group.sub(e, a)?;
        for x in [e, &shifted] {
            if !smaller.contains(x) {
                report.fail(format!("S = {s}, a = {a}: {x} in E(S) + {{0, -a}} but not in E(S a^-1)"));
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtremalSubgroups {
    /// Subgroups contained in `E(S)` (the trivial one included when `0 ∈ E(S)`),
    /// each with a flag marking the maximal ones.
    pub contained: Vec<(Subgroup, bool)>,
    pub report: VerificationReport,
}

/// Every subgroup inside `E(S)`; for each nontrivial one `H`, checks that `H`
/// is elementary abelian of exponent 2 and `D(G) = D(G/H) + rank(H)`.
pub fn max_subgroups_in_extremal_set(es: &ExtremalSet, davenport: u64) -> Result<ExtremalSubgroups> {
    let group = &es.group;
    let subgroups = group.all_subgroups()?;
    let inside: Vec<Subgroup> = subgroups.into_iter().filter(|h| h.is_contained_in(&es.members)).collect();
    let contained: Vec<(Subgroup, bool)> = inside
        .iter()
        .map(|h| {
            let maximal = !inside.iter().any(|k| k.order() > h.order() && h.is_subset_of(k));
            (h.clone(), maximal)
        })
        .collect();
    let mut report = VerificationReport::new("subgroup-es", group);
    for h in inside.iter().filter(|h| !h.is_trivial()) {
        report.examined += 1;
        let elementary = h.elements().iter().all(|x| x.is_zero() || group.order_of(x).ok() == Some(2));
        let rank = h.order().trailing_zeros() as u64;
        let quotient = group.quotient(h)?;
        let d_q = davenport_value(quotient.group())?;
        if !elementary || davenport != d_q + rank {
            report.fail(format!(
                "H = {:?} in E(S): elementary 2-group {elementary}, D(G) = {davenport}, D(G/H) + rank = {}",
                h.generators().iter().map(ToString::to_string).collect::<Vec<_>>(),
                d_q + rank
            ));
        }
    }
    Ok(ExtremalSubgroups { contained, report })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionProfile {
    pub group: Group,
    /// `D(G) ≥ D(G/H) + 2` for every subgroup `H ≅ C_2`.
    pub cond_iii: bool,
    pub t: u64,
    /// First order-two subgroup (canonical order) violating the inequality.
    pub offending_h: Option<Subgroup>,
}

pub fn condition_profile(group: &Group) -> Result<ConditionProfile> {
    let d = davenport_value(group)?;
    let mut offending_h = None;
    for h in group.order_two_subgroups() {
        let d_q = davenport_value(group.quotient(&h)?.group())?;
        if d < d_q + 2 {
            offending_h = Some(h);
            break;
        }
    }
    Ok(ConditionProfile { group: group.clone(), cond_iii: offending_h.is_none(), t: t_bound(group)?, offending_h })
}

/// For `H = {0, h}` with `D(G) = D(G/H) + 1`: a base `S` of length `D(G/H)`
/// whose image is a minimal zero-sum sequence over `G/H` and whose sum is `h`,
/// extended to `S·h^k`. Every member satisfies `N_0 = N_h = 2^{|S·h^k| − D + 1}`.
pub fn construct_unbounded_family(group: &Group, h: &Subgroup, k: u64) -> Result<Sequence> {
    if h.order() != 2 {
        return Err(Error::Precondition(format!("H must have order 2, got order {}", h.order())));
    }
    let gen = h.elements()[1].clone();
    let quotient = group.quotient(h)?;
    let d = davenport_value(group)?;
    let d_q = davenport_value(quotient.group())?;
    if d != d_q + 1 {
        return Err(Error::Precondition(format!(
            "needs D(G) = D(G/H) + 1, but D({group}) = {d} and D({}) = {d_q}",
            quotient.group()
        )));
    }
    let base = iterate_multisets(group, d_q as usize, false).find(|s| {
        s.sum() == gen && {
            let image = s.map_into(quotient.group(), |x| quotient.project(x));
            // minimal zero-sum: only the empty and the full subsequence sum to 0
            count_all(&image).zero_count() == &BigUint::from(2u32)
        }
    });
    let base = base.ok_or_else(|| {
        Error::ConstructionFailed(format!(
            "no base sequence of length {d_q} over {group} lifts a minimal zero-sum of G/H to {gen}"
        ))
    })?;
    let s = base.with(&gen, k)?;
    let counts = count_all(&s);
    let bound = extremal_bound(s.len(), d).expect("|S| >= D(G/H) = D(G) - 1");
    if counts.zero_count() != &bound || counts.get(&gen) != &bound {
        return Err(Error::ConstructionFailed(format!(
            "{s}: N_0 = {}, N_h = {}, expected {bound}",
            counts.zero_count(),
            counts.get(&gen)
        )));
    }
    Ok(s)
}

/// Over `C_n` with `n ≥ 3`: the extremal `0 ∤ S` are exactly `a^{n−1}` and
/// `a^n` for generators `a`. Sweeps every `0 ∤ S` up to `max_len`.
pub fn check_cyclic_characterization(n: u64, max_len: u64) -> Result<VerificationReport> {
    let group = Group::cyclic(n)?;
    let name = "cn";
    if n < 3 {
        return Ok(VerificationReport::skipped(name, &group, "the characterization needs n >= 3"));
    }
    if max_len < n + 1 {
        return Err(Error::Precondition(format!("max_len must be at least n + 1 = {}", n + 1)));
    }
    let mut report = VerificationReport::new(name, &group);
    let generators: Vec<GroupElement> = group.elements().into_iter().filter(|a| gcd(a.coords()[0], n) == 1).collect();
    let expected: BTreeSet<Sequence> = generators
        .iter()
        .flat_map(|a| [n - 1, n].map(|k| Sequence::from_terms(&group, [(a.clone(), k)]).expect("element of C_n")))
        .collect();
    let mut found = BTreeSet::new();
    for len in (n - 1)..=max_len {
        for s in iterate_multisets(&group, len as usize, true) {
            report.examined += 1;
            if is_extremal(&s, n) {
                found.insert(s);
            }
        }
    }
    report.metrics.insert("extremals".into(), found.len() as u64);
    report.metrics.insert("expected".into(), expected.len() as u64);
    for s in &found {
        report.witnesses.push(s.to_string());
    }
    if found != expected {
        report.verdict = crate::report::Verdict::Fail;
        for s in found.symmetric_difference(&expected) {
            report.note(format!("mismatch: {s}"));
        }
    }
    // N_0(a^{n+1}) ≥ 1 + C(n+1, n) > 4 for every generator a.
    let floor = BigUint::one() + BigUint::from(n + 1);
    for a in &generators {
        let s = Sequence::from_terms(&group, [(a.clone(), n + 1)])?;
        let c = count_all(&s).zero_count().clone();
        if c < floor || c <= BigUint::from(4u32) {
            report.fail(format!("N_0({s}) = {c} is below 1 + C(n+1, n) = {floor} or not above 4"));
        }
    }
    report.note(format!("N_0(a^(n+1)) >= 1 + C(n+1,n) = {floor} > 4 checked for {} generators", generators.len()));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(spec: &str) -> Group {
        spec.parse().unwrap()
    }

    fn seq(group: &Group, text: &str) -> Sequence {
        Sequence::parse(group, text).unwrap()
    }

    /// Brute-force oracle: all sub-multisets, filtered by the definition.
    fn brute_minimals(s: &Sequence) -> BTreeSet<Sequence> {
        let terms = s.terms();
        let mut out = BTreeSet::new();
        for mask in 1u32..(1 << terms.len()) {
            let t = Sequence::from_terms(
                s.group(),
                terms.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, x)| (x.clone(), 1)),
            )
            .unwrap();
            if !t.sum().is_zero() {
                continue;
            }
            let tt = t.terms();
            let proper_zero_sum = (1u32..(1 << tt.len()) - 1).any(|m| {
                let u = Sequence::from_terms(
                    s.group(),
                    tt.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, x)| (x.clone(), 1)),
                )
                .unwrap();
                u.sum().is_zero()
            });
            if !proper_zero_sum {
                out.insert(t);
            }
        }
        out
    }

    #[test]
    fn minimal_examples() {
        let c3 = g("C3");
        let r = minimal_zero_sums(&seq(&c3, "1^3")).unwrap();
        assert_eq!(r.minimals, vec![seq(&c3, "1^3")]);
        let v = g("C2xC2");
        let r = minimal_zero_sums(&seq(&v, "(1,0) (0,1) (1,1)")).unwrap();
        assert_eq!(r.minimals, vec![seq(&v, "(1,0) (0,1) (1,1)")]);
        assert!(minimal_zero_sums(&seq(&c3, "1^2")).unwrap().minimals.is_empty());
        let r = minimal_zero_sums(&seq(&c3, "1^2 2^2")).unwrap();
        assert_eq!(r.minimals, vec![seq(&c3, "1 2")]);
        assert_eq!(r.occurrences, vec![4]);
        assert!(matches!(minimal_zero_sums(&seq(&c3, "1^26")), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn minimal_matches_brute_force() {
        for spec in ["C3", "C4", "C2xC2", "C6", "C2xC4", "C3xC3"] {
            let group = g(spec);
            for len in 0..=6 {
                for s in iterate_multisets(&group, len, false).step_by(7) {
                    let got: BTreeSet<Sequence> = minimal_zero_sums(&s).unwrap().minimals.into_iter().collect();
                    assert_eq!(got, brute_minimals(&s), "{s}");
                }
            }
        }
    }

    #[test]
    fn odd_structure_examples() {
        let c3 = g("C3");
        assert!(check_odd_group_structure(&seq(&c3, "1^3"), 3).unwrap().passed());
        let c33 = g("C3xC3");
        let s = seq(&c33, "(1,0)^3 (0,1)^3");
        assert_eq!(count_all(&s).zero_count(), &BigUint::from(4u32));
        assert!(check_odd_group_structure(&s, 5).unwrap().passed());
        let r = minimal_zero_sums(&s).unwrap();
        assert_eq!(r.minimals, vec![seq(&c33, "(0,1)^3"), seq(&c33, "(1,0)^3")]);
        assert!(check_odd_group_structure(&seq(&c3, "1^2 2"), 3).unwrap().is_skipped());
        assert!(check_odd_group_structure(&seq(&g("C4"), "1^4"), 4).unwrap().is_skipped());
    }

    #[test]
    fn corollary_examples() {
        let c33 = g("C3xC3");
        assert!(check_corollary_decomposition(&seq(&c33, "(1,0)^3 (0,1)^3"), 5).unwrap().passed());
        assert!(check_corollary_decomposition(&seq(&g("C3"), "1^3"), 3).unwrap().passed());
        // E(1^2) = {0, 2}
        assert!(check_corollary_decomposition(&seq(&g("C3"), "1^2"), 3).unwrap().is_skipped());
    }

    #[test]
    fn es_chain_examples() {
        let c33 = g("C3xC3");
        let s = seq(&c33, "(1,0)^3 (0,1)^3");
        let e1 = c33.element(&[1, 0]).unwrap();
        assert!(check_es_chain(&s, &e1, 5).unwrap().passed());
        let rest = extremal_set(&s.without(&e1).unwrap(), 5).unwrap();
        assert!(rest.contains(&c33.zero()) && rest.contains(&c33.element(&[2, 0]).unwrap()));

        let c2 = g("C2");
        let one = c2.element(&[1]).unwrap();
        assert!(check_es_chain(&seq(&c2, "1^2"), &one, 2).unwrap().passed());

        let c3 = g("C3");
        // 1^2 is zero-sum free: 1 is in no nonempty zero-sum subsequence
        let r = check_es_chain(&seq(&c3, "1^2 2"), &c3.element(&[1]).unwrap(), 3).unwrap();
        assert!(r.passed() || r.is_skipped());
        let r = check_es_chain(&seq(&c33, "(1,0)^3 (0,1)"), &c33.element(&[0, 1]).unwrap(), 5).unwrap();
        assert!(r.is_skipped());
    }

    #[test]
    fn subgroups_in_extremal_sets() {
        let c2 = g("C2");
        let es = extremal_set(&seq(&c2, "1^3"), 2).unwrap();
        let r = max_subgroups_in_extremal_set(&es, 2).unwrap();
        assert!(r.report.passed());
        assert_eq!(r.report.examined, 1);
        assert_eq!(r.contained.iter().filter(|(_, m)| *m).count(), 1);

        let c3 = g("C3");
        let es = extremal_set(&seq(&c3, "1^3"), 3).unwrap();
        let r = max_subgroups_in_extremal_set(&es, 3).unwrap();
        assert_eq!(r.contained.len(), 1);
        assert!(r.contained[0].0.is_trivial());

        let es = extremal_set(&seq(&c3, "1^2"), 3).unwrap();
        let r = max_subgroups_in_extremal_set(&es, 3).unwrap();
        assert_eq!(r.contained.len(), 1);
        assert_eq!(r.report.examined, 0);
    }

    #[test]
    fn profiles() {
        assert!(condition_profile(&g("C3xC3")).unwrap().cond_iii);
        let p = condition_profile(&g("C2xC2")).unwrap();
        assert!(!p.cond_iii);
        assert!(p.offending_h.is_some());
        assert_eq!(p.t, 3 + 4 - 1);
        assert!(condition_profile(&g("C4")).unwrap().cond_iii);
        let p = condition_profile(&g("C2xC4")).unwrap();
        assert!(!p.cond_iii);
        assert_eq!(p.offending_h.unwrap().generators()[0], g("C2xC4").element(&[1, 0]).unwrap());
    }

    #[test]
    fn unbounded_families() {
        let v = g("C2xC2");
        let h = v.subgroup_closure(&[v.element(&[1, 1]).unwrap()]).unwrap();
        assert_eq!(construct_unbounded_family(&v, &h, 3).unwrap(), seq(&v, "(0,1) (1,0) (1,1)^3"));
        assert_eq!(construct_unbounded_family(&v, &h, 1).unwrap(), seq(&v, "(0,1) (1,0) (1,1)"));

        let c2 = g("C2");
        let h = c2.order_two_subgroups().remove(0);
        for k in 0..6 {
            assert_eq!(construct_unbounded_family(&c2, &h, k).unwrap().len(), 1 + k);
        }
        let c4 = g("C4");
        let h = c4.order_two_subgroups().remove(0);
        assert!(matches!(construct_unbounded_family(&c4, &h, 2), Err(Error::Precondition(_))));
        let trivial = c4.subgroup_closure(&[]).unwrap();
        assert!(matches!(construct_unbounded_family(&c4, &trivial, 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn cyclic_characterization() {
        let r = check_cyclic_characterization(3, 5).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.witnesses, ["1^2", "2^2", "1^3", "2^3"]);
        let r = check_cyclic_characterization(4, 8).unwrap();
        assert!(r.passed());
        assert_eq!(r.metrics["extremals"], 4);
        assert!(check_cyclic_characterization(2, 5).unwrap().is_skipped());
        assert!(check_cyclic_characterization(5, 5).is_err());
    }
}
