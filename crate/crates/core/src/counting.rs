//! Exact subsequence-sum counts `N_g(S)`, subsums, the extremal set `E(S)`,
//! and the checks built directly on them.
//!
//! The core recurrence appends one occurrence `a` at a time:
//! `N_g(S·a) = N_g(S) + N_{g−a}(S)`.

use std::collections::BTreeSet;
use std::ops::AddAssign;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Group, GroupElement, Subgroup};
use crate::report::VerificationReport;
use crate::sequence::Sequence;

/// Largest sequence accepted by [`count_brute`].
pub const BRUTE_FORCE_CAP: u64 = 25;

static NORMALIZATION_CHECKED: AtomicU64 = AtomicU64::new(0);
static NORMALIZATION_VIOLATED: AtomicU64 = AtomicU64::new(0);

/// Process-wide tally of `(vectors checked, vectors violating Σ_g N_g = 2^|S|)`.
///
/// Every count computed by this crate is audited as it is produced.
pub fn normalization_audit() -> (u64, u64) {
    (NORMALIZATION_CHECKED.load(Ordering::Relaxed), NORMALIZATION_VIOLATED.load(Ordering::Relaxed))
}

fn record_normalization(ok: bool) {
    NORMALIZATION_CHECKED.fetch_add(1, Ordering::Relaxed);
    if !ok {
        NORMALIZATION_VIOLATED.fetch_add(1, Ordering::Relaxed);
    }
}

/// `g ↦ N_g(S)` for every element of the group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountVector {
    group: Group,
    counts: Vec<BigUint>,
    source_length: u64,
}

impl CountVector {
    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn source_length(&self) -> u64 {
        self.source_length
    }

    pub fn get(&self, g: &GroupElement) -> &BigUint {
        &self.counts[self.group.index_of(g)]
    }

    pub fn zero_count(&self) -> &BigUint {
        &self.counts[0]
    }

    /// Counts indexed by canonical element position.
    pub fn as_slice(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn iter(&self) -> impl Iterator<Item = (GroupElement, &BigUint)> + '_ {
        self.counts.iter().enumerate().map(|(i, c)| (self.group.element_at(i), c))
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    /// `{g : N_g(S) > 0}`.
    pub fn support(&self) -> BTreeSet<GroupElement> {
        self.iter().filter(|(_, c)| !c.is_zero()).map(|(g, _)| g).collect()
    }
}

impl Serialize for CountVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.counts.len()))?;
        for (g, c) in self.iter() {
            map.serialize_entry(&g.to_string(), &c.to_string())?;
        }
        map.end()
    }
}

/// Runs the append recurrence over `steps`, where each step is a table
/// `shift[g] = index(g − a)` together with the multiplicity of `a`.
fn run_recurrence<T>(order: usize, steps: &[(Vec<usize>, u64)]) -> Vec<T>
where
    T: Clone + Zero + One + for<'a> AddAssign<&'a T>,
{
    let mut counts = vec![T::zero(); order];
    counts[0] = T::one();
    for (shift, mult) in steps {
        for _ in 0..*mult {
            let old = counts.clone();
            for (c, &src) in counts.iter_mut().zip(shift) {
                *c += &old[src];
            }
        }
    }
    counts
}

/// Exact `N_g(S)` for every `g`, in `O(|S|·|G|)` additions.
pub fn count_all(s: &Sequence) -> CountVector {
    let group = s.group();
    let order = group.order() as usize;
    let steps: Vec<(Vec<usize>, u64)> = s
        .iter()
        .map(|(a, m)| {
            let shift = (0..order)
                .map(|i| {
                    let g = group.element_at(i);
                    group.index_of(&group.add_unchecked(&g, &group.neg_unchecked(a)))
                })
                .collect();
            (shift, m)
        })
        .collect();
    let len = s.len();
    let counts: Vec<BigUint> = if len < 127 {
        run_recurrence::<u128>(order, &steps).into_iter().map(BigUint::from).collect()
    } else {
        run_recurrence::<BigUint>(order, &steps)
    };
    let total: BigUint = counts.iter().sum();
    record_normalization(total == BigUint::one() << len);
    CountVector { group: group.clone(), counts, source_length: len }
}

/// Literal enumeration of all `2^|S|` index subsets; the independent oracle
/// for [`count_all`].
pub fn count_brute(s: &Sequence, g: &GroupElement) -> Result<u64> {
    let len = s.len();
    if len > BRUTE_FORCE_CAP {
        return Err(Error::CapExceeded {
            what: "sequence length for brute-force counting",
            actual: len,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let group = s.group();
    let moduli = group.invariants();
    let owned = s.terms();
    let terms: Vec<&[u64]> = owned.iter().map(GroupElement::coords).collect();
    let target = g.coords();
    let mut hits = 0u64;
    let mut acc = vec![0u64; moduli.len()];
    for mask in 0u64..(1u64 << len) {
        acc.iter_mut().for_each(|x| *x = 0);
        for (i, t) in terms.iter().enumerate() {
            if mask >> i & 1 == 1 {
                for ((x, &c), &n) in acc.iter_mut().zip(t.iter()).zip(moduli) {
                    *x = (*x + c) % n;
                }
            }
        }
        if acc == target {
            hits += 1;
        }
    }
    Ok(hits)
}

/// `Σ•(S)`, by reachability: start from `{0}` and close under each term.
pub fn subsums(s: &Sequence) -> BTreeSet<GroupElement> {
    let group = s.group();
    let mut reach: BTreeSet<GroupElement> = BTreeSet::from([group.zero()]);
    for a in s.terms() {
        let shifted: Vec<GroupElement> = reach.iter().map(|x| group.add_unchecked(x, &a)).collect();
        reach.extend(shifted);
    }
    reach
}

/// `2^{|S| − D + 1}` when the exponent is nonnegative.
pub(crate) fn extremal_bound(len: u64, davenport: u64) -> Option<BigUint> {
    (len + 1 >= davenport).then(|| BigUint::one() << (len + 1 - davenport))
}

/// Checks `N_g(S) ≥ 2^{|S|−D+1}` for every `g ∈ Σ•(S)`.
pub fn check_lower_bound(s: &Sequence, davenport: u64) -> VerificationReport {
    let counts = count_all(s);
    check_lower_bound_counts(s, &counts, davenport)
}

pub(crate) fn check_lower_bound_counts(s: &Sequence, counts: &CountVector, davenport: u64) -> VerificationReport {
    let mut report = VerificationReport::new("lower-bound", s.group());
    report.examined = 1;
    // Below D−1 the bound is < 1 and any nonzero count meets it.
    let Some(bound) = extremal_bound(s.len(), davenport) else {
        return report;
    };
    for (g, c) in counts.iter() {
        if !c.is_zero() && *c < bound {
            report.fail(format!("S = {s}: N_{g} = {c} < {bound}"));
        }
    }
    report
}

/// `W = T·(−(S·T^{−1}))`, which satisfies `N_{σ(T)}(S) = N_0(W)`.
pub fn transform(s: &Sequence, t: &Sequence) -> Result<Sequence> {
    let rest = s.div(t)?;
    t.mul(&rest.neg())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtremalSet {
    pub group: Group,
    pub members: BTreeSet<GroupElement>,
    /// `|S| − D + 1`.
    pub bound_exponent: u64,
}

impl ExtremalSet {
    pub fn contains(&self, g: &GroupElement) -> bool {
        self.members.contains(g)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// `E(S) = {g : N_g(S) = 2^{|S|−D+1}}`; only defined for `|S| ≥ D − 1`.
pub fn extremal_set(s: &Sequence, davenport: u64) -> Result<ExtremalSet> {
    extremal_set_from_counts(&count_all(s), davenport)
}

pub fn extremal_set_from_counts(counts: &CountVector, davenport: u64) -> Result<ExtremalSet> {
    let len = counts.source_length();
    let bound = extremal_bound(len, davenport).ok_or_else(|| {
        Error::Undefined(format!("E(S) requires |S| >= D(G) - 1, got |S| = {len}, D(G) = {davenport}"))
    })?;
    let members = counts.iter().filter(|(_, c)| **c == bound).map(|(g, _)| g).collect();
    Ok(ExtremalSet { group: counts.group().clone(), members, bound_exponent: len + 1 - davenport })
}

/// If some `N_h(S)` attains the bound, every `N_g(S)` must reach it.
pub fn check_one_and_all(s: &Sequence, davenport: u64) -> VerificationReport {
    let counts = count_all(s);
    check_one_and_all_counts(s, &counts, davenport)
}

pub(crate) fn check_one_and_all_counts(s: &Sequence, counts: &CountVector, davenport: u64) -> VerificationReport {
    let mut report = VerificationReport::new("one-and-all", s.group());
    report.examined = 1;
    let Some(bound) = extremal_bound(s.len(), davenport) else {
        report.note("|S| < D(G) - 1: no count can equal the bound, hypothesis vacuous");
        return report;
    };
    if !counts.as_slice().contains(&bound) {
        report.note("E(S) is empty: hypothesis vacuous");
        return report;
    }
    for (g, c) in counts.iter() {
        if *c < bound {
            report.fail(format!("S = {s}: E(S) nonempty but N_{g} = {c} < {bound}"));
        }
    }
    report
}

/// Checks `Σ_{h∈H} N_h(S) = N_0(φ(S))` for the projection `φ: G → G/H`.
pub fn pushforward_counts(s: &Sequence, h: &Subgroup) -> Result<VerificationReport> {
    let group = s.group();
    let quotient = group.quotient(h)?;
    let counts = count_all(s);
    let left: BigUint = h.elements().iter().map(|x| counts.get(x)).sum();
    let projected = s.map_into(quotient.group(), |g| quotient.project(g));
    let right = count_all(&projected).zero_count().clone();
    let mut report = VerificationReport::new("pushforward", group);
    report.examined = 1;
    report.note(format!("sum over H of N_h(S) = {left}; N_0(phi(S)) over {} = {right}", quotient.group()));
    if left != right {
        report.fail(format!("S = {s}, H = {:?}: {left} != {right}", h.generators()));
    }
    Ok(report)
}

/// Index-level arithmetic table for small groups, used by the sweeps that
/// count hundreds of thousands of sequences over one group.
#[derive(Clone, Debug)]
pub(crate) struct Cayley {
    group: Group,
    order: usize,
    /// `diff[g * order + a] = index(g − a)`
    diff: Vec<usize>,
}

impl Cayley {
    pub(crate) fn new(group: &Group) -> Self {
        let order = group.order() as usize;
        let elems = group.elements();
        let neg: Vec<usize> = elems.iter().map(|a| group.index_of(&group.neg_unchecked(a))).collect();
        let mut diff = vec![0; order * order];
        for (gi, g) in elems.iter().enumerate() {
            for (ai, &na) in neg.iter().enumerate() {
                diff[gi * order + ai] = group.index_of(&group.add_unchecked(g, &elems[na]));
            }
        }
        Cayley { group: group.clone(), order, diff }
    }

    pub(crate) fn order(&self) -> usize {
        self.order
    }

    pub(crate) fn sub(&self, g: usize, a: usize) -> usize {
        self.diff[g * self.order + a]
    }

    /// `N_g` for every `g`, for the sequence whose occurrences are `indices`.
    /// Lengths up to 126 fit in `u128`.
    pub(crate) fn counts(&self, indices: &[usize]) -> Vec<u128> {
        assert!(indices.len() < 127, "sweep sequences are far below the u128 limit");
        let mut cur = vec![0u128; self.order];
        let mut next = vec![0u128; self.order];
        cur[0] = 1;
        for &a in indices {
            for (g, slot) in next.iter_mut().enumerate() {
                *slot = cur[g] + cur[self.sub(g, a)];
            }
            std::mem::swap(&mut cur, &mut next);
        }
        let total: u128 = cur.iter().sum();
        record_normalization(total == 1u128 << indices.len());
        cur
    }

    #[cfg(test)]
    pub(crate) fn count_vector(&self, indices: &[usize]) -> CountVector {
        self.wrap(self.counts(indices), indices.len() as u64)
    }

    /// Wraps counts already produced by [`Cayley::counts`].
    pub(crate) fn wrap(&self, counts: Vec<u128>, source_length: u64) -> CountVector {
        CountVector {
            group: self.group.clone(),
            counts: counts.into_iter().map(BigUint::from).collect(),
            source_length,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::iterate_multisets;
    use proptest::prelude::*;

    fn g(spec: &str) -> Group {
        spec.parse().unwrap()
    }

    fn seq(group: &Group, text: &str) -> Sequence {
        Sequence::parse(group, text).unwrap()
    }

    fn counts_u64(s: &Sequence) -> Vec<u64> {
        count_all(s).as_slice().iter().map(|c| u64::try_from(c).unwrap()).collect()
    }

    fn brute_all(s: &Sequence) -> Vec<u64> {
        s.group().elements().iter().map(|x| count_brute(s, x).unwrap()).collect()
    }

    #[test]
    fn frozen_counts() {
        let c3 = g("C3");
        // brute force over the 8 index subsets of 1,1,2
        assert_eq!(brute_all(&seq(&c3, "1^2 2")), vec![3, 3, 2]);
        assert_eq!(counts_u64(&seq(&c3, "1^2 2")), vec![3, 3, 2]);
        assert_eq!(counts_u64(&Sequence::empty(&g("C2xC4"))), vec![1, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(brute_all(&seq(&g("C2"), "1^4")), vec![8, 8]);
        assert_eq!(counts_u64(&seq(&g("C2"), "1^4")), vec![8, 8]);
    }

    #[test]
    fn brute_examples() {
        let c3 = g("C3");
        assert_eq!(count_brute(&seq(&c3, "1^3"), &c3.zero()).unwrap(), 2);
        assert_eq!(count_brute(&seq(&c3, "1^2"), &c3.element(&[1]).unwrap()).unwrap(), 2);
        let long = seq(&g("C2"), "1^26");
        assert!(matches!(count_brute(&long, &g("C2").zero()), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn exhaustive_oracle_c3_c4() {
        for spec in ["C3", "C4"] {
            let group = g(spec);
            for len in 0..=6 {
                for s in iterate_multisets(&group, len, false) {
                    assert_eq!(counts_u64(&s), brute_all(&s), "{s}");
                }
            }
        }
    }

    #[test]
    fn large_sequences_use_bigint() {
        let c2 = g("C2");
        let s = seq(&c2, "1^200");
        let c = count_all(&s);
        assert_eq!(c.zero_count(), &(BigUint::one() << 199));
        assert_eq!(c.total(), BigUint::one() << 200);
        // the u128 and BigUint paths agree at the boundary
        let s = seq(&c2, "1^126");
        assert_eq!(count_all(&s).zero_count(), &(BigUint::one() << 125));
    }

    #[test]
    fn subsum_sets() {
        let c3 = g("C3");
        assert_eq!(subsums(&Sequence::empty(&c3)), BTreeSet::from([c3.zero()]));
        assert_eq!(subsums(&seq(&c3, "1^2")).len(), 3);
        let v = g("C2xC2");
        assert_eq!(subsums(&seq(&v, "(1,0)")), BTreeSet::from([v.zero(), v.element(&[1, 0]).unwrap()]));
    }

    #[test]
    fn lower_bound_examples() {
        let c3 = g("C3");
        assert!(check_lower_bound(&seq(&c3, "1^2 2"), 3).passed());
        assert!(check_lower_bound(&seq(&c3, "1^2"), 3).passed());
        // 0 ∉ Σ•? never; but N_g = 0 is allowed outside Σ•
        assert!(check_lower_bound(&seq(&c3, "1"), 3).passed());
        // A fabricated wrong D must be caught.
        assert!(!check_lower_bound(&seq(&c3, "1^2 2"), 1).passed());
    }

    #[test]
    fn transform_examples() {
        let c3 = g("C3");
        let s = seq(&c3, "1^2 2");
        let w = transform(&s, &seq(&c3, "2")).unwrap();
        assert_eq!(w, seq(&c3, "2^3"));
        assert_eq!(count_brute(&w, &c3.zero()).unwrap(), 2);
        assert_eq!(count_brute(&s, &c3.element(&[2]).unwrap()).unwrap(), 2);

        assert_eq!(transform(&s, &Sequence::empty(&c3)).unwrap(), s.neg());
        let w = transform(&s, &s).unwrap();
        assert_eq!(w, s);
        assert_eq!(count_brute(&s, &s.sum()).unwrap(), 3);
        assert_eq!(count_brute(&s, &c3.zero()).unwrap(), 3);
        assert!(matches!(transform(&s, &seq(&c3, "2^2")), Err(Error::NotADivisor { .. })));
    }

    #[test]
    fn extremal_set_examples() {
        let c3 = g("C3");
        let members = |text: &str, d| extremal_set(&seq(&c3, text), d).unwrap().members;
        assert_eq!(members("1^3", 3), BTreeSet::from([c3.zero()]));
        assert_eq!(members("1^2", 3), BTreeSet::from([c3.zero(), c3.element(&[2]).unwrap()]));
        let c2 = g("C2");
        let e = extremal_set(&seq(&c2, "1^4"), 2).unwrap();
        assert_eq!(e.members.len(), 2);
        assert_eq!(e.bound_exponent, 3);
        assert!(matches!(extremal_set(&seq(&c3, "1"), 3), Err(Error::Undefined(_))));
    }

    #[test]
    fn one_and_all_examples() {
        assert!(check_one_and_all(&seq(&g("C3"), "1^3"), 3).passed());
        assert!(check_one_and_all(&seq(&g("C2"), "1^4"), 2).passed());
        // counts {3, 3, 2}, bound 2: E = {2}, every count reaches 2
        let r = check_one_and_all(&seq(&g("C3"), "1^2 2"), 3);
        assert!(r.passed() && r.notes.is_empty());
        // counts {2, 2, 0, 0} against bound 1: E empty
        let r = check_one_and_all(&seq(&g("C2xC2"), "(1,0)^2"), 3);
        assert!(r.passed());
        assert!(r.notes[0].contains("vacuous"));
        assert!(!check_one_and_all(&seq(&g("C2xC2"), "(1,0)"), 2).passed());
    }

    #[test]
    fn pushforward_examples() {
        let v = g("C2xC2");
        let s = seq(&v, "(1,0) (0,1)");
        let h = v.subgroup_closure(&[v.element(&[1, 1]).unwrap()]).unwrap();
        let r = pushforward_counts(&s, &h).unwrap();
        assert!(r.passed());
        assert!(r.notes[0].contains("= 2;"));
        assert!(pushforward_counts(&s, &v.subgroup_closure(&[]).unwrap()).unwrap().passed());
        assert!(pushforward_counts(&s, &v.subgroup_closure(&v.basis()).unwrap()).unwrap().passed());
        let c8 = g("C2xC4");
        let s = seq(&c8, "(1,1)^2 (0,3) (1,2)");
        for h in c8.all_subgroups().unwrap() {
            assert!(pushforward_counts(&s, &h).unwrap().passed());
        }
    }

    fn arb_small() -> impl Strategy<Value = Sequence> {
        let groups = ["C2", "C3", "C4", "C2xC2", "C5", "C6", "C7", "C8", "C2xC4", "C2xC2xC2"];
        (0..groups.len(), proptest::collection::vec(0usize..8, 0..=12)).prop_map(move |(gi, idx)| {
            let group = g(groups[gi]);
            let n = group.order() as usize;
            Sequence::from_terms(&group, idx.into_iter().map(|i| (group.element_at(i % n), 1))).unwrap()
        })
    }

    #[test]
    fn kernel_matches_count_all() {
        for spec in ["C1", "C2xC4", "C3xC3", "C7"] {
            let group = g(spec);
            let cayley = Cayley::new(&group);
            for len in 0..=4 {
                for s in iterate_multisets(&group, len, false) {
                    assert_eq!(cayley.count_vector(&s.indices()), count_all(&s));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn oracle_equivalence(s in arb_small()) {
            prop_assert_eq!(counts_u64(&s), brute_all(&s));
        }

        #[test]
        fn normalization_and_support(s in arb_small()) {
            let c = count_all(&s);
            prop_assert_eq!(c.total(), BigUint::one() << s.len());
            prop_assert!(c.zero_count() >= &BigUint::one());
            prop_assert_eq!(c.support(), subsums(&s));
        }

        #[test]
        fn zero_padding_doubles(s in arb_small()) {
            let z = s.group().zero();
            let padded = s.with(&z, 1).unwrap();
            let (a, b) = (count_all(&s), count_all(&padded));
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                prop_assert_eq!(x * 2u32, y.clone());
            }
        }

        #[test]
        fn append_law(s in arb_small(), pick in 0usize..8) {
            let group = s.group().clone();
            let a = group.element_at(pick % group.order() as usize);
            let before = count_all(&s);
            let after = count_all(&s.with(&a, 1).unwrap());
            for x in group.elements() {
                let prev = group.sub(&x, &a).unwrap();
                prop_assert_eq!(after.get(&x).clone(), before.get(&x) + before.get(&prev));
            }
        }

        #[test]
        fn transformation_identity(s in arb_small(), keep in proptest::collection::vec(any::<bool>(), 12)) {
            let terms = s.terms();
            let t = Sequence::from_terms(s.group(), terms.iter().zip(&keep).filter(|(_, &k)| k).map(|(x, _)| (x.clone(), 1))).unwrap();
            let w = transform(&s, &t).unwrap();
            prop_assert_eq!(w.len(), s.len());
            prop_assert_eq!(count_all(&s).get(&t.sum()).clone(), count_all(&w).zero_count().clone());
        }
    }
}
