//! Sequences over a group: elements of the free abelian monoid `F(G)`,
//! stored as multiplicity maps.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::group::{Group, GroupElement};

/// A finite unordered sequence over a group.
///
/// Multiplicities are strictly positive; an absent key means multiplicity 0.
/// Counting treats equal terms as distinct occurrences.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sequence {
    group: Group,
    mult: BTreeMap<GroupElement, u64>,
}

impl Sequence {
    pub fn empty(group: &Group) -> Self {
        Sequence { group: group.clone(), mult: BTreeMap::new() }
    }

    /// Builds a sequence from `(element, multiplicity)` pairs; repeated
    /// elements accumulate and zero multiplicities are dropped.
    pub fn from_terms<I>(group: &Group, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (GroupElement, u64)>,
    {
        let mut s = Sequence::empty(group);
        for (g, m) in terms {
            if !group.contains(&g) {
                return Err(Error::ArityMismatch { expected: group.rank(), found: g.coords().len() });
            }
            if m > 0 {
                *s.mult.entry(g).or_insert(0) += m;
            }
        }
        Ok(s)
    }

    pub(crate) fn from_indices(group: &Group, indices: &[usize]) -> Self {
        let mut s = Sequence::empty(group);
        for &i in indices {
            *s.mult.entry(group.element_at(i)).or_insert(0) += 1;
        }
        s
    }

    /// Parses `empty` or space-separated terms `element(^k)?`.
    pub fn parse(group: &Group, text: &str) -> Result<Self> {
        let text = text.trim();
        if text.eq_ignore_ascii_case("empty") {
            return Ok(Sequence::empty(group));
        }
        let mut s = Sequence::empty(group);
        for term in tokenize(text)? {
            let (elem, m) = parse_term(group, &term)?;
            *s.mult.entry(elem).or_insert(0) += m;
        }
        Ok(s)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    /// `|S|`.
    pub fn len(&self) -> u64 {
        self.mult.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.mult.is_empty()
    }

    /// `υ_g(S)`.
    pub fn multiplicity(&self, g: &GroupElement) -> u64 {
        self.mult.get(g).copied().unwrap_or(0)
    }

    /// `(element, multiplicity)` in canonical element order.
    pub fn iter(&self) -> impl Iterator<Item = (&GroupElement, u64)> + '_ {
        self.mult.iter().map(|(g, &m)| (g, m))
    }

    pub fn support(&self) -> impl Iterator<Item = &GroupElement> + '_ {
        self.mult.keys()
    }

    /// Every occurrence, in canonical order (`1^2 2` gives `[1, 1, 2]`).
    pub fn terms(&self) -> Vec<GroupElement> {
        self.mult.iter().flat_map(|(g, &m)| std::iter::repeat_n(g.clone(), m as usize)).collect()
    }

    /// Canonical element indices of every occurrence, non-decreasing.
    #[cfg(test)]
    pub(crate) fn indices(&self) -> Vec<usize> {
        self.mult.iter().flat_map(|(g, &m)| std::iter::repeat_n(self.group.index_of(g), m as usize)).collect()
    }

    pub fn contains_zero(&self) -> bool {
        self.multiplicity(&self.group.zero()) > 0
    }

    /// `σ(S)`.
    pub fn sum(&self) -> GroupElement {
        let g = &self.group;
        self.mult.iter().fold(g.zero(), |acc, (x, &m)| {
            let scaled = g.scale(m as i64, x).expect("term belongs to group");
            g.add_unchecked(&acc, &scaled)
        })
    }

    fn same_group(&self, other: &Sequence) -> Result<()> {
        if self.group != other.group {
            return Err(Error::GroupMismatch { left: self.group.to_string(), right: other.group.to_string() });
        }
        Ok(())
    }

    /// `self | other`.
    pub fn divides(&self, other: &Sequence) -> Result<bool> {
        self.same_group(other)?;
        Ok(self.mult.iter().all(|(g, &m)| m <= other.multiplicity(g)))
    }

    /// `S·T`.
    pub fn mul(&self, other: &Sequence) -> Result<Sequence> {
        self.same_group(other)?;
        let mut out = self.clone();
        for (g, &m) in &other.mult {
            *out.mult.entry(g.clone()).or_insert(0) += m;
        }
        Ok(out)
    }

    /// `S·T^{-1}`; fails unless `T | S`.
    pub fn div(&self, other: &Sequence) -> Result<Sequence> {
        if !other.divides(self)? {
            return Err(Error::NotADivisor { divisor: other.to_string(), sequence: self.to_string() });
        }
        let mut out = self.clone();
        for (g, &m) in &other.mult {
            let left = out.mult[g] - m;
            if left == 0 {
                out.mult.remove(g);
            } else {
                out.mult.insert(g.clone(), left);
            }
        }
        Ok(out)
    }

    /// `-S`.
    pub fn neg(&self) -> Sequence {
        let mult = self.mult.iter().map(|(g, &m)| (self.group.neg_unchecked(g), m)).collect();
        Sequence { group: self.group.clone(), mult }
    }

    /// Pointwise-minimum gcd of a nonempty list of sequences over one group.
    pub fn gcd(seqs: &[Sequence]) -> Result<Sequence> {
        let (first, rest) =
            seqs.split_first().ok_or_else(|| Error::Undefined("gcd of an empty list of sequences".into()))?;
        let mut out = first.clone();
        for s in rest {
            out.same_group(s)?;
            out.mult = out
                .mult
                .iter()
                .filter_map(|(g, &m)| {
                    let k = m.min(s.multiplicity(g));
                    (k > 0).then(|| (g.clone(), k))
                })
                .collect();
        }
        Ok(out)
    }

    /// Appends `k` copies of `g`.
    pub fn with(&self, g: &GroupElement, k: u64) -> Result<Sequence> {
        Sequence::from_terms(&self.group, self.mult.iter().map(|(x, &m)| (x.clone(), m)).chain([(g.clone(), k)]))
    }

    /// Removes one occurrence of `g`.
    pub fn without(&self, g: &GroupElement) -> Result<Sequence> {
        let single = Sequence::from_terms(&self.group, [(g.clone(), 1)])?;
        self.div(&single)
    }

    /// Image of the sequence under an arbitrary map into `target`.
    pub fn map_into<F>(&self, target: &Group, f: F) -> Sequence
    where
        F: Fn(&GroupElement) -> GroupElement,
    {
        let mut out = Sequence::empty(target);
        for (g, &m) in &self.mult {
            *out.mult.entry(f(g)).or_insert(0) += m;
        }
        out
    }
}

fn tokenize(text: &str) -> Result<Vec<String>> {
    // Whitespace separates terms, except inside parentheses.
    let mut terms = Vec::new();
    let mut current = String::new();
    let mut depth = 0i32;
    for c in text.chars() {
        match c {
            '(' => {
                depth += 1;
                current.push(c);
            }
            ')' => {
                depth -= 1;
                current.push(c);
            }
            c if c.is_whitespace() && depth == 0 => {
                if !current.is_empty() {
                    terms.push(std::mem::take(&mut current));
                }
            }
            c if c.is_whitespace() => {}
            _ => current.push(c),
        }
        if depth < 0 {
            return Err(Error::MalformedTerm { term: text.to_string(), reason: "unbalanced `)`".into() });
        }
    }
    if depth != 0 {
        return Err(Error::MalformedTerm { term: text.to_string(), reason: "unbalanced `(`".into() });
    }
    if !current.is_empty() {
        terms.push(current);
    }
    if terms.is_empty() {
        return Err(Error::MalformedTerm { term: text.to_string(), reason: "no terms (use `empty`)".into() });
    }
    Ok(terms)
}

fn parse_term(group: &Group, term: &str) -> Result<(GroupElement, u64)> {
    let malformed = |reason: &str| Error::MalformedTerm { term: term.to_string(), reason: reason.to_string() };
    let (elem, exp) = match term.rsplit_once('^') {
        Some((e, k)) => {
            let k: u64 = k.parse().map_err(|_| malformed("exponent must be a positive integer"))?;
            if k == 0 {
                return Err(malformed("exponent must be a positive integer"));
            }
            (e, k)
        }
        None => (term, 1),
    };
    let parse_int = |s: &str| s.trim().parse::<i64>().map_err(|_| malformed("expected an integer coordinate"));
    let coords: Vec<i64> = if let Some(inner) = elem.strip_prefix('(') {
        let inner = inner.strip_suffix(')').ok_or_else(|| malformed("unterminated tuple"))?;
        inner.split(',').map(parse_int).collect::<Result<_>>()?
    } else {
        let x = parse_int(elem)?;
        match group.rank() {
            // the trivial group's only element
            0 => Vec::new(),
            1 => vec![x],
            r => return Err(Error::ArityMismatch { expected: r, found: 1 }),
        }
    };
    Ok((group.element(&coords)?, exp))
}

/// `empty`, or terms in canonical element order with `^k` for `k > 1`.
impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mult.is_empty() {
            return f.write_str("empty");
        }
        let parts: Vec<String> =
            self.mult.iter().map(|(g, &m)| if m == 1 { g.to_string() } else { format!("{g}^{m}") }).collect();
        f.write_str(&parts.join(" "))
    }
}

impl Serialize for Sequence {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl PartialOrd for Sequence {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortlex: by length, then by the sorted list of terms.
impl Ord for Sequence {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.group.cmp(&other.group))
            .then_with(|| self.terms().cmp(&other.terms()))
    }
}

/// Non-decreasing index vectors of a fixed length over `0..alphabet`, in
/// lexicographic order.
#[derive(Clone, Debug)]
pub(crate) struct MultisetIndices {
    alphabet: usize,
    current: Option<Vec<usize>>,
}

impl MultisetIndices {
    pub(crate) fn new(alphabet: usize, length: usize) -> Self {
        let current = (length == 0 || alphabet > 0).then(|| vec![0; length]);
        MultisetIndices { alphabet, current }
    }
}

impl Iterator for MultisetIndices {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let mut next = out.clone();
        if let Some(i) = next.iter().rposition(|&x| x + 1 < self.alphabet) {
            let v = next[i] + 1;
            for x in &mut next[i..] {
                *x = v;
            }
            self.current = Some(next);
        }
        Some(out)
    }
}

/// Every multiset of `length` terms over the group (optionally avoiding 0),
/// once each, in lexicographic order of the sorted term lists.
pub struct Multisets {
    group: Group,
    offset: usize,
    inner: MultisetIndices,
}

impl Iterator for Multisets {
    type Item = Sequence;

    fn next(&mut self) -> Option<Sequence> {
        let idx = self.inner.next()?;
        let shifted: Vec<usize> = idx.iter().map(|i| i + self.offset).collect();
        Some(Sequence::from_indices(&self.group, &shifted))
    }
}

pub fn iterate_multisets(group: &Group, length: usize, exclude_zero: bool) -> Multisets {
    let offset = usize::from(exclude_zero);
    let alphabet = group.order() as usize - offset;
    Multisets { group: group.clone(), offset, inner: MultisetIndices::new(alphabet, length) }
}

/// `multichoose(n, k) = C(n + k - 1, k)`, saturating at `u64::MAX`.
pub fn multichoose(n: u64, k: u64) -> u64 {
    if k == 0 {
        return 1;
    }
    if n == 0 {
        return 0;
    }
    let top = n + k - 1;
    let k = k.min(top - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(top - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return u64::MAX;
        }
    }
    acc as u64
}
