//! Finite abelian groups in invariant-factor form, their elements,
//! subgroups and quotients.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::snf::smith_normal_form;

/// Default ceiling on the group order for [`Group::all_subgroups`].
pub const SUBGROUP_ENUMERATION_CAP: u64 = 64;

/// A finite abelian group `C_{n_1} ⊕ … ⊕ C_{n_r}` with `2 <= n_1 | n_2 | … | n_r`.
///
/// The trivial group has no invariants.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Group {
    invariants: Vec<u64>,
}

/// An element of a [`Group`], stored as reduced residues.
///
/// Elements do not know which group they belong to; every operation takes the
/// group explicitly. The derived ordering is lexicographic on coordinates,
/// which is the canonical element order used throughout the crate.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GroupElement(Vec<u64>);

impl GroupElement {
    pub fn coords(&self) -> &[u64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl Group {
    /// Builds the canonical invariant-factor form of `C_{k_1} ⊕ … ⊕ C_{k_s}`.
    ///
    /// Any list of positive orders is accepted; the result is normalized via
    /// the Smith normal form of the diagonal relation matrix and factors of 1
    /// are dropped. An empty list (or all ones) gives the trivial group.
    pub fn new(orders: &[u64]) -> Result<Self> {
        if let Some(&bad) = orders.iter().find(|&&n| n == 0) {
            return Err(Error::InvalidModulus(bad));
        }
        let s = orders.len();
        let matrix: Vec<Vec<i128>> =
            (0..s).map(|i| (0..s).map(|j| if i == j { i128::from(orders[i]) } else { 0 }).collect()).collect();
        let invariants = smith_normal_form(&matrix)
            .diagonal
            .into_iter()
            .filter(|&d| d > 1)
            .map(|d| u64::try_from(d).expect("invariant factor fits u64"))
            .collect();
        Ok(Group { invariants })
    }

    pub fn trivial() -> Self {
        Group { invariants: Vec::new() }
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        Self::new(&[n])
    }

    pub fn invariants(&self) -> &[u64] {
        &self.invariants
    }

    pub fn rank(&self) -> usize {
        self.invariants.len()
    }

    pub fn order(&self) -> u64 {
        self.invariants.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.invariants.is_empty()
    }

    pub fn is_cyclic(&self) -> bool {
        self.rank() <= 1
    }

    /// True when the order is a prime power (the trivial group counts).
    pub fn is_p_group(&self) -> bool {
        let n = self.order();
        if n == 1 {
            return true;
        }
        let p = smallest_prime_factor(n);
        let mut m = n;
        while m % p == 0 {
            m /= p;
        }
        m == 1
    }

    /// `d*(G) = Σ (n_i − 1)`.
    pub fn d_star(&self) -> u64 {
        self.invariants.iter().map(|n| n - 1).sum()
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement(vec![0; self.rank()])
    }

    /// Builds an element from integer coordinates, reducing each into its modulus.
    pub fn element(&self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.rank() {
            return Err(Error::ArityMismatch { expected: self.rank(), found: coords.len() });
        }
        Ok(GroupElement(
            coords
                .iter()
                .zip(&self.invariants)
                .map(|(&c, &n)| (i128::from(c).rem_euclid(i128::from(n))) as u64)
                .collect(),
        ))
    }

    /// The standard generators `e_1, …, e_r`.
    pub fn basis(&self) -> Vec<GroupElement> {
        (0..self.rank())
            .map(|i| {
                let mut c = vec![0; self.rank()];
                c[i] = 1;
                GroupElement(c)
            })
            .collect()
    }

    pub fn contains(&self, a: &GroupElement) -> bool {
        a.0.len() == self.rank() && a.0.iter().zip(&self.invariants).all(|(c, n)| c < n)
    }

    fn check(&self, a: &GroupElement) -> Result<()> {
        if a.0.len() != self.rank() {
            return Err(Error::ArityMismatch { expected: self.rank(), found: a.0.len() });
        }
        Ok(())
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add_unchecked(a, b))
    }

    pub(crate) fn add_unchecked(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement(a.0.iter().zip(&b.0).zip(&self.invariants).map(|((x, y), n)| (x + y) % n).collect())
    }

    pub fn neg(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        Ok(self.neg_unchecked(a))
    }

    pub(crate) fn neg_unchecked(&self, a: &GroupElement) -> GroupElement {
        GroupElement(a.0.iter().zip(&self.invariants).map(|(x, n)| (n - x) % n).collect())
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.add(a, &self.neg(b)?)
    }

    /// `k · a` for any integer `k`.
    pub fn scale(&self, k: i64, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        Ok(GroupElement(
            a.0.iter()
                .zip(&self.invariants)
                .map(|(&x, &n)| {
                    let n = i128::from(n);
                    ((i128::from(k).rem_euclid(n) * i128::from(x)) % n) as u64
                })
                .collect(),
        ))
    }

    /// Least `k >= 1` with `k · a = 0`.
    pub fn order_of(&self, a: &GroupElement) -> Result<u64> {
        self.check(a)?;
        Ok(a.0.iter().zip(&self.invariants).map(|(&x, &n)| n / gcd(x, n)).fold(1, lcm))
    }

    /// Position of `a` in the canonical (lexicographic) element order.
    pub fn index_of(&self, a: &GroupElement) -> usize {
        a.0.iter().zip(&self.invariants).fold(0usize, |acc, (&x, &n)| acc * n as usize + x as usize)
    }

    /// Inverse of [`Group::index_of`].
    pub fn element_at(&self, mut index: usize) -> GroupElement {
        let mut coords = vec![0; self.rank()];
        for (c, &n) in coords.iter_mut().zip(&self.invariants).rev() {
            *c = (index % n as usize) as u64;
            index /= n as usize;
        }
        GroupElement(coords)
    }

    /// Every element in lexicographic coordinate order; the first is zero.
    pub fn elements(&self) -> Vec<GroupElement> {
        (0..self.order() as usize).map(|i| self.element_at(i)).collect()
    }

    /// One subgroup `{0, h}` per element `h` of order two, in canonical order.
    pub fn order_two_subgroups(&self) -> Vec<Subgroup> {
        self.elements()
            .into_iter()
            .filter(|h| self.order_of(h).ok() == Some(2))
            .map(|h| {
                let zero = self.zero();
                Subgroup { generators: vec![h.clone()], elements: vec![zero, h] }
            })
            .collect()
    }

    /// Smallest subgroup containing `gens`.
    pub fn subgroup_closure(&self, gens: &[GroupElement]) -> Result<Subgroup> {
        for g in gens {
            if !self.contains(g) {
                return Err(Error::NotASubgroup(self.to_string()));
            }
        }
        let mut seen: HashSet<GroupElement> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(self.zero());
        queue.push_back(self.zero());
        while let Some(x) = queue.pop_front() {
            for g in gens {
                let y = self.add_unchecked(&x, g);
                if seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        let mut elements: Vec<GroupElement> = seen.into_iter().collect();
        elements.sort();
        Ok(Subgroup { generators: gens.to_vec(), elements })
    }

    /// Every subgroup exactly once, ordered by (order, element list).
    ///
    /// Built from the cyclic subgroups by joining pairs until nothing new appears.
    pub fn all_subgroups(&self) -> Result<Vec<Subgroup>> {
        self.all_subgroups_with_cap(SUBGROUP_ENUMERATION_CAP)
    }

    pub fn all_subgroups_with_cap(&self, cap: u64) -> Result<Vec<Subgroup>> {
        if self.order() > cap {
            return Err(Error::CapExceeded { what: "group order for subgroup enumeration", actual: self.order(), cap });
        }
        let mut found: Vec<Subgroup> = Vec::new();
        let mut keys: HashSet<Vec<GroupElement>> = HashSet::new();
        for g in self.elements() {
            let h = self.subgroup_closure(std::slice::from_ref(&g))?;
            if keys.insert(h.elements.clone()) {
                found.push(h);
            }
        }
        let cyclic = found.clone();
        let mut frontier = found.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for h in &frontier {
                for c in &cyclic {
                    if c.is_subset_of(h) {
                        continue;
                    }
                    let mut gens = h.generators.clone();
                    gens.extend(c.generators.iter().cloned());
                    let joined = self.subgroup_closure(&gens)?;
                    if keys.insert(joined.elements.clone()) {
                        next.push(joined.clone());
                        found.push(joined);
                    }
                }
            }
            frontier = next;
        }
        found.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.elements.cmp(&b.elements)));
        Ok(found)
    }

    /// `G/H` together with the canonical projection.
    ///
    /// The invariant factors come from the Smith normal form of the relation
    /// matrix `[diag(n_1 … n_r) | generators of H]`.
    pub fn quotient(&self, h: &Subgroup) -> Result<Quotient> {
        if !h.elements.iter().all(|x| self.contains(x)) || !h.is_closed(self) {
            return Err(Error::NotASubgroup(self.to_string()));
        }
        let r = self.rank();
        let matrix: Vec<Vec<i128>> = (0..r)
            .map(|i| {
                let mut row: Vec<i128> =
                    (0..r).map(|j| if i == j { i128::from(self.invariants[i]) } else { 0 }).collect();
                row.extend(h.generators.iter().map(|g| i128::from(g.0[i])));
                row
            })
            .collect();
        let snf = smith_normal_form(&matrix);
        let mut rows = Vec::new();
        let mut moduli = Vec::new();
        for (i, &d) in snf.diagonal.iter().enumerate() {
            if d > 1 {
                rows.push(snf.left[i].clone());
                moduli.push(d as u64);
            }
        }
        let target = Group { invariants: moduli };
        debug_assert_eq!(target.order() * h.order() as u64, self.order());
        Ok(Quotient { source: self.clone(), target, rows })
    }
}

/// A subgroup given by generators and its full (sorted) element list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Subgroup {
    generators: Vec<GroupElement>,
    elements: Vec<GroupElement>,
}

impl Subgroup {
    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    pub fn contains(&self, a: &GroupElement) -> bool {
        self.elements.binary_search(a).is_ok()
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.elements.iter().all(|x| other.contains(x))
    }

    /// Closed under addition and containing zero (negation follows by finiteness).
    pub fn is_closed(&self, group: &Group) -> bool {
        self.contains(&group.zero())
            && self.elements.iter().all(|a| self.elements.iter().all(|b| self.contains(&group.add_unchecked(a, b))))
    }

    /// Isomorphism type of the subgroup as an abstract group.
    ///
    /// For each prime `p`, the number of cyclic factors of order at least
    /// `p^k` is `log_p(|H[p^k]| / |H[p^(k-1)]|)`, where `H[m]` is the `m`-torsion.
    pub fn structure(&self, group: &Group) -> Group {
        let n = self.order() as u64;
        let mut factors = Vec::new();
        let mut rest = n;
        let mut p = 2;
        while rest > 1 {
            if rest % p != 0 {
                p += 1;
                continue;
            }
            let mut pk = 1;
            while rest % p == 0 {
                rest /= p;
                pk *= p;
            }
            // counts[k] = number of cyclic p-factors of order >= p^k
            let torsion = |m: u64| {
                self.elements.iter().filter(|a| m % group.order_of(a).expect("element of group") == 0).count() as u64
            };
            let mut at_least = Vec::new();
            let mut prev = 1;
            let mut q = p;
            while q <= pk {
                let t = torsion(q);
                let mut ratio = t / prev;
                let mut c = 0;
                while ratio > 1 {
                    ratio /= p;
                    c += 1;
                }
                at_least.push(c);
                prev = t;
                q *= p;
            }
            for (k, &c) in at_least.iter().enumerate() {
                let exactly = c - at_least.get(k + 1).copied().unwrap_or(0);
                for _ in 0..exactly {
                    factors.push(p.pow(k as u32 + 1));
                }
            }
        }
        Group::new(&factors).expect("prime powers are valid orders")
    }

    /// True iff every element of the subgroup lies in `set`.
    pub fn is_contained_in(&self, set: &BTreeSet<GroupElement>) -> bool {
        self.elements.iter().all(|x| set.contains(x))
    }
}

/// The quotient `G/H` with its projection map.
#[derive(Clone, Debug)]
pub struct Quotient {
    source: Group,
    target: Group,
    rows: Vec<Vec<i128>>,
}

impl Quotient {
    pub fn group(&self) -> &Group {
        &self.target
    }

    pub fn source(&self) -> &Group {
        &self.source
    }

    /// Image of `a` under the canonical map `G → G/H`.
    pub fn project(&self, a: &GroupElement) -> GroupElement {
        GroupElement(
            self.rows
                .iter()
                .zip(self.target.invariants())
                .map(|(row, &d)| {
                    let v: i128 = row.iter().zip(&a.0).map(|(&u, &x)| u * i128::from(x)).sum();
                    v.rem_euclid(i128::from(d)) as u64
                })
                .collect(),
        )
    }
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn smallest_prime_factor(n: u64) -> u64 {
    (2..).take_while(|p| p * p <= n).find(|p| n % p == 0).unwrap_or(n)
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.invariants.is_empty() {
            return f.write_str("C1");
        }
        let parts: Vec<String> = self.invariants.iter().map(|n| format!("C{n}")).collect();
        f.write_str(&parts.join("x"))
    }
}

/// Parses `C<n>(xC<n>)*`, case-insensitively and ignoring whitespace.
impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
        let bad = || Error::InvalidGroup(s.to_string());
        if compact.is_empty() {
            return Err(bad());
        }
        let orders = compact
            .split('x')
            .map(|part| {
                let digits = part.strip_prefix('c').ok_or_else(bad)?;
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(bad());
                }
                digits.parse::<u64>().map_err(|_| bad())
            })
            .collect::<Result<Vec<u64>>>()?;
        Group::new(&orders)
    }
}

/// Rank-one elements print as a bare integer, the trivial element as `0`,
/// everything else as a tuple.
impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.as_slice() {
            [] => f.write_str("0"),
            [x] => write!(f, "{x}"),
            cs => {
                let parts: Vec<String> = cs.iter().map(u64::to_string).collect();
                write!(f, "({})", parts.join(","))
            }
        }
    }
}
