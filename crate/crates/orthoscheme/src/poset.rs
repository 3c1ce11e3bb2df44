//! Finite posets and meet-semilattices.
//!
//! A [`Poset`] is built from cover pairs; the full order relation is the
//! reflexive-transitive closure of the covers, and antisymmetry is checked at
//! construction. A [`Semilattice`] wraps a poset together with a precomputed
//! meet table (and the partial join table for bounded pairs). The structural
//! predicates that drive everything downstream — locally distributive,
//! locally Boolean, flag — live here, each returning a concrete witness on
//! failure.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PosetError {
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("order relation has a cycle through `{0}` and `{1}`")]
    CycleDetected(String, String),
    #[error("pair (`{0}`, `{1}`) has no greatest lower bound")]
    NotASemilattice(String, String),
    #[error("the empty poset is not a semilattice")]
    EmptyPoset,
}

/// A finite partially ordered set over opaque string identifiers.
///
/// The declaration order of the elements is the canonical iteration order;
/// all witness selection elsewhere in the crate is lexicographically first in
/// this order, so results are reproducible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poset {
    elements: Vec<String>,
    index: BTreeMap<String, usize>,
    /// Dense `n*n` matrix of the full order relation: `leq[i*n + j]` iff
    /// element `i` is below element `j`.
    leq: Vec<bool>,
}

impl Poset {
    /// Builds a poset from declared elements and cover pairs `(lower, upper)`.
    ///
    /// The stored relation is the reflexive-transitive closure of the covers.
    /// Fails with [`PosetError::CycleDetected`] if the closure violates
    /// antisymmetry and [`PosetError::UnknownElement`] on dangling references.
    pub fn from_covers<S: AsRef<str>>(
        elements: &[S],
        covers: &[(S, S)],
    ) -> Result<Self, PosetError> {
        let mut index = BTreeMap::new();
        let mut names = Vec::with_capacity(elements.len());
        for e in elements {
            let name = e.as_ref().to_string();
            if index.insert(name.clone(), names.len()).is_some() {
                return Err(PosetError::DuplicateElement(name));
            }
            names.push(name);
        }
        let n = names.len();
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for (a, b) in covers {
            let i = *index
                .get(a.as_ref())
                .ok_or_else(|| PosetError::UnknownElement(a.as_ref().to_string()))?;
            let j = *index
                .get(b.as_ref())
                .ok_or_else(|| PosetError::UnknownElement(b.as_ref().to_string()))?;
            leq[i * n + j] = true;
        }
        // Warshall closure.
        for k in 0..n {
            for i in 0..n {
                if leq[i * n + k] {
                    for j in 0..n {
                        if leq[k * n + j] {
                            leq[i * n + j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if leq[i * n + j] && leq[j * n + i] {
                    return Err(PosetError::CycleDetected(
                        names[i].clone(),
                        names[j].clone(),
                    ));
                }
            }
        }
        Ok(Poset {
            elements: names,
            index,
            leq,
        })
    }

    /// The explicitly empty poset.
    pub fn empty() -> Self {
        Poset {
            elements: Vec::new(),
            index: BTreeMap::new(),
            leq: Vec::new(),
        }
    }

    /// Builds a poset directly from a full order relation given as a
    /// predicate on indices of `elements`. The relation must already be
    /// reflexive, antisymmetric and transitive.
    pub(crate) fn from_relation<F>(elements: Vec<String>, rel: F) -> Self
    where
        F: Fn(usize, usize) -> bool,
    {
        let n = elements.len();
        let mut index = BTreeMap::new();
        for (i, e) in elements.iter().enumerate() {
            index.insert(e.clone(), i);
        }
        let mut leq = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                leq[i * n + j] = i == j || rel(i, j);
            }
        }
        debug_assert!({
            let p = Poset {
                elements: elements.clone(),
                index: index.clone(),
                leq: leq.clone(),
            };
            p.relation_is_valid()
        });
        Poset {
            elements,
            index,
            leq,
        }
    }

    fn relation_is_valid(&self) -> bool {
        let n = self.len();
        for i in 0..n {
            if !self.leq_idx(i, i) {
                return false;
            }
            for j in 0..n {
                if i != j && self.leq_idx(i, j) && self.leq_idx(j, i) {
                    return false;
                }
                for k in 0..n {
                    if self.leq_idx(i, j) && self.leq_idx(j, k) && !self.leq_idx(i, k) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn index_of(&self, name: &str) -> Result<usize, PosetError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| PosetError::UnknownElement(name.to_string()))
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.elements[idx]
    }

    #[inline]
    pub fn leq_idx(&self, i: usize, j: usize) -> bool {
        self.leq[i * self.elements.len() + j]
    }

    #[inline]
    pub fn lt_idx(&self, i: usize, j: usize) -> bool {
        i != j && self.leq_idx(i, j)
    }

    pub fn leq(&self, a: &str, b: &str) -> Result<bool, PosetError> {
        Ok(self.leq_idx(self.index_of(a)?, self.index_of(b)?))
    }

    pub fn comparable_idx(&self, i: usize, j: usize) -> bool {
        self.leq_idx(i, j) || self.leq_idx(j, i)
    }

    /// Height of an element: the length of a longest chain in `P^{<=x}`.
    pub fn height_of(&self, name: &str) -> Result<usize, PosetError> {
        Ok(self.heights()[self.index_of(name)?])
    }

    /// Heights of all elements, indexed like `elements()`.
    pub fn heights(&self) -> Vec<usize> {
        let n = self.len();
        let mut h = vec![usize::MAX; n];
        // Longest strict chain ending at x, by recursion over the strict order.
        fn fill(p: &Poset, h: &mut Vec<usize>, x: usize) -> usize {
            if h[x] != usize::MAX {
                return h[x];
            }
            let mut best = 0;
            for y in 0..p.len() {
                if p.lt_idx(y, x) {
                    best = best.max(fill(p, h, y) + 1);
                }
            }
            h[x] = best;
            best
        }
        for x in 0..n {
            fill(self, &mut h, x);
        }
        h
    }

    /// Height of the whole poset (0 for a singleton; the empty poset has no
    /// chains, reported as 0 as well).
    pub fn height(&self) -> usize {
        self.heights().into_iter().max().unwrap_or(0)
    }

    /// Indices of the principal ideal `P^{<=x}` in canonical order.
    pub fn ideal_idx(&self, x: usize) -> Vec<usize> {
        (0..self.len()).filter(|&y| self.leq_idx(y, x)).collect()
    }

    /// Indices of the principal filter `P^{>=x}` in canonical order.
    pub fn filter_idx(&self, x: usize) -> Vec<usize> {
        (0..self.len()).filter(|&y| self.leq_idx(x, y)).collect()
    }

    pub fn minimal_elements_idx(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&x| (0..self.len()).all(|y| !self.lt_idx(y, x)))
            .collect()
    }

    pub fn maximal_elements_idx(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&x| (0..self.len()).all(|y| !self.lt_idx(x, y)))
            .collect()
    }

    /// Cover pairs `(lower, upper)`: the transitive reduction of the order.
    pub fn cover_pairs(&self) -> Vec<(String, String)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.lt_idx(i, j) && !(0..n).any(|k| self.lt_idx(i, k) && self.lt_idx(k, j)) {
                    out.push((self.elements[i].clone(), self.elements[j].clone()));
                }
            }
        }
        out
    }

    /// True when every element is reachable from every other through a
    /// zigzag of comparabilities.
    pub fn is_connected(&self) -> bool {
        let n = self.len();
        if n <= 1 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for y in 0..n {
                if !seen[y] && self.comparable_idx(x, y) {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.into_iter().all(|b| b)
    }

    /// All inclusion-maximal chains, each as an ascending list of indices.
    pub fn maximal_chains_idx(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut covers_up: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if self.lt_idx(i, j) && !(0..n).any(|k| self.lt_idx(i, k) && self.lt_idx(k, j)) {
                    covers_up[i].push(j);
                }
            }
        }
        let mut out = Vec::new();
        let mut chain = Vec::new();
        fn descend(
            covers_up: &[Vec<usize>],
            chain: &mut Vec<usize>,
            x: usize,
            out: &mut Vec<Vec<usize>>,
        ) {
            chain.push(x);
            if covers_up[x].is_empty() {
                out.push(chain.clone());
            } else {
                for &y in &covers_up[x] {
                    descend(covers_up, chain, y, out);
                }
            }
            chain.pop();
        }
        for x in self.minimal_elements_idx() {
            descend(&covers_up, &mut chain, x, &mut out);
        }
        out
    }

    /// The induced subposet on the given indices (kept in canonical order).
    pub fn induced(&self, keep: &[usize]) -> Poset {
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let elements: Vec<String> = keep.iter().map(|&i| self.elements[i].clone()).collect();
        Poset::from_relation(elements, |a, b| self.leq_idx(keep[a], keep[b]))
    }

    /// Checks that `chain` (by name) is strictly increasing in this poset.
    pub fn is_strict_chain(&self, chain: &[usize]) -> bool {
        chain.windows(2).all(|w| self.lt_idx(w[0], w[1]))
    }

    pub fn as_semilattice(&self) -> Result<Semilattice, PosetError> {
        Semilattice::from_poset(self.clone())
    }
}

/// A meet-semilattice: a poset in which every pair has a greatest lower
/// bound. Carries precomputed meet and partial join tables and the minimum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Semilattice {
    poset: Poset,
    meet: Vec<u32>,
    join: Vec<Option<u32>>,
    zero: usize,
}

impl Semilattice {
    /// Verifies the semilattice structure of `poset` and tabulates meets and
    /// bounded joins. Fails with a witness pair lacking a greatest lower
    /// bound.
    pub fn from_poset(poset: Poset) -> Result<Self, PosetError> {
        let n = poset.len();
        if n == 0 {
            return Err(PosetError::EmptyPoset);
        }
        let mut meet = vec![0u32; n * n];
        let mut join = vec![None; n * n];
        for i in 0..n {
            for j in 0..n {
                if j < i {
                    meet[i * n + j] = meet[j * n + i];
                    join[i * n + j] = join[j * n + i];
                    continue;
                }
                let lower: Vec<usize> = (0..n)
                    .filter(|&z| poset.leq_idx(z, i) && poset.leq_idx(z, j))
                    .collect();
                let glb = lower
                    .iter()
                    .copied()
                    .find(|&m| lower.iter().all(|&z| poset.leq_idx(z, m)));
                match glb {
                    Some(m) => meet[i * n + j] = m as u32,
                    None => {
                        return Err(PosetError::NotASemilattice(
                            poset.name(i).to_string(),
                            poset.name(j).to_string(),
                        ))
                    }
                }
                let upper: Vec<usize> = (0..n)
                    .filter(|&z| poset.leq_idx(i, z) && poset.leq_idx(j, z))
                    .collect();
                // In a semilattice the meet of all common upper bounds is
                // itself an upper bound, hence the least one.
                join[i * n + j] = upper
                    .iter()
                    .copied()
                    .find(|&u| upper.iter().all(|&z| poset.leq_idx(u, z)))
                    .map(|u| u as u32);
            }
        }
        let zero = (0..n)
            .find(|&z| (0..n).all(|x| poset.leq_idx(z, x)))
            .ok_or_else(|| {
                // Cannot happen once all meets exist; folding meet over all
                // elements produces a minimum. Kept as a defensive branch.
                PosetError::NotASemilattice(poset.name(0).to_string(), poset.name(0).to_string())
            })?;
        Ok(Semilattice {
            poset,
            meet,
            join,
            zero,
        })
    }

    pub fn poset(&self) -> &Poset {
        &self.poset
    }

    pub fn len(&self) -> usize {
        self.poset.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn zero_idx(&self) -> usize {
        self.zero
    }

    pub fn meet_idx(&self, i: usize, j: usize) -> usize {
        self.meet[i * self.poset.len() + j] as usize
    }

    /// Least upper bound of a bounded pair, `None` when the pair is
    /// unbounded above.
    pub fn join_idx(&self, i: usize, j: usize) -> Option<usize> {
        self.join[i * self.poset.len() + j].map(|u| u as usize)
    }

    pub fn meet(&self, a: &str, b: &str) -> Result<&str, PosetError> {
        let i = self.poset.index_of(a)?;
        let j = self.poset.index_of(b)?;
        Ok(self.poset.name(self.meet_idx(i, j)))
    }

    /// Least upper bound of `{a, b}` when the pair is bounded above.
    pub fn bounded_join(&self, a: &str, b: &str) -> Result<Option<&str>, PosetError> {
        let i = self.poset.index_of(a)?;
        let j = self.poset.index_of(b)?;
        Ok(self.join_idx(i, j).map(|u| self.poset.name(u)))
    }

    /// Join of an arbitrary bounded family; `None` if some partial join is
    /// unbounded. The empty join is the minimum.
    pub fn join_all_idx(&self, xs: &[usize]) -> Option<usize> {
        let mut acc = self.zero;
        for &x in xs {
            acc = self.join_idx(acc, x)?;
        }
        Some(acc)
    }

    /// True when `{x, y, z}` has a common upper bound.
    pub fn triple_bounded_idx(&self, x: usize, y: usize, z: usize) -> bool {
        self.join_idx(x, y)
            .and_then(|u| self.join_idx(u, z))
            .is_some()
    }

    /// First triple failing the distributive law inside a principal ideal,
    /// in canonical order, or `None` when every ideal is distributive.
    pub fn distributivity_witness(&self) -> Option<DistributivityWitness> {
        let n = self.len();
        for top in 0..n {
            let ideal = self.poset.ideal_idx(top);
            for &x in &ideal {
                for &y in &ideal {
                    for &z in &ideal {
                        // Joins inside the ideal agree with the global
                        // bounded joins; y, z <= top so y v z exists.
                        let yz = self.join_idx(y, z).expect("pair below top is bounded");
                        let lhs = self.meet_idx(x, yz);
                        let xy = self.meet_idx(x, y);
                        let xz = self.meet_idx(x, z);
                        let rhs = self.join_idx(xy, xz).expect("pair below top is bounded");
                        if lhs != rhs {
                            return Some(DistributivityWitness {
                                x: self.poset.name(x).to_string(),
                                y: self.poset.name(y).to_string(),
                                z: self.poset.name(z).to_string(),
                                ideal_top: self.poset.name(top).to_string(),
                            });
                        }
                    }
                }
            }
        }
        None
    }

    pub fn is_locally_distributive(&self) -> bool {
        self.distributivity_witness().is_none()
    }

    /// First failure of local Booleanness: either a distributivity failure
    /// or an element without a complement in some principal ideal.
    pub fn boolean_witness(&self) -> Option<BooleanWitness> {
        if let Some(w) = self.distributivity_witness() {
            return Some(BooleanWitness::NotDistributive(w));
        }
        let n = self.len();
        for top in 0..n {
            let ideal = self.poset.ideal_idx(top);
            for &y in &ideal {
                let complemented = ideal
                    .iter()
                    .any(|&z| self.meet_idx(y, z) == self.zero && self.join_idx(y, z) == Some(top));
                if !complemented {
                    return Some(BooleanWitness::MissingComplement {
                        element: self.poset.name(y).to_string(),
                        ideal_top: self.poset.name(top).to_string(),
                    });
                }
            }
        }
        None
    }

    pub fn is_locally_boolean(&self) -> bool {
        self.boolean_witness().is_none()
    }

    /// First pairwise-bounded but unbounded triple, in canonical order.
    pub fn flag_witness(&self) -> Option<FlagWitness> {
        let n = self.len();
        for x in 0..n {
            for y in (x + 1)..n {
                let Some(_) = self.join_idx(x, y) else {
                    continue;
                };
                for z in (y + 1)..n {
                    if self.join_idx(x, z).is_some()
                        && self.join_idx(y, z).is_some()
                        && !self.triple_bounded_idx(x, y, z)
                    {
                        return Some(FlagWitness {
                            x: self.poset.name(x).to_string(),
                            y: self.poset.name(y).to_string(),
                            z: self.poset.name(z).to_string(),
                        });
                    }
                }
            }
        }
        None
    }

    /// A flag semilattice: every pairwise bounded triple is bounded.
    pub fn is_flag(&self) -> bool {
        self.flag_witness().is_none()
    }

    /// True when `x` is join-irreducible: neither the minimum nor a join of
    /// two strictly smaller elements.
    pub fn is_irreducible_idx(&self, x: usize) -> bool {
        if x == self.zero {
            return false;
        }
        let below: Vec<usize> = (0..self.len())
            .filter(|&y| self.poset.lt_idx(y, x))
            .collect();
        !below
            .iter()
            .any(|&y| below.iter().any(|&z| self.join_idx(y, z) == Some(x)))
    }

    /// Indices of the join-irreducible elements, in canonical order.
    pub fn irreducible_indices(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&x| self.is_irreducible_idx(x))
            .collect()
    }

    /// The induced subposet `Irr S` of join-irreducible elements.
    pub fn irreducibles(&self) -> Poset {
        self.poset.induced(&self.irreducible_indices())
    }

    pub fn heights(&self) -> Vec<usize> {
        self.poset.heights()
    }

    pub fn height_of_idx(&self, x: usize) -> usize {
        self.poset.heights()[x]
    }
}

/// Failure of `x ∧ (y ∨ z) = (x ∧ y) ∨ (x ∧ z)` inside the principal ideal
/// below `ideal_top`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistributivityWitness {
    pub x: String,
    pub y: String,
    pub z: String,
    pub ideal_top: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BooleanWitness {
    NotDistributive(DistributivityWitness),
    MissingComplement { element: String, ideal_top: String },
}

/// A pairwise bounded triple with no common upper bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlagWitness {
    pub x: String,
    pub y: String,
    pub z: String,
}

/// Outcome of running every structural predicate against a poset.
///
/// Every `false` flag is backed by at least one witness; witnesses use
/// element names so they can be re-verified against the input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub is_semilattice: bool,
    pub is_locally_distributive: bool,
    pub is_locally_boolean: bool,
    pub is_flag: bool,
    pub witnesses: PropertyWitnesses,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PropertyWitnesses {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub not_a_semilattice: Option<(String, String)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub not_locally_distributive: Option<DistributivityWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub not_locally_boolean: Option<BooleanWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub not_flag: Option<FlagWitness>,
}

impl PropertyReport {
    /// Runs the four predicates. When the poset is not a semilattice the
    /// local predicates are reported `false` with the semilattice witness as
    /// the common cause.
    pub fn analyze(poset: &Poset) -> PropertyReport {
        match poset.as_semilattice() {
            Ok(s) => {
                let d = s.distributivity_witness();
                let b = s.boolean_witness();
                let f = s.flag_witness();
                PropertyReport {
                    is_semilattice: true,
                    is_locally_distributive: d.is_none(),
                    is_locally_boolean: b.is_none(),
                    is_flag: f.is_none(),
                    witnesses: PropertyWitnesses {
                        not_a_semilattice: None,
                        not_locally_distributive: d,
                        not_locally_boolean: b,
                        not_flag: f,
                    },
                }
            }
            Err(e) => {
                let pair = match e {
                    PosetError::NotASemilattice(a, b) => Some((a, b)),
                    _ => None,
                };
                PropertyReport {
                    is_semilattice: false,
                    is_locally_distributive: false,
                    is_locally_boolean: false,
                    is_flag: false,
                    witnesses: PropertyWitnesses {
                        not_a_semilattice: pair,
                        ..PropertyWitnesses::default()
                    },
                }
            }
        }
    }
}
