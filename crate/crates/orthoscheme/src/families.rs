//! Generators for the poset families used by the CLI and the test corpus:
//! Boolean lattices, chains, divisor lattices, the M3 diamond, face posets of
//! small complexes, noncrossing partition lattices, down-set lattices, and
//! seeded random distributive semilattices.

use std::collections::BTreeSet;

use crate::poset::{Poset, Semilattice};
use crate::rng::Xoshiro256;

/// Boolean lattice `2^{1..n}`. Elements are named by the juxtaposed member
/// digits ("" is named `0`), e.g. `0, 1, 2, 12` for `n = 2`.
pub fn boolean_lattice(n: usize) -> Poset {
    assert!(n <= 9, "boolean_lattice supports n <= 9");
    let mut names = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        names.push(subset_name(mask));
    }
    Poset::from_relation(names, |a, b| (a as u32) & (b as u32) == a as u32)
}

fn subset_name(mask: u32) -> String {
    if mask == 0 {
        return "0".to_string();
    }
    let mut s = String::new();
    for bit in 0..9 {
        if mask & (1 << bit) != 0 {
            s.push(char::from_digit(bit + 1, 10).unwrap());
        }
    }
    s
}

/// The chain `c0 < c1 < ... < c{n-1}`.
pub fn chain(n: usize) -> Poset {
    let names: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
    Poset::from_relation(names, |a, b| a <= b)
}

/// Divisors of `n` ordered by divisibility.
pub fn divisor_lattice(n: u64) -> Poset {
    assert!(n >= 1);
    let divs: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
    let names: Vec<String> = divs.iter().map(|d| d.to_string()).collect();
    Poset::from_relation(names, |a, b| divs[b] % divs[a] == 0)
}

/// The diamond M3: bottom, three incomparable atoms, top. The smallest
/// modular non-distributive lattice.
pub fn diamond_m3() -> Poset {
    Poset::from_covers(
        &["0", "a", "b", "c", "1"],
        &[
            ("0", "a"),
            ("0", "b"),
            ("0", "c"),
            ("a", "1"),
            ("b", "1"),
            ("c", "1"),
        ],
    )
    .unwrap()
}

/// Face poset of the hollow triangle on `{a, b, c}` (all proper faces, no
/// top cell), including the empty face as minimum.
pub fn empty_triangle_face_poset() -> Poset {
    Poset::from_covers(
        &["{}", "{a}", "{b}", "{c}", "{a,b}", "{a,c}", "{b,c}"],
        &[
            ("{}", "{a}"),
            ("{}", "{b}"),
            ("{}", "{c}"),
            ("{a}", "{a,b}"),
            ("{a}", "{a,c}"),
            ("{b}", "{a,b}"),
            ("{b}", "{b,c}"),
            ("{c}", "{a,c}"),
            ("{c}", "{b,c}"),
        ],
    )
    .unwrap()
}

/// A set partition of `{1..n}` stored as sorted blocks of sorted members.
type Partition = Vec<Vec<u8>>;

fn partitions(n: u8) -> Vec<Partition> {
    // Restricted-growth enumeration, then blocks sorted by least member.
    let mut out = Vec::new();
    let mut assign = vec![0u8; n as usize];
    fn go(n: u8, i: u8, max_used: u8, assign: &mut Vec<u8>, out: &mut Vec<Partition>) {
        if i == n {
            let blocks = max_used + 1;
            let mut part: Partition = vec![Vec::new(); blocks as usize];
            for (elt, &b) in assign.iter().enumerate() {
                part[b as usize].push(elt as u8 + 1);
            }
            part.sort();
            out.push(part);
            return;
        }
        for b in 0..=max_used + 1 {
            assign[i as usize] = b;
            go(n, i + 1, max_used.max(b), assign, out);
        }
    }
    if n == 0 {
        return vec![Vec::new()];
    }
    assign[0] = 0;
    go(n, 1, 0, &mut assign, &mut out);
    out
}

fn is_noncrossing(p: &Partition) -> bool {
    // A crossing is a < b < c < d with a, c in one block and b, d in another.
    for (i, bi) in p.iter().enumerate() {
        for (j, bj) in p.iter().enumerate() {
            if i == j {
                continue;
            }
            // Consecutive members of a block suffice to detect crossings.
            for w in bi.windows(2) {
                let (a, c) = (w[0], w[1]);
                if bj.iter().any(|&b| a < b && b < c) && bj.iter().any(|&d| d > c || d < a) {
                    return false;
                }
            }
        }
    }
    true
}

fn refines(p: &Partition, q: &Partition) -> bool {
    p.iter()
        .all(|bp| q.iter().any(|bq| bp.iter().all(|x| bq.contains(x))))
}

fn partition_name(p: &Partition) -> String {
    let blocks: Vec<String> = p
        .iter()
        .map(|b| b.iter().map(|x| x.to_string()).collect::<String>())
        .collect();
    blocks.join("|")
}

/// The lattice `NPC_n` of noncrossing partitions of `{1..n}` under
/// refinement (finer below coarser). Supports `1 <= n <= 9`.
pub fn noncrossing_partition_lattice(n: u8) -> Poset {
    assert!(
        (1..=9).contains(&n),
        "noncrossing_partition_lattice supports 1 <= n <= 9"
    );
    let parts: Vec<Partition> = partitions(n).into_iter().filter(is_noncrossing).collect();
    let names: Vec<String> = parts.iter().map(partition_name).collect();
    Poset::from_relation(names, |a, b| refines(&parts[a], &parts[b]))
}

/// The lattice of down sets of `base`, ordered by inclusion. Distributive by
/// Birkhoff's theorem. Element names juxtapose the member names separated by
/// `+` (the empty down set is named `0`).
pub fn down_set_lattice(base: &Poset) -> Poset {
    let n = base.len();
    assert!(
        n <= 16,
        "down_set_lattice supports base posets with <= 16 elements"
    );
    let mut downs: Vec<u32> = Vec::new();
    'mask: for mask in 0u32..(1 << n) {
        for x in 0..n {
            if mask & (1 << x) != 0 {
                for y in 0..n {
                    if base.leq_idx(y, x) && mask & (1 << y) == 0 {
                        continue 'mask;
                    }
                }
            }
        }
        downs.push(mask);
    }
    let names: Vec<String> = downs.iter().map(|&m| down_set_name(base, m)).collect();
    Poset::from_relation(names, |a, b| downs[a] & downs[b] == downs[a])
}

fn down_set_name(base: &Poset, mask: u32) -> String {
    if mask == 0 {
        return "0".to_string();
    }
    let members: Vec<&str> = (0..base.len())
        .filter(|&i| mask & (1 << i) != 0)
        .map(|i| base.name(i))
        .collect();
    members.join("+")
}

/// All labeled posets on `n` elements (`n <= 5`), as full strict relations.
/// Element names are `p0..p{n-1}`.
pub fn all_posets(n: usize) -> Vec<Poset> {
    assert!(n <= 5, "all_posets supports n <= 5");
    let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    if n == 0 {
        return vec![Poset::empty()];
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let m = pairs.len();
    let mut out = Vec::new();
    'mask: for mask in 0u64..(1 << m) {
        let rel = |i: usize, j: usize| -> bool {
            i == j
                || pairs
                    .iter()
                    .enumerate()
                    .any(|(k, &p)| p == (i, j) && mask & (1 << k) != 0)
        };
        for i in 0..n {
            for j in 0..n {
                if i != j && rel(i, j) && rel(j, i) {
                    continue 'mask;
                }
                for k in 0..n {
                    if rel(i, j) && rel(j, k) && !rel(i, k) {
                        continue 'mask;
                    }
                }
            }
        }
        out.push(Poset::from_relation(names.clone(), |a, b| rel(a, b)));
    }
    out
}

/// A seeded random poset on `n` elements: a random DAG of edge density
/// `density`, transitively closed.
pub fn random_poset(n: usize, density: f64, rng: &mut Xoshiro256) -> Poset {
    let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let mut covers = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.f64() < density {
                covers.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    let cover_refs: Vec<(&str, &str)> = covers
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    Poset::from_covers(&name_refs, &cover_refs).expect("edges go upward, no cycles")
}

/// A seeded random locally distributive semilattice with at most
/// `max_size` elements: a random down-closed subset of the down-set lattice
/// of a random poset. Always contains the bottom.
pub fn random_distributive_semilattice(max_size: usize, rng: &mut Xoshiro256) -> Semilattice {
    assert!(max_size >= 1);
    loop {
        let base_n = 1 + rng.usize_below(4);
        let base = random_poset(base_n, 0.4, rng);
        let lattice = down_set_lattice(&base);
        let n = lattice.len();
        // Random down set of the lattice: union of random principal ideals.
        let mut keep: BTreeSet<usize> = BTreeSet::new();
        keep.insert(lattice.index_of("0").unwrap());
        for x in 0..n {
            if rng.f64() < 0.55 {
                for y in lattice.ideal_idx(x) {
                    keep.insert(y);
                }
            }
        }
        // Trim maximal elements until the size bound holds.
        while keep.len() > max_size {
            let maximal: Vec<usize> = keep
                .iter()
                .copied()
                .filter(|&x| keep.iter().all(|&y| !lattice.lt_idx(x, y)))
                .collect();
            let victim = maximal[rng.usize_below(maximal.len())];
            keep.remove(&victim);
        }
        let keep: Vec<usize> = keep.into_iter().collect();
        let sub = lattice.induced(&keep);
        match sub.as_semilattice() {
            Ok(s) => {
                debug_assert!(s.is_locally_distributive());
                return s;
            }
            Err(_) => continue,
        }
    }
}

/// Face poset of a seeded random non-flag complex on up to five vertices:
/// locally Boolean (hence locally distributive) but not a flag semilattice.
pub fn random_nonflag_face_semilattice(rng: &mut Xoshiro256) -> Semilattice {
    use crate::simplicial::SimplicialComplex;
    let names = ["a", "b", "c", "d", "e"];
    loop {
        let n = 4 + rng.usize_below(2);
        let mut facets: Vec<Vec<&str>> = Vec::new();
        for _ in 0..(3 + rng.usize_below(4)) {
            let size = 1 + rng.usize_below(3);
            let mut f = Vec::new();
            for _ in 0..size {
                let v = names[rng.usize_below(n)];
                if !f.contains(&v) {
                    f.push(v);
                }
            }
            facets.push(f);
        }
        let k = SimplicialComplex::from_facets(&facets);
        if k.is_void() || k.is_flag() {
            continue;
        }
        let s = k.face_poset().expect("non-void").into_semilattice();
        debug_assert!(s.is_locally_boolean() && !s.is_flag());
        return s;
    }
}

/// A small deterministic corpus of semilattices exercised by exhaustive
/// axiom tests: the named families plus seeded random distributive ones.
pub fn small_semilattice_corpus() -> Vec<Semilattice> {
    let mut out = vec![
        boolean_lattice(1).as_semilattice().unwrap(),
        boolean_lattice(2).as_semilattice().unwrap(),
        boolean_lattice(3).as_semilattice().unwrap(),
        chain(1).as_semilattice().unwrap(),
        chain(4).as_semilattice().unwrap(),
        divisor_lattice(12).as_semilattice().unwrap(),
        divisor_lattice(30).as_semilattice().unwrap(),
        diamond_m3().as_semilattice().unwrap(),
        empty_triangle_face_poset().as_semilattice().unwrap(),
        noncrossing_partition_lattice(3).as_semilattice().unwrap(),
        noncrossing_partition_lattice(4).as_semilattice().unwrap(),
    ];
    let mut rng = Xoshiro256::seed_from_u64(7);
    for _ in 0..10 {
        out.push(random_distributive_semilattice(12, &mut rng));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boolean_sizes() {
        assert_eq!(boolean_lattice(2).len(), 4);
        assert_eq!(boolean_lattice(3).len(), 8);
    }

    #[test]
    fn ncp3_is_the_five_element_diamondish_lattice() {
        let p = noncrossing_partition_lattice(3);
        assert_eq!(p.len(), 5);
        assert_eq!(p.minimal_elements_idx().len(), 1);
        assert_eq!(p.maximal_elements_idx().len(), 1);
        // Three atoms.
        let heights = p.heights();
        assert_eq!(heights.iter().filter(|&&h| h == 1).count(), 3);
    }

    #[test]
    fn ncp4_has_catalan_many_elements() {
        let p = noncrossing_partition_lattice(4);
        assert_eq!(p.len(), 14); // Catalan(4)
        let s = p.as_semilattice().unwrap();
        assert!(s.is_flag());
        assert!(!s.is_locally_distributive());
    }

    #[test]
    fn ncp5_count() {
        assert_eq!(noncrossing_partition_lattice(5).len(), 42); // Catalan(5)
    }

    #[test]
    fn crossing_partition_is_excluded() {
        let p = noncrossing_partition_lattice(4);
        assert!(!p.contains("13|24"));
        assert!(p.contains("12|34"));
        assert!(p.contains("14|23"));
    }

    #[test]
    fn down_set_lattice_of_antichain_is_boolean() {
        let base = Poset::from_covers::<&str>(&["x", "y"], &[]).unwrap();
        let l = down_set_lattice(&base);
        assert_eq!(l.len(), 4);
        assert!(l.as_semilattice().unwrap().is_locally_distributive());
    }

    #[test]
    fn labeled_poset_counts() {
        // OEIS A001035.
        assert_eq!(all_posets(0).len(), 1);
        assert_eq!(all_posets(1).len(), 1);
        assert_eq!(all_posets(2).len(), 3);
        assert_eq!(all_posets(3).len(), 19);
        assert_eq!(all_posets(4).len(), 219);
    }

    #[test]
    fn random_distributive_semilattices_are_distributive() {
        let mut rng = Xoshiro256::seed_from_u64(123);
        for _ in 0..25 {
            let s = random_distributive_semilattice(12, &mut rng);
            assert!(s.len() <= 12);
            assert!(s.is_locally_distributive());
        }
    }

    #[test]
    fn random_nonflag_face_semilattices_are_nonflag_and_boolean() {
        let mut rng = Xoshiro256::seed_from_u64(77);
        for _ in 0..10 {
            let s = random_nonflag_face_semilattice(&mut rng);
            assert!(s.is_locally_boolean());
            assert!(!s.is_flag());
        }
    }

    #[test]
    fn divisor_lattice_of_30() {
        let p = divisor_lattice(30);
        assert_eq!(p.len(), 8);
        assert!(p.leq("5", "15").unwrap());
        assert!(!p.leq("2", "15").unwrap());
    }
}
