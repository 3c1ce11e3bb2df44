//! The Birkhoff-style representation of a locally distributive semilattice:
//! an abstract simplicial complex on the join-irreducible elements, carrying
//! the induced compatible order, whose down-face semilattice is isomorphic to
//! the input. `birkhoff` builds it and verifies the round trip before
//! returning; `boolean_representation` is the locally Boolean specialization
//! where the whole face poset is isomorphic to the input.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::poset::{BooleanWitness, DistributivityWitness, Semilattice};
use crate::simplicial::{ComplexError, Face, FacePoset, OrderedComplex, SimplicialComplex};

#[derive(Debug, Error)]
pub enum RepresentationError {
    #[error("semilattice is not locally distributive: {0:?}")]
    NotLocallyDistributive(DistributivityWitness),
    #[error("semilattice is not locally Boolean: {0:?}")]
    NotLocallyBoolean(BooleanWitness),
    #[error("constructed representation failed verification: {0:?}")]
    RoundTripFailure(VerificationReport),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// The representation `S ≅ DF(K)`: the ordered complex `K` on `Irr S`, the
/// map `phi(x) = Irr S ∩ S^{<=x}` and its inverse `psi(σ) = ⋁σ`.
///
/// Fields are public so that tests can corrupt a copy and watch
/// [`verify_representation`] flag the damage.
#[derive(Debug, Clone)]
pub struct Representation {
    pub source: Semilattice,
    pub complex: OrderedComplex,
    /// For each source element index, the down face `phi(x)` (vertex indices
    /// of the complex).
    pub phi: Vec<Face>,
    /// For each down face (keyed by canonical face label), the source
    /// element index `psi(σ)`.
    pub psi: BTreeMap<String, usize>,
}

/// Outcome of exhaustively checking a representation; empty `failures`
/// means the maps are mutually inverse order-isomorphisms.
#[derive(Debug, Clone, Default, Serialize)]
pub struct VerificationReport {
    pub failures: Vec<String>,
}

impl VerificationReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Builds the representation: faces of `K` are exactly the subsets of
/// `Irr S` bounded in `S`, the vertex order is the induced order, and the
/// round trip is verified before returning.
pub fn birkhoff(s: &Semilattice) -> Result<Representation, RepresentationError> {
    birkhoff_with(s, true)
}

/// As [`birkhoff`], optionally skipping the (always-passing, but not free)
/// verification pass for large inputs.
pub fn birkhoff_with(s: &Semilattice, verify: bool) -> Result<Representation, RepresentationError> {
    if let Some(w) = s.distributivity_witness() {
        return Err(RepresentationError::NotLocallyDistributive(w));
    }
    let irr = s.irreducible_indices();
    let irr_pos: BTreeMap<usize, usize> = irr.iter().enumerate().map(|(k, &x)| (x, k)).collect();
    let names: Vec<&str> = irr.iter().map(|&x| s.poset().name(x)).collect();

    // Every bounded subset of Irr S lies in A_u = Irr S ∩ S^{<=u} for a
    // bound u, and each A_u is itself bounded, so the facets of K are the
    // inclusion-maximal A_u.
    let mut generators: Vec<Vec<&str>> = Vec::new();
    for u in 0..s.len() {
        let a_u: Vec<&str> = irr
            .iter()
            .filter(|&&x| s.poset().leq_idx(x, u))
            .map(|&x| s.poset().name(x))
            .collect();
        generators.push(a_u);
    }
    if generators.is_empty() {
        generators.push(Vec::new());
    }
    let complex = if names.is_empty() {
        // No irreducibles: K is the one-face complex {∅}.
        SimplicialComplex::from_facets::<&str>(&[Vec::new()])
    } else {
        SimplicialComplex::from_vertices_and_facets(&names, &generators)?
    };
    let vertex_order = s.poset().induced(&irr);
    let oc = OrderedComplex::new(complex, vertex_order)?;

    let mut phi = Vec::with_capacity(s.len());
    for x in 0..s.len() {
        let face: Face = irr
            .iter()
            .enumerate()
            .filter(|(_, &y)| s.poset().leq_idx(y, x))
            .map(|(k, _)| k)
            .collect();
        phi.push(face);
    }
    let df = oc.down_faces()?;
    let mut psi = BTreeMap::new();
    for face in df.faces() {
        let members: Vec<usize> = face
            .iter()
            .map(|&k| {
                let name = oc.complex().vertex_name(k);
                s.poset().index_of(name).expect("vertex names come from S")
            })
            .collect();
        let join = s.join_all_idx(&members).expect("down faces are bounded");
        psi.insert(oc.complex().face_label(face), join);
    }
    // Consistency of the vertex indexing used by phi.
    for (k, &x) in irr.iter().enumerate() {
        debug_assert_eq!(oc.complex().vertex_name(k), s.poset().name(x));
        debug_assert_eq!(irr_pos[&x], k);
    }

    let rep = Representation {
        source: s.clone(),
        complex: oc,
        phi,
        psi,
    };
    if verify {
        let report = verify_representation(&rep);
        if !report.is_ok() {
            return Err(RepresentationError::RoundTripFailure(report));
        }
    }
    Ok(rep)
}

/// Exhaustively confirms that `psi ∘ phi = id`, `phi ∘ psi = id`, both maps
/// are order-preserving, and phi lands in the down faces. Returns every
/// failure found rather than stopping at the first.
pub fn verify_representation(rep: &Representation) -> VerificationReport {
    let mut failures = Vec::new();
    let s = &rep.source;
    let oc = &rep.complex;
    let df = match oc.down_faces() {
        Ok(df) => df,
        Err(e) => {
            return VerificationReport {
                failures: vec![format!("down faces unavailable: {e}")],
            }
        }
    };

    if rep.phi.len() != s.len() {
        failures.push(format!(
            "phi has {} entries for {} elements",
            rep.phi.len(),
            s.len()
        ));
    }
    for x in 0..s.len().min(rep.phi.len()) {
        let face = &rep.phi[x];
        let label = oc.complex().face_label(face);
        if !df.faces().contains(face) {
            failures.push(format!(
                "phi({}) = {} is not a down face",
                s.poset().name(x),
                label
            ));
            continue;
        }
        match rep.psi.get(&label) {
            Some(&back) if back == x => {}
            Some(&back) => failures.push(format!(
                "psi(phi({})) = {} differs from the original",
                s.poset().name(x),
                s.poset().name(back)
            )),
            None => failures.push(format!("psi undefined on phi({})", s.poset().name(x))),
        }
    }
    for face in df.faces() {
        let label = oc.complex().face_label(face);
        match rep.psi.get(&label) {
            None => failures.push(format!("psi undefined on down face {label}")),
            Some(&x) => {
                if x >= rep.phi.len() || rep.phi[x] != *face {
                    failures.push(format!("phi(psi({label})) differs from {label}"));
                }
            }
        }
    }
    // Order preservation, both directions.
    for x in 0..s.len().min(rep.phi.len()) {
        for y in 0..s.len().min(rep.phi.len()) {
            let leq_s = s.poset().leq_idx(x, y);
            let leq_df = rep.phi[x].is_subset(&rep.phi[y]);
            if leq_s != leq_df {
                failures.push(format!(
                    "order mismatch: {} <= {} is {leq_s} in S but {leq_df} under phi",
                    s.poset().name(x),
                    s.poset().name(y)
                ));
            }
        }
    }
    VerificationReport { failures }
}

/// Corollary-level specialization: for a locally Boolean semilattice the
/// irreducibles form an antichain and `F(K) ≅ S` for the same complex.
pub fn boolean_representation(s: &Semilattice) -> Result<SimplicialComplex, RepresentationError> {
    if let Some(w) = s.boolean_witness() {
        return Err(RepresentationError::NotLocallyBoolean(w));
    }
    let rep = birkhoff(s)?;
    let irr = rep.complex.vertex_order();
    for a in irr.elements() {
        for b in irr.elements() {
            if a != b {
                assert!(
                    !irr.leq(a, b).unwrap(),
                    "irreducibles of a locally Boolean semilattice form an antichain"
                );
            }
        }
    }
    Ok(rep.complex.complex().clone())
}

/// Order-isomorphism test between the down faces of a representation and its
/// source, used by tests; equality of the underlying abstract structures.
pub fn down_faces_of(rep: &Representation) -> Result<FacePoset, ComplexError> {
    rep.complex.down_faces()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::poset::Poset;

    #[test]
    fn boolean_cube_gives_full_simplex_on_atoms() {
        let s = families::boolean_lattice(3).as_semilattice().unwrap();
        let rep = birkhoff(&s).unwrap();
        let k = rep.complex.complex();
        assert_eq!(k.vertex_count(), 3);
        assert_eq!(k.facets().len(), 1);
        assert_eq!(k.facets()[0].len(), 3);
        // Antichain order: DF(K) = F(K) has 8 faces.
        let df = rep.complex.down_faces().unwrap();
        assert_eq!(df.faces().len(), 8);
    }

    #[test]
    fn divisor_12_gives_simplex_on_2_3_4() {
        let s = families::divisor_lattice(12).as_semilattice().unwrap();
        let rep = birkhoff(&s).unwrap();
        let k = rep.complex.complex();
        let mut names: Vec<&str> = k.vertices().iter().map(|s| s.as_str()).collect();
        names.sort_unstable();
        assert_eq!(names, ["2", "3", "4"]);
        // Oracle: faces are the bounded subsets of {2, 3, 4}; every subset
        // is bounded by 12, so K is the full simplex.
        assert_eq!(k.facets().len(), 1);
        assert_eq!(k.facets()[0].len(), 3);
        assert!(rep.complex.vertex_order().leq("2", "4").unwrap());
        // Six down faces, isomorphic to the six divisors.
        assert_eq!(rep.complex.down_faces().unwrap().faces().len(), 6);
    }

    #[test]
    fn chain_gives_oriented_simplex() {
        let p = Poset::from_covers(&["0", "a", "b"], &[("0", "a"), ("a", "b")]).unwrap();
        let s = p.as_semilattice().unwrap();
        let rep = birkhoff(&s).unwrap();
        let k = rep.complex.complex();
        assert_eq!(k.vertex_count(), 2);
        assert!(rep.complex.vertex_order().leq("a", "b").unwrap());
        let df = rep.complex.down_faces().unwrap();
        let labels: Vec<String> = df.faces().iter().map(|f| k.face_label(f)).collect();
        assert_eq!(labels, ["{}", "{a}", "{a,b}"]);
    }

    #[test]
    fn m3_is_rejected() {
        let s = families::diamond_m3().as_semilattice().unwrap();
        assert!(matches!(
            birkhoff(&s),
            Err(RepresentationError::NotLocallyDistributive(_))
        ));
    }

    #[test]
    fn faces_are_exactly_bounded_subsets_of_irreducibles() {
        for s in families::small_semilattice_corpus() {
            if !s.is_locally_distributive() {
                continue;
            }
            let rep = birkhoff(&s).unwrap();
            let k = rep.complex.complex();
            let irr: Vec<usize> = s.irreducible_indices();
            let m = irr.len();
            assert_eq!(k.vertex_count(), m);
            for mask in 0u32..(1 << m) {
                let subset: Face = (0..m).filter(|k2| mask & (1 << k2) != 0).collect();
                let members: Vec<usize> = subset.iter().map(|&k2| irr[k2]).collect();
                let bounded = s.join_all_idx(&members).is_some();
                assert_eq!(k.is_face(&subset), bounded);
            }
        }
    }

    #[test]
    fn verification_passes_on_corpus() {
        for s in families::small_semilattice_corpus() {
            if !s.is_locally_distributive() {
                continue;
            }
            let rep = birkhoff(&s).unwrap();
            assert!(verify_representation(&rep).is_ok());
        }
    }

    #[test]
    fn corrupted_phi_is_reported() {
        let s = families::divisor_lattice(12).as_semilattice().unwrap();
        let mut rep = birkhoff(&s).unwrap();
        let x = s.poset().index_of("6").unwrap();
        rep.phi[x] = Face::new(); // pretend phi(6) = {}
        let report = verify_representation(&rep);
        assert!(!report.is_ok());
        assert!(report.failures.iter().any(|f| f.contains('6')));
    }

    #[test]
    fn all_distributive_lattices_up_to_eight_elements_round_trip() {
        // Birkhoff: every distributive lattice of height n is the down-set
        // lattice of a poset; posets on <= 3 elements cover sizes <= 8.
        for base in families::all_posets(3) {
            let lattice = families::down_set_lattice(&base);
            assert!(lattice.len() <= 8);
            let s = lattice.as_semilattice().unwrap();
            let rep = birkhoff(&s).unwrap();
            assert!(verify_representation(&rep).is_ok());
        }
    }

    #[test]
    fn phi_preserves_meets_and_embeds_order() {
        for s in families::small_semilattice_corpus() {
            if !s.is_locally_distributive() {
                continue;
            }
            let rep = birkhoff(&s).unwrap();
            for x in 0..s.len() {
                for y in 0..s.len() {
                    let m = s.meet_idx(x, y);
                    let inter: Face = rep.phi[x].intersection(&rep.phi[y]).copied().collect();
                    assert_eq!(rep.phi[m], inter);
                    assert_eq!(s.poset().leq_idx(x, y), rep.phi[x].is_subset(&rep.phi[y]));
                }
            }
        }
    }

    #[test]
    fn face_sizes_bounded_by_height_and_closures_stay_bounded() {
        for s in families::small_semilattice_corpus() {
            if !s.is_locally_distributive() {
                continue;
            }
            let rep = birkhoff(&s).unwrap();
            let k = rep.complex.complex();
            let height = s.poset().height();
            for face in k.all_faces() {
                assert!(face.len() <= height);
                // Some bound u holds the face, and the closure stays inside
                // the same principal ideal.
                let members: Vec<usize> = face
                    .iter()
                    .map(|&v| s.poset().index_of(k.vertex_name(v)).unwrap())
                    .collect();
                let u = s.join_all_idx(&members).expect("faces are bounded");
                let closure = rep.complex.closure_face(&face);
                for &v in closure.iter() {
                    let x = s.poset().index_of(k.vertex_name(v)).unwrap();
                    assert!(s.poset().leq_idx(x, u));
                }
            }
        }
    }

    #[test]
    fn flagness_transfers_through_the_representation() {
        for s in families::small_semilattice_corpus() {
            if !s.is_locally_distributive() {
                continue;
            }
            let rep = birkhoff(&s).unwrap();
            assert_eq!(s.is_flag(), rep.complex.complex().is_flag());
        }
    }

    #[test]
    fn boolean_representation_of_cube_is_simplex() {
        let s = families::boolean_lattice(3).as_semilattice().unwrap();
        let k = boolean_representation(&s).unwrap();
        assert_eq!(k.facets().len(), 1);
        assert_eq!(k.facets()[0].len(), 3);
    }

    #[test]
    fn boolean_representation_rejects_chain() {
        let p = Poset::from_covers(&["0", "a", "b"], &[("0", "a"), ("a", "b")]).unwrap();
        let s = p.as_semilattice().unwrap();
        assert!(matches!(
            boolean_representation(&s),
            Err(RepresentationError::NotLocallyBoolean(_))
        ));
    }

    #[test]
    fn boolean_representation_recovers_complexes() {
        // F(K0) -> K isomorphic to K0 for a few small complexes.
        for facets in [
            vec![vec!["a", "b"], vec!["b", "c"]],
            vec![vec!["a", "b", "c"]],
            vec![vec!["a"], vec!["b"]],
            vec![vec!["a", "b"], vec!["b", "c"], vec!["a", "c"]],
        ] {
            let k0 = SimplicialComplex::from_facets(&facets);
            let s = k0.face_poset().unwrap().into_semilattice();
            let k = boolean_representation(&s).unwrap();
            // Canonical form: sorted facet label multiset, after stripping
            // the face-label wrapper that vertex names acquired.
            let canon = |k: &SimplicialComplex| -> Vec<Vec<usize>> {
                let mut f: Vec<Vec<usize>> = k
                    .facets()
                    .iter()
                    .map(|f| f.iter().copied().collect::<Vec<usize>>())
                    .collect();
                let mut sizes: Vec<Vec<usize>> = f.iter_mut().map(|x| vec![x.len()]).collect();
                sizes.sort();
                sizes
            };
            assert_eq!(canon(&k), canon(&k0));
            assert_eq!(k.vertex_count(), k0.vertex_count());
            assert_eq!(k.all_faces().len(), k0.all_faces().len());
        }
    }

    #[test]
    fn singleton_semilattice_represents_as_point_complex() {
        let p = Poset::from_covers::<&str>(&["z"], &[]).unwrap();
        let s = p.as_semilattice().unwrap();
        let rep = birkhoff(&s).unwrap();
        assert_eq!(rep.complex.complex().vertex_count(), 0);
        assert!(!rep.complex.complex().is_void());
        assert!(verify_representation(&rep).is_ok());
    }
}
