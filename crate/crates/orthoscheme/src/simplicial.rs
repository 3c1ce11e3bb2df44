//! Abstract simplicial complexes stored by inclusion-maximal facets.
//!
//! Faces are never materialized unless asked for: membership is a subset
//! query against the facets. The empty complex (no faces at all) is distinct
//! from the complex whose only face is the empty set; `from_facets(&[])`
//! builds the former, `from_facets(&[vec![]])` the latter.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::poset::{Poset, PosetError, Semilattice};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("`{0}` is not a face of the complex")]
    NotAFace(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("the empty complex has no face poset")]
    EmptyComplex,
    #[error("vertex order ground set does not match the vertex set (offending vertex `{0}`)")]
    VertexOrderMismatch(String),
    #[error("order is not compatible: closure of face `{0}` is not a face")]
    IncompatibleOrder(String),
    #[error(transparent)]
    Poset(#[from] PosetError),
}

/// A face given by vertex indices into the complex's canonical vertex list.
pub type Face = BTreeSet<usize>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex {
    vertices: Vec<String>,
    index: BTreeMap<String, usize>,
    /// Inclusion-maximal faces. `[]` encodes the empty complex; `[{}]` the
    /// complex whose only face is the empty set.
    facets: Vec<Face>,
}

impl SimplicialComplex {
    /// Builds the complex generated by `facet_list` (downward closure).
    /// Vertices are collected in order of first appearance; the given sets
    /// are reduced to the inclusion-maximal ones.
    pub fn from_facets<S: AsRef<str>>(facet_list: &[Vec<S>]) -> Self {
        let mut vertices: Vec<String> = Vec::new();
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let mut sets: Vec<Face> = Vec::new();
        for facet in facet_list {
            let mut f = Face::new();
            for v in facet {
                let name = v.as_ref();
                let i = *index.entry(name.to_string()).or_insert_with(|| {
                    vertices.push(name.to_string());
                    vertices.len() - 1
                });
                f.insert(i);
            }
            sets.push(f);
        }
        let facets = reduce_to_maximal(sets);
        SimplicialComplex {
            vertices,
            index,
            facets,
        }
    }

    /// Builds from an explicit vertex list (fixing the canonical order) and
    /// facets over those vertices. Every declared vertex must appear in some
    /// facet, so that the vertex set really is the union of the faces.
    pub fn from_vertices_and_facets<S: AsRef<str>>(
        vertices: &[S],
        facet_list: &[Vec<S>],
    ) -> Result<Self, ComplexError> {
        let mut index = BTreeMap::new();
        let mut names = Vec::with_capacity(vertices.len());
        for v in vertices {
            let name = v.as_ref().to_string();
            if index.insert(name.clone(), names.len()).is_some() {
                return Err(ComplexError::UnknownVertex(format!("{name} (duplicate)")));
            }
            names.push(name);
        }
        let mut sets = Vec::new();
        let mut used = vec![false; names.len()];
        for facet in facet_list {
            let mut f = Face::new();
            for v in facet {
                let i = *index
                    .get(v.as_ref())
                    .ok_or_else(|| ComplexError::UnknownVertex(v.as_ref().to_string()))?;
                used[i] = true;
                f.insert(i);
            }
            sets.push(f);
        }
        if let Some(i) = used.iter().position(|&u| !u) {
            if !names.is_empty() {
                return Err(ComplexError::VertexOrderMismatch(names[i].clone()));
            }
        }
        let facets = reduce_to_maximal(sets);
        Ok(SimplicialComplex {
            vertices: names,
            index,
            facets,
        })
    }

    /// The complex with no faces at all.
    pub fn empty() -> Self {
        SimplicialComplex {
            vertices: Vec::new(),
            index: BTreeMap::new(),
            facets: Vec::new(),
        }
    }

    /// True for the complex with no faces (not even the empty face).
    pub fn is_void(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_index(&self, name: &str) -> Result<usize, ComplexError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| ComplexError::UnknownVertex(name.to_string()))
    }

    pub fn vertex_name(&self, i: usize) -> &str {
        &self.vertices[i]
    }

    pub fn facets(&self) -> &[Face] {
        &self.facets
    }

    /// Largest facet size minus one; `None` for the empty complex and the
    /// complex `{∅}` has dimension -1 reported as `Some(-1)` via isize.
    pub fn dimension(&self) -> Option<isize> {
        self.facets.iter().map(|f| f.len() as isize - 1).max()
    }

    pub fn is_face(&self, face: &Face) -> bool {
        self.facets.iter().any(|f| face.is_subset(f))
    }

    pub fn face_from_names<S: AsRef<str>>(&self, names: &[S]) -> Result<Face, ComplexError> {
        names
            .iter()
            .map(|v| self.vertex_index(v.as_ref()))
            .collect()
    }

    /// All faces, by increasing size then lexicographic vertex order.
    pub fn all_faces(&self) -> Vec<Face> {
        let mut seen: BTreeSet<Face> = BTreeSet::new();
        for facet in &self.facets {
            let elts: Vec<usize> = facet.iter().copied().collect();
            for mask in 0u64..(1 << elts.len()) {
                let sub: Face = elts
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask & (1 << k) != 0)
                    .map(|(_, &v)| v)
                    .collect();
                seen.insert(sub);
            }
        }
        let mut faces: Vec<Face> = seen.into_iter().collect();
        faces.sort_by(|a, b| {
            (a.len(), a.iter().collect::<Vec<_>>()).cmp(&(b.len(), b.iter().collect::<Vec<_>>()))
        });
        faces
    }

    /// The link of `face`: all faces disjoint from it whose union with it is
    /// a face. Vertex names are inherited.
    pub fn link(&self, face: &Face) -> Result<SimplicialComplex, ComplexError> {
        if !self.is_face(face) {
            return Err(ComplexError::NotAFace(self.face_label(face)));
        }
        let generators: Vec<Vec<&str>> = self
            .facets
            .iter()
            .filter(|f| face.is_subset(f))
            .map(|f| f.difference(face).map(|&v| self.vertex_name(v)).collect())
            .collect();
        // Keep the inherited canonical vertex order.
        let mut used: BTreeSet<&str> = BTreeSet::new();
        for g in &generators {
            used.extend(g.iter().copied());
        }
        let vertex_order: Vec<&str> = self
            .vertices
            .iter()
            .map(|s| s.as_str())
            .filter(|v| used.contains(v))
            .collect();
        Ok(SimplicialComplex::from_vertices_and_facets(
            &vertex_order,
            &generators,
        )?)
    }

    /// The join `K * L`. Vertices are tagged `1:v` and `2:w` to force
    /// disjointness.
    pub fn join(&self, other: &SimplicialComplex) -> SimplicialComplex {
        let mut facets: Vec<Vec<String>> = Vec::new();
        for f in &self.facets {
            for g in &other.facets {
                let mut fac: Vec<String> = f
                    .iter()
                    .map(|&v| format!("1:{}", self.vertex_name(v)))
                    .collect();
                fac.extend(g.iter().map(|&w| format!("2:{}", other.vertex_name(w))));
                facets.push(fac);
            }
        }
        SimplicialComplex::from_facets(&facets)
    }

    /// First minimal non-face all of whose pairs are edges, searching by
    /// increasing size then lexicographically. `None` means the complex is a
    /// flag complex.
    pub fn flag_witness(&self) -> Option<Face> {
        let n = self.vertices.len();
        let edge = |a: usize, b: usize| self.is_face(&Face::from([a, b]));
        // The smallest clique non-face is automatically a minimal non-face.
        let mut candidates: Vec<Vec<usize>> = vec![Vec::new()];
        for size in 1..=n {
            let mut next: Vec<Vec<usize>> = Vec::new();
            for c in &candidates {
                let start = c.last().map_or(0, |&l| l + 1);
                for v in start..n {
                    if c.iter().all(|&u| edge(u, v)) {
                        let mut cc = c.clone();
                        cc.push(v);
                        next.push(cc);
                    }
                }
            }
            if size >= 3 {
                for c in &next {
                    let face: Face = c.iter().copied().collect();
                    if !self.is_face(&face) {
                        return Some(face);
                    }
                }
            }
            candidates = next;
        }
        None
    }

    pub fn is_flag(&self) -> bool {
        self.flag_witness().is_none()
    }

    /// Canonical printable label of a face, `{v1,v2,...}` with vertices in
    /// canonical order and `{`, `}`, `,`, `\` escaped inside names.
    pub fn face_label(&self, face: &Face) -> String {
        face_label_of(face.iter().map(|&v| self.vertex_name(v)))
    }

    /// Parses a label produced by [`face_label`](Self::face_label).
    pub fn face_from_label(&self, label: &str) -> Result<Face, ComplexError> {
        let names =
            parse_face_label(label).ok_or_else(|| ComplexError::NotAFace(label.to_string()))?;
        names.iter().map(|v| self.vertex_index(v)).collect()
    }

    /// The face poset `F(K)`: all faces including the empty one, ordered by
    /// inclusion, as a semilattice (meets are intersections). Element names
    /// are the canonical face labels.
    pub fn face_poset(&self) -> Result<FacePoset, ComplexError> {
        if self.is_void() {
            return Err(ComplexError::EmptyComplex);
        }
        let faces = self.all_faces();
        let names: Vec<String> = faces.iter().map(|f| self.face_label(f)).collect();
        let poset = Poset::from_relation(names, |a, b| faces[a].is_subset(&faces[b]));
        let semilattice = Semilattice::from_poset(poset)?;
        Ok(FacePoset { semilattice, faces })
    }
}

fn reduce_to_maximal(mut sets: Vec<Face>) -> Vec<Face> {
    sets.sort_by(|a, b| {
        (a.len(), a.iter().collect::<Vec<_>>()).cmp(&(b.len(), b.iter().collect::<Vec<_>>()))
    });
    sets.dedup();
    let mut maximal: Vec<Face> = Vec::new();
    for s in sets.iter().rev() {
        if !maximal.iter().any(|m| s.is_subset(m)) {
            maximal.push(s.clone());
        }
    }
    maximal.reverse();
    maximal
}

fn face_label_of<'a, I: Iterator<Item = &'a str>>(names: I) -> String {
    let mut out = String::from("{");
    for (k, name) in names.enumerate() {
        if k > 0 {
            out.push(',');
        }
        for ch in name.chars() {
            if matches!(ch, '{' | '}' | ',' | '\\') {
                out.push('\\');
            }
            out.push(ch);
        }
    }
    out.push('}');
    out
}

fn parse_face_label(label: &str) -> Option<Vec<String>> {
    let inner = label.strip_prefix('{')?.strip_suffix('}')?;
    if inner.is_empty() {
        return Some(Vec::new());
    }
    let mut names = Vec::new();
    let mut cur = String::new();
    let mut chars = inner.chars();
    while let Some(ch) = chars.next() {
        match ch {
            '\\' => cur.push(chars.next()?),
            ',' => {
                names.push(std::mem::take(&mut cur));
            }
            '{' | '}' => return None,
            _ => cur.push(ch),
        }
    }
    names.push(cur);
    Some(names)
}

/// The face poset of a complex, with the face behind each element.
#[derive(Debug, Clone)]
pub struct FacePoset {
    semilattice: Semilattice,
    faces: Vec<Face>,
}

impl FacePoset {
    pub fn semilattice(&self) -> &Semilattice {
        &self.semilattice
    }

    pub fn into_semilattice(self) -> Semilattice {
        self.semilattice
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face_of(&self, idx: usize) -> &Face {
        &self.faces[idx]
    }

    pub fn index_of_face(&self, face: &Face) -> Option<usize> {
        self.faces.iter().position(|f| f == face)
    }
}

/// A simplicial complex together with a partial order on its vertices that
/// is compatible: the down-closure of every face is a face.
#[derive(Debug, Clone)]
pub struct OrderedComplex {
    complex: SimplicialComplex,
    vertex_order: Poset,
}

impl OrderedComplex {
    /// Validates that the order's ground set equals the vertex set and that
    /// the order is compatible (checked on facets; downward closure gives it
    /// for all faces).
    pub fn new(complex: SimplicialComplex, vertex_order: Poset) -> Result<Self, ComplexError> {
        for v in complex.vertices() {
            if !vertex_order.contains(v) {
                return Err(ComplexError::VertexOrderMismatch(v.clone()));
            }
        }
        for v in vertex_order.elements() {
            if complex.vertex_index(v).is_err() {
                return Err(ComplexError::VertexOrderMismatch(v.clone()));
            }
        }
        let oc = OrderedComplex {
            complex,
            vertex_order,
        };
        for facet in oc.complex.facets() {
            let cl = oc.closure_face(facet);
            if !oc.complex.is_face(&cl) {
                return Err(ComplexError::IncompatibleOrder(
                    oc.complex.face_label(facet),
                ));
            }
        }
        Ok(oc)
    }

    /// Skips the compatibility check; the order must still match the vertex
    /// set for the down-face machinery to make sense.
    pub fn new_unchecked(complex: SimplicialComplex, vertex_order: Poset) -> Self {
        OrderedComplex {
            complex,
            vertex_order,
        }
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn vertex_order(&self) -> &Poset {
        &self.vertex_order
    }

    /// Down-closure of a vertex set: everything below some member.
    pub fn closure_face(&self, face: &Face) -> Face {
        let mut out = Face::new();
        for v in 0..self.complex.vertex_count() {
            let vn = self.complex.vertex_name(v);
            for &w in face.iter() {
                if self
                    .vertex_order
                    .leq(vn, self.complex.vertex_name(w))
                    .unwrap_or(false)
                {
                    out.insert(v);
                    break;
                }
            }
        }
        out
    }

    /// Down-closure by vertex names, validating membership.
    pub fn closure<S: AsRef<str>>(&self, names: &[S]) -> Result<Face, ComplexError> {
        let face = self.complex.face_from_names(names)?;
        Ok(self.closure_face(&face))
    }

    pub fn is_down_face(&self, face: &Face) -> bool {
        self.complex.is_face(face) && self.closure_face(face) == *face
    }

    /// The induced subposet of down faces, as a semilattice. Fails with the
    /// offending face if the order is not compatible.
    pub fn down_faces(&self) -> Result<FacePoset, ComplexError> {
        if self.complex.is_void() {
            return Err(ComplexError::EmptyComplex);
        }
        for facet in self.complex.facets() {
            let cl = self.closure_face(facet);
            if !self.complex.is_face(&cl) {
                return Err(ComplexError::IncompatibleOrder(
                    self.complex.face_label(facet),
                ));
            }
        }
        let faces: Vec<Face> = self
            .complex
            .all_faces()
            .into_iter()
            .filter(|f| self.is_down_face(f))
            .collect();
        let names: Vec<String> = faces.iter().map(|f| self.complex.face_label(f)).collect();
        let poset = Poset::from_relation(names, |a, b| faces[a].is_subset(&faces[b]));
        let semilattice = Semilattice::from_poset(poset)?;
        Ok(FacePoset { semilattice, faces })
    }
}
