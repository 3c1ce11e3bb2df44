//! Coordinates for orthoscheme complexes and cubical cones.
//!
//! An orthoscheme `O(l1, .., ld)` is the Euclidean simplex spanned by the
//! partial sums `v_i = l1 e1 + .. + li ei`; consecutive edge directions are
//! mutually orthogonal, and `|v_i v_j| = sqrt(l_{i+1}^2 + .. + l_j^2)`. A
//! chain of a poset is metrized by `l_i = sqrt(h(x_i) - h(x_{i-1}))` with `h`
//! the canonical height, so that `d(x_i, x_j) = sqrt(h(x_j) - h(x_i))`.
//!
//! The cubical cone `CC(K)` of a complex `K` is the union of unit cubes
//! `I^σ` over faces `σ` inside the Euclidean space spanned by the vertices.
//! `embed_cc` maps a convex combination of faces (a point of the realized
//! face poset) to `Σ t_i χ_{σ_i}`; `extract_cc` inverts it by reading the
//! staircase of coordinate level sets.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poset::Poset;
use crate::simplicial::{ComplexError, Face, OrderedComplex, SimplicialComplex};

/// Default tolerance for membership predicates.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Grouping tolerance for staircase levels in `extract_cc`.
const LEVEL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("orthoscheme edge lengths must be positive (got {0})")]
    NonPositiveLength(f64),
    #[error("`{0}` is not a chain of the poset")]
    NotAChain(String),
    #[error("point is not in the complex: {0}")]
    NotInComplex(String),
    #[error("weights must be positive and sum to 1 (got sum {0})")]
    BadWeights(f64),
    #[error("retraction requires v < w in the vertex order (got `{0}`, `{1}`)")]
    PreconditionViolated(String, String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// A point of a geometric realization in support form: a strictly increasing
/// chain of poset elements with positive barycentric weights summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PLPoint {
    pub chain: Vec<String>,
    pub weights: Vec<f64>,
}

impl PLPoint {
    /// A vertex of the realization: the single element with weight 1.
    pub fn vertex(name: &str) -> Self {
        PLPoint {
            chain: vec![name.to_string()],
            weights: vec![1.0],
        }
    }

    /// Validates against an ambient poset and canonicalizes: zero weights
    /// dropped, weights renormalized to sum exactly 1, chain strictly
    /// increasing.
    pub fn canonical(&self, ambient: &Poset) -> Result<PLPoint, GeometryError> {
        if self.chain.len() != self.weights.len() {
            return Err(GeometryError::BadWeights(f64::NAN));
        }
        let sum: f64 = self.weights.iter().sum();
        if !(sum - 1.0).abs().le(&1e-6) || self.weights.iter().any(|&w| w < -1e-12) {
            return Err(GeometryError::BadWeights(sum));
        }
        let mut chain = Vec::new();
        let mut weights = Vec::new();
        for (name, &w) in self.chain.iter().zip(&self.weights) {
            if !ambient.contains(name) {
                return Err(GeometryError::NotAChain(name.clone()));
            }
            if w > 1e-12 {
                chain.push(name.clone());
                weights.push(w / sum);
            }
        }
        let idx: Vec<usize> = chain.iter().map(|n| ambient.index_of(n).unwrap()).collect();
        if !ambient.is_strict_chain(&idx) {
            return Err(GeometryError::NotAChain(chain.join(" < ")));
        }
        Ok(PLPoint { chain, weights })
    }

    pub fn approx_eq(&self, other: &PLPoint, tol: f64) -> bool {
        self.chain == other.chain
            && self.weights.len() == other.weights.len()
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// A point of `E^{V(K)}` with finite support, keyed by vertex name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EuclideanPoint {
    pub coords: BTreeMap<String, f64>,
}

impl EuclideanPoint {
    pub fn new(coords: BTreeMap<String, f64>) -> Self {
        EuclideanPoint { coords }
    }

    pub fn zero() -> Self {
        EuclideanPoint {
            coords: BTreeMap::new(),
        }
    }

    /// The 0/1 indicator point `χ_σ` of a vertex set.
    pub fn chi<S: AsRef<str>>(names: &[S]) -> Self {
        EuclideanPoint {
            coords: names
                .iter()
                .map(|n| (n.as_ref().to_string(), 1.0))
                .collect(),
        }
    }

    pub fn get(&self, v: &str) -> f64 {
        self.coords.get(v).copied().unwrap_or(0.0)
    }

    /// Ambient Euclidean distance.
    pub fn distance(&self, other: &EuclideanPoint) -> f64 {
        let keys: BTreeSet<&String> = self.coords.keys().chain(other.coords.keys()).collect();
        keys.iter()
            .map(|k| (self.get(k) - other.get(k)).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Drops entries with magnitude at most `tol`.
    pub fn pruned(&self, tol: f64) -> EuclideanPoint {
        EuclideanPoint {
            coords: self
                .coords
                .iter()
                .filter(|(_, &v)| v.abs() > tol)
                .map(|(k, &v)| (k.clone(), v))
                .collect(),
        }
    }

    /// Convex combination `(1 - t) self + t other`.
    pub fn lerp(&self, other: &EuclideanPoint, t: f64) -> EuclideanPoint {
        let keys: BTreeSet<&String> = self.coords.keys().chain(other.coords.keys()).collect();
        EuclideanPoint {
            coords: keys
                .into_iter()
                .map(|k| (k.clone(), (1.0 - t) * self.get(k) + t * other.get(k)))
                .collect(),
        }
    }
}

/// An orthoscheme cell over a chain of poset elements: the edge lengths
/// `l1..ld` plus the `d + 1` vertex labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthoschemeCell {
    pub lengths: Vec<f64>,
    pub vertex_labels: Vec<String>,
}

impl OrthoschemeCell {
    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    /// Coordinates of the cell's vertices in its own chart `E^d`.
    pub fn vertex_coords(&self) -> Vec<Vec<f64>> {
        orthoscheme_vertices_unchecked(&self.lengths)
    }

    /// Chart coordinates of the barycentric combination `Σ t_i v_i`.
    pub fn point_from_barycentric(&self, weights: &[f64]) -> Vec<f64> {
        let verts = self.vertex_coords();
        let d = self.dim();
        let mut out = vec![0.0; d];
        for (w, v) in weights.iter().zip(&verts) {
            for (o, &c) in out.iter_mut().zip(v) {
                *o += w * c;
            }
        }
        out
    }

    /// Euclidean distance between two barycentric points of this cell.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let pa = self.point_from_barycentric(a);
        let pb = self.point_from_barycentric(b);
        pa.iter()
            .zip(&pb)
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Vertices `v_0, .., v_d` of `O(l1, .., ld)`, `v_i = Σ_{j<=i} l_j e_j`.
pub fn orthoscheme_vertices(lengths: &[f64]) -> Result<Vec<Vec<f64>>, GeometryError> {
    for &l in lengths {
        if !(l > 0.0) {
            return Err(GeometryError::NonPositiveLength(l));
        }
    }
    Ok(orthoscheme_vertices_unchecked(lengths))
}

fn orthoscheme_vertices_unchecked(lengths: &[f64]) -> Vec<Vec<f64>> {
    let d = lengths.len();
    let mut out = Vec::with_capacity(d + 1);
    let mut acc = vec![0.0; d];
    out.push(acc.clone());
    for (j, &l) in lengths.iter().enumerate() {
        acc[j] += l;
        out.push(acc.clone());
    }
    out
}

/// The orthoscheme cell of a strictly increasing chain, with edge lengths
/// `sqrt(h(x_i) - h(x_{i-1}))` for the canonical height `h`.
pub fn chain_cell<S: AsRef<str>>(
    poset: &Poset,
    chain: &[S],
) -> Result<OrthoschemeCell, GeometryError> {
    let heights: Vec<f64> = poset.heights().into_iter().map(|h| h as f64).collect();
    chain_cell_with_height(poset, chain, &heights)
}

/// As [`chain_cell`] but against an arbitrary strictly order-preserving
/// height vector indexed like `poset.elements()`; heights must strictly
/// increase along the chain.
pub fn chain_cell_with_height<S: AsRef<str>>(
    poset: &Poset,
    chain: &[S],
    heights: &[f64],
) -> Result<OrthoschemeCell, GeometryError> {
    let idx: Vec<usize> = chain
        .iter()
        .map(|n| {
            poset
                .index_of(n.as_ref())
                .map_err(|_| GeometryError::NotAChain(n.as_ref().to_string()))
        })
        .collect::<Result<_, _>>()?;
    if !poset.is_strict_chain(&idx) {
        let names: Vec<&str> = chain.iter().map(|n| n.as_ref()).collect();
        return Err(GeometryError::NotAChain(names.join(" < ")));
    }
    let lengths: Vec<f64> = idx
        .windows(2)
        .map(|w| {
            let rise = heights[w[1]] - heights[w[0]];
            if rise > 0.0 {
                Ok(rise.sqrt())
            } else {
                Err(GeometryError::NonPositiveLength(rise))
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(OrthoschemeCell {
        lengths,
        vertex_labels: idx.iter().map(|&i| poset.name(i).to_string()).collect(),
    })
}

/// Maps a point of the realized face poset (chain of face labels of `F(K)`
/// with weights) to its cubical-cone coordinates `Σ t_i χ_{σ_i}`.
pub fn embed_cc(k: &SimplicialComplex, p: &PLPoint) -> Result<EuclideanPoint, GeometryError> {
    if p.chain.len() != p.weights.len() {
        return Err(GeometryError::BadWeights(f64::NAN));
    }
    let faces: Vec<Face> = p
        .chain
        .iter()
        .map(|label| k.face_from_label(label))
        .collect::<Result<_, _>>()?;
    for w in faces.windows(2) {
        if !(w[0].is_subset(&w[1]) && w[0] != w[1]) {
            return Err(GeometryError::NotAChain(p.chain.join(" < ")));
        }
    }
    for f in &faces {
        if !k.is_face(f) {
            return Err(GeometryError::NotAChain(k.face_label(f)));
        }
    }
    let sum: f64 = p.weights.iter().sum();
    if (sum - 1.0).abs() > 1e-6 || p.weights.iter().any(|&w| w < -1e-12) {
        return Err(GeometryError::BadWeights(sum));
    }
    let mut coords: BTreeMap<String, f64> = BTreeMap::new();
    for (face, &w) in faces.iter().zip(&p.weights) {
        for &v in face.iter() {
            *coords.entry(k.vertex_name(v).to_string()).or_insert(0.0) += w;
        }
    }
    coords.retain(|_, v| v.abs() > 1e-15);
    Ok(EuclideanPoint { coords })
}

/// Membership in `CC(K)` within `tol`: all coordinates in `[0, 1]` and the
/// support a face of `K`.
pub fn in_cc(k: &SimplicialComplex, q: &EuclideanPoint, tol: f64) -> bool {
    let mut support = Face::new();
    for (name, &t) in &q.coords {
        if t < -tol || t > 1.0 + tol {
            return false;
        }
        if t > tol {
            match k.vertex_index(name) {
                Ok(i) => {
                    support.insert(i);
                }
                Err(_) => return false,
            }
        }
    }
    k.is_face(&support)
}

/// Inverts [`embed_cc`]: reads the staircase of coordinate levels
/// `1 = s_0 > s_1 > .. > s_{d+1} = 0` and returns
/// `Σ (s_i - s_{i+1}) {v : t_v >= s_i}` in canonical form. Levels closer
/// than `1e-9` are merged.
pub fn extract_cc(k: &SimplicialComplex, q: &EuclideanPoint) -> Result<PLPoint, GeometryError> {
    if !in_cc(k, q, MEMBERSHIP_TOL) {
        return Err(GeometryError::NotInComplex(format!("{:?}", q.coords)));
    }
    let mut levels: Vec<f64> = vec![1.0, 0.0];
    levels.extend(
        q.coords
            .values()
            .copied()
            .filter(|&t| t > LEVEL_TOL && t < 1.0 - LEVEL_TOL),
    );
    levels.sort_by(|a, b| b.partial_cmp(a).unwrap());
    levels.dedup_by(|a, b| (*a - *b).abs() <= LEVEL_TOL);
    // levels = s_0 > s_1 > ... > s_{d+1} with s_0 = 1, s_{d+1} = 0.
    let mut chain = Vec::new();
    let mut weights = Vec::new();
    for i in 0..levels.len() - 1 {
        let s_i = levels[i];
        let face: Face = q
            .coords
            .iter()
            .filter(|(_, &t)| t >= s_i - LEVEL_TOL)
            .map(|(name, _)| k.vertex_index(name))
            .collect::<Result<_, _>>()?;
        chain.push(k.face_label(&face));
        weights.push(s_i - levels[i + 1]);
    }
    Ok(PLPoint { chain, weights })
}

/// True when `t_v >= t_w - tol` for every comparable pair `v <= w` of the
/// vertex order; the defining inequalities of the down region of `CC(K)`.
pub fn in_down_region(
    oc: &OrderedComplex,
    q: &EuclideanPoint,
    tol: f64,
) -> Result<bool, GeometryError> {
    if !in_cc(oc.complex(), q, tol.max(MEMBERSHIP_TOL)) {
        return Err(GeometryError::NotInComplex(format!("{:?}", q.coords)));
    }
    let k = oc.complex();
    let order = oc.vertex_order();
    for v in 0..k.vertex_count() {
        for w in 0..k.vertex_count() {
            if v != w
                && order
                    .leq(k.vertex_name(v), k.vertex_name(w))
                    .unwrap_or(false)
            {
                let tv = q.get(k.vertex_name(v));
                let tw = q.get(k.vertex_name(w));
                if tv < tw - tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// The nearest-point retraction onto the half-space `t_v >= t_w`: replaces
/// the `(v, w)` coordinates by `max(t_v, (t_v + t_w)/2)` and
/// `min(t_w, (t_v + t_w)/2)`. Requires `v < w` in the vertex order; the
/// image stays in `CC(K)` because `σ ∪ {v}` is contained in the closure of
/// any face `σ` containing `w`.
pub fn retract_vw(
    oc: &OrderedComplex,
    q: &EuclideanPoint,
    v: &str,
    w: &str,
) -> Result<EuclideanPoint, GeometryError> {
    let order = oc.vertex_order();
    let strictly_below = order.leq(v, w).unwrap_or(false) && v != w;
    if !strictly_below {
        return Err(GeometryError::PreconditionViolated(
            v.to_string(),
            w.to_string(),
        ));
    }
    if !in_cc(oc.complex(), q, MEMBERSHIP_TOL) {
        return Err(GeometryError::NotInComplex(format!("{:?}", q.coords)));
    }
    let tv = q.get(v);
    let tw = q.get(w);
    let avg = 0.5 * (tv + tw);
    let mut coords = q.coords.clone();
    coords.insert(v.to_string(), tv.max(avg));
    coords.insert(w.to_string(), tw.min(avg));
    coords.retain(|_, val| val.abs() > 1e-15);
    let out = EuclideanPoint { coords };
    debug_assert!(in_cc(oc.complex(), &out, 1e-9));
    Ok(out)
}
