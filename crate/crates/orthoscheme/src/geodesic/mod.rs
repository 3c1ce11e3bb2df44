//! Intrinsic metric of piecewise-Euclidean cell complexes.
//!
//! A [`CellComplexGeometry`] is a finite collection of convex Euclidean
//! cells, each in its own chart, glued along shared faces identified by the
//! global names of their spanning vertices. Two constructions are provided:
//! unit-cube complexes of cubical cones ([`complex_of_cc`]) and orthoscheme
//! complexes of finite posets ([`complex_of_orthoschemes`]).
//!
//! Distances are infima of string lengths. The solver enumerates galleries
//! (sequences of cells sharing faces), isometrically unfolds each gallery
//! into a common Euclidean frame, minimizes the resulting convex
//! sum-of-norms problem with an interior-point Newton method, and certifies
//! the answer with a Fenchel dual lower bound built from support functions
//! of the shared faces. The reported `gap` is an honest upper-minus-lower
//! certificate, not a heuristic.

mod cat0;
mod oracle;
mod solver;
mod unfold;

pub use cat0::{
    cat0_check, flag_witness_check, sample_cat0_margins, Cat0Margin, Cat0Verdict, FlagCheckConfig,
    FlagCheckReport, TripleWitness,
};
pub use oracle::grid_oracle_distance;
pub use solver::{geodesic_distance, SolverConfig};

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{chain_cell, EuclideanPoint, PLPoint};
use crate::linalg;
use crate::poset::Poset;
use crate::rng::Xoshiro256;
use crate::simplicial::SimplicialComplex;

#[derive(Debug, Error)]
pub enum GeodesicError {
    #[error("point cannot be located in any cell: {0}")]
    NotLocated(String),
    #[error("no gallery connects the given points")]
    Disconnected,
    #[error("poset is not connected")]
    DisconnectedPoset,
    #[error("budget exceeded; best distance {0} with gap {1}", .best.distance, .best.gap)]
    BudgetExceeded { best: GeodesicResult },
    #[error("semilattice is not locally distributive")]
    NotLocallyDistributive,
    #[error("net too large: {0} nodes")]
    NetTooLarge(usize),
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// One cell of a piecewise-Euclidean complex.
#[derive(Debug, Clone)]
pub enum Cell {
    /// A Euclidean simplex: global corner names plus their chart
    /// coordinates (chart dimension = corners - 1).
    Simplex {
        corners: Vec<String>,
        coords: Vec<Vec<f64>>,
    },
    /// A unit cube spanned by named axes; the chart is `[0,1]^axes`.
    Cube { axes: Vec<String> },
}

impl Cell {
    pub fn dim(&self) -> usize {
        match self {
            Cell::Simplex { coords, .. } => coords.first().map_or(0, |c| c.len()),
            Cell::Cube { axes } => axes.len(),
        }
    }

    /// Global names identifying the cell's vertices for gluing purposes.
    /// Cubes list their axes; the corner set is implicit (all 0/1 subsets).
    pub fn global_names(&self) -> &[String] {
        match self {
            Cell::Simplex { corners, .. } => corners,
            Cell::Cube { axes } => axes,
        }
    }

    /// Largest pairwise distance between cell vertices.
    pub fn diameter(&self) -> f64 {
        match self {
            Cell::Simplex { coords, .. } => {
                let mut best: f64 = 0.0;
                for a in coords {
                    for b in coords {
                        best = best.max(linalg::dist(a, b));
                    }
                }
                best
            }
            Cell::Cube { axes } => (axes.len() as f64).sqrt(),
        }
    }

    /// True when the chart point lies in the cell within `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self {
            Cell::Cube { axes } => {
                x.len() == axes.len() && x.iter().all(|&c| (-tol..=1.0 + tol).contains(&c))
            }
            Cell::Simplex { coords, .. } => {
                if x.len() != self.dim() {
                    return false;
                }
                let p = linalg::project_onto_hull(coords, x);
                linalg::dist(&p, x) <= tol
            }
        }
    }
}

/// Anchors shared by two adjacent cells: matched points given in each cell's
/// own chart, spanning the shared face.
#[derive(Debug, Clone)]
pub(crate) struct SharedFace {
    /// Matched anchor points: (coords in chart of cell a, coords in chart of
    /// cell b). The first anchor is a base point; the face is the hull/box
    /// spanned by the rest.
    pub anchors: Vec<(Vec<f64>, Vec<f64>)>,
    /// The face itself, described in chart-a coordinates.
    pub face_in_a: unfold::ChartFace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    CubicalCone,
    Orthoscheme,
}

/// A non-expanding map from the complex into a Euclidean witness space,
/// affine on every cell. Distances between witness images bound intrinsic
/// distances from below, which powers the gallery search heuristic and the
/// global certificate floor.
///
/// Cubical cones use the ambient coordinates themselves (isometric on each
/// cube). Orthoscheme complexes use indicator coordinates `g_z(x) = total
/// weight at or above z`, rescaled by the largest per-cell operator norm so
/// the map cannot expand.
#[derive(Debug, Clone)]
struct Witness {
    /// Witness coordinate names (cube axes for cones, poset elements else).
    axes: Vec<String>,
    /// For cube cells: witness indices of the cell's axes.
    cube_axes: Vec<Option<Vec<usize>>>,
    /// For simplex cells: rescaled witness images of the corners.
    corner_images: Vec<Option<Vec<Vec<f64>>>>,
}

/// A piecewise-Euclidean complex with located-point queries and the
/// geodesic machinery. Immutable after construction.
#[derive(Debug, Clone)]
pub struct CellComplexGeometry {
    cells: Vec<Cell>,
    labels: Vec<String>,
    kind: Kind,
    /// For each cell, indices of cells sharing at least one global vertex
    /// (for cubes: always everything, through the apex).
    adjacency: Vec<Vec<usize>>,
    witness: Witness,
}

/// A located point: a cell index plus chart coordinates, with every other
/// chart representation listed so galleries can start anywhere the point
/// lies.
#[derive(Debug, Clone)]
pub struct Located {
    pub placements: Vec<GeoPoint>,
    /// Ambient coordinates when the complex has a global isometric
    /// embedding (cubical cones); used for admissible lower bounds.
    pub ambient: Option<EuclideanPoint>,
}

#[derive(Debug, Clone)]
pub struct GeoPoint {
    pub cell: usize,
    pub coords: Vec<f64>,
}

/// A concatenation of within-cell segments realizing a path.
#[derive(Debug, Clone, Serialize)]
pub struct StringPath {
    pub segments: Vec<PathSegment>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathSegment {
    pub cell: usize,
    pub cell_label: String,
    pub entry: Vec<f64>,
    pub exit: Vec<f64>,
}

impl StringPath {
    pub fn length(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| linalg::dist(&s.entry, &s.exit))
            .sum()
    }
}

/// Result of a geodesic query. `distance` is the best found upper bound and
/// `gap` bounds `distance - true_distance` from above (certificate).
#[derive(Debug, Clone)]
pub struct GeodesicResult {
    pub distance: f64,
    pub gap: f64,
    pub path: StringPath,
    pub stats: SolverStats,
}

/// Search-effort counters for one query.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolverStats {
    pub pops: usize,
    pub galleries_solved: usize,
    pub newton_iterations: usize,
}

impl CellComplexGeometry {
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell_label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn is_cubical(&self) -> bool {
        self.kind == Kind::CubicalCone
    }

    pub(crate) fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn max_dim(&self) -> usize {
        self.cells.iter().map(|c| c.dim()).max().unwrap_or(0)
    }

    /// Shared-face anchors between two adjacent cells, or `None` when the
    /// cells do not intersect.
    pub(crate) fn shared_face(&self, a: usize, b: usize) -> Option<SharedFace> {
        match (&self.cells[a], &self.cells[b]) {
            (Cell::Cube { axes: ax_a }, Cell::Cube { axes: ax_b }) => {
                let shared: Vec<&String> = ax_a.iter().filter(|v| ax_b.contains(v)).collect();
                // Cubical cones always share at least the apex (origin).
                let da = ax_a.len();
                let db = ax_b.len();
                let mut anchors = vec![(vec![0.0; da], vec![0.0; db])];
                let mut axes_in_a = Vec::new();
                for v in &shared {
                    let ia = ax_a.iter().position(|x| &x == v).unwrap();
                    let ib = ax_b.iter().position(|x| &x == v).unwrap();
                    let mut ea = vec![0.0; da];
                    ea[ia] = 1.0;
                    let mut eb = vec![0.0; db];
                    eb[ib] = 1.0;
                    anchors.push((ea.clone(), eb));
                    axes_in_a.push(ea);
                }
                Some(SharedFace {
                    anchors,
                    face_in_a: unfold::ChartFace::UnitBox {
                        origin: vec![0.0; da],
                        axes: axes_in_a,
                    },
                })
            }
            (
                Cell::Simplex {
                    corners: ca,
                    coords: xa,
                },
                Cell::Simplex {
                    corners: cb,
                    coords: xb,
                },
            ) => {
                let mut anchors = Vec::new();
                let mut verts_in_a = Vec::new();
                for (i, name) in ca.iter().enumerate() {
                    if let Some(j) = cb.iter().position(|x| x == name) {
                        anchors.push((xa[i].clone(), xb[j].clone()));
                        verts_in_a.push(xa[i].clone());
                    }
                }
                if anchors.is_empty() {
                    return None;
                }
                Some(SharedFace {
                    anchors,
                    face_in_a: unfold::ChartFace::Hull { verts: verts_in_a },
                })
            }
            _ => unreachable!("mixed cell kinds do not occur"),
        }
    }

    /// Within-cell Euclidean distance between chart points of one cell.
    pub fn cell_distance(&self, cell: usize, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.cells[cell].dim());
        linalg::dist(x, y)
    }

    /// Witness-space image of a chart point (dense coordinates).
    pub(crate) fn witness_point(&self, g: &GeoPoint) -> Vec<f64> {
        let dim = self.witness.axes.len();
        match &self.cells[g.cell] {
            Cell::Cube { .. } => {
                let idx = self.witness.cube_axes[g.cell]
                    .as_ref()
                    .expect("cube witness");
                let mut w = vec![0.0; dim];
                for (&i, &c) in idx.iter().zip(&g.coords) {
                    w[i] = c;
                }
                w
            }
            Cell::Simplex { coords, .. } => {
                let images = self.witness.corner_images[g.cell]
                    .as_ref()
                    .expect("simplex witness");
                let bary = barycentric_in_orthoscheme(coords, &g.coords);
                let mut w = vec![0.0; dim];
                for (t, img) in bary.iter().zip(images) {
                    linalg::axpy(&mut w, *t, img);
                }
                w
            }
        }
    }

    /// Lower bound for the intrinsic distance from anywhere on the shared
    /// face of cells `a`, `b` to the witness point `qw`.
    pub(crate) fn witness_face_distance(&self, a: usize, b: usize, qw: &[f64]) -> f64 {
        match (&self.cells[a], &self.cells[b]) {
            (Cell::Cube { axes: ax_a }, Cell::Cube { axes: ax_b }) => {
                let idx_a = self.witness.cube_axes[a].as_ref().expect("cube witness");
                let shared: Vec<usize> = ax_a
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| ax_b.contains(v))
                    .map(|(i, _)| idx_a[i])
                    .collect();
                // Distance to the unit box supported on the shared axes.
                let mut sq = 0.0;
                for (i, &c) in qw.iter().enumerate() {
                    let nearest = if shared.contains(&i) {
                        c.clamp(0.0, 1.0)
                    } else {
                        0.0
                    };
                    sq += (c - nearest) * (c - nearest);
                }
                sq.sqrt()
            }
            (Cell::Simplex { corners: ca, .. }, Cell::Simplex { corners: cb, .. }) => {
                let images = self.witness.corner_images[a]
                    .as_ref()
                    .expect("simplex witness");
                let shared: Vec<Vec<f64>> = ca
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| cb.contains(v))
                    .map(|(i, _)| images[i].clone())
                    .collect();
                if shared.is_empty() {
                    return 0.0;
                }
                linalg::dist(&linalg::project_onto_hull(&shared, qw), qw)
            }
            _ => 0.0,
        }
    }

    /// Global witness lower bound between located points.
    pub(crate) fn witness_lower_bound(&self, p: &Located, q: &Located) -> f64 {
        match (p.placements.first(), q.placements.first()) {
            (Some(a), Some(b)) => linalg::dist(&self.witness_point(a), &self.witness_point(b)),
            _ => 0.0,
        }
    }

    /// Checks the gluing condition: matched anchor configurations of every
    /// adjacent pair are isometric within `tol`.
    pub fn validate_gluing(&self, tol: f64) -> bool {
        for a in 0..self.cells.len() {
            for &b in &self.adjacency[a] {
                if let Some(sf) = self.shared_face(a, b) {
                    for (i, (pa, pb)) in sf.anchors.iter().enumerate() {
                        for (qa, qb) in sf.anchors.iter().skip(i + 1) {
                            let da = linalg::dist(pa, qa);
                            let db = linalg::dist(pb, qb);
                            if (da - db).abs() > tol {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        true
    }

    // ------------------------------------------------------------------
    // Locating points.
    // ------------------------------------------------------------------

    /// Locates a Euclidean point in a cubical-cone geometry: its support
    /// must fit in some cube, and coordinates off a cube's axes must vanish.
    pub fn locate_euclidean(
        &self,
        k: &SimplicialComplex,
        q: &EuclideanPoint,
        tol: f64,
    ) -> Result<Located, GeodesicError> {
        if self.kind != Kind::CubicalCone {
            return Err(GeodesicError::Invalid(
                "euclidean points locate only in cubical-cone geometries".into(),
            ));
        }
        let _ = k;
        let mut placements = Vec::new();
        for (i, cell) in self.cells.iter().enumerate() {
            let Cell::Cube { axes } = cell else { continue };
            let mut ok = true;
            for (name, &t) in &q.coords {
                if t.abs() > tol && !axes.contains(name) {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            let coords: Vec<f64> = axes.iter().map(|v| q.get(v)).collect();
            if coords.iter().all(|&c| (-tol..=1.0 + tol).contains(&c)) {
                placements.push(GeoPoint { cell: i, coords });
            }
        }
        if placements.is_empty() {
            return Err(GeodesicError::NotLocated(format!("{:?}", q.coords)));
        }
        Ok(Located {
            placements,
            ambient: Some(q.pruned(0.0)),
        })
    }

    /// Locates a support-form point (chain plus weights) in an orthoscheme
    /// geometry: every maximal chain containing the support carries it.
    pub fn locate_pl(&self, poset: &Poset, p: &PLPoint) -> Result<Located, GeodesicError> {
        if self.kind != Kind::Orthoscheme {
            return Err(GeodesicError::Invalid(
                "support-form points locate only in orthoscheme geometries".into(),
            ));
        }
        let p = p
            .canonical(poset)
            .map_err(|e| GeodesicError::NotLocated(e.to_string()))?;
        let mut placements = Vec::new();
        for (i, cell) in self.cells.iter().enumerate() {
            let Cell::Simplex { corners, coords } = cell else {
                continue;
            };
            let positions: Option<Vec<usize>> = p
                .chain
                .iter()
                .map(|name| corners.iter().position(|c| c == name))
                .collect();
            let Some(positions) = positions else { continue };
            let dim = cell.dim();
            let mut x = vec![0.0; dim];
            for (&pos, &w) in positions.iter().zip(&p.weights) {
                linalg::axpy(&mut x, w, &coords[pos]);
            }
            placements.push(GeoPoint { cell: i, coords: x });
        }
        if placements.is_empty() {
            return Err(GeodesicError::NotLocated(p.chain.join(" < ")));
        }
        Ok(Located {
            placements,
            ambient: None,
        })
    }

    /// Wraps a raw chart point, adding the other charts that contain it.
    pub fn locate_geo(&self, g: &GeoPoint) -> Result<Located, GeodesicError> {
        match self.kind {
            Kind::CubicalCone => {
                let q = self.cube_point_to_euclidean(g)?;
                self.locate_euclidean(&SimplicialComplex::empty(), &q, 1e-9)
            }
            Kind::Orthoscheme => {
                let p = self.simplex_point_to_pl(g)?;
                // Ambient poset is implicit in the corner names.
                let mut placements = vec![g.clone()];
                for (i, cell) in self.cells.iter().enumerate() {
                    if i == g.cell {
                        continue;
                    }
                    let Cell::Simplex { corners, coords } = cell else {
                        continue;
                    };
                    let positions: Option<Vec<usize>> = p
                        .chain
                        .iter()
                        .map(|n| corners.iter().position(|c| c == n))
                        .collect();
                    if let Some(positions) = positions {
                        let mut x = vec![0.0; cell.dim()];
                        for (&pos, &w) in positions.iter().zip(&p.weights) {
                            linalg::axpy(&mut x, w, &coords[pos]);
                        }
                        placements.push(GeoPoint { cell: i, coords: x });
                    }
                }
                Ok(Located {
                    placements,
                    ambient: None,
                })
            }
        }
    }

    // ------------------------------------------------------------------
    // Canonical forms of chart points.
    // ------------------------------------------------------------------

    /// Ambient coordinates of a chart point in a cube cell.
    pub fn cube_point_to_euclidean(&self, g: &GeoPoint) -> Result<EuclideanPoint, GeodesicError> {
        let Cell::Cube { axes } = &self.cells[g.cell] else {
            return Err(GeodesicError::Invalid("not a cube cell".into()));
        };
        let mut coords = BTreeMap::new();
        for (v, &c) in axes.iter().zip(&g.coords) {
            if c.abs() > 1e-15 {
                coords.insert(v.clone(), c);
            }
        }
        Ok(EuclideanPoint::new(coords))
    }

    /// Support form (chain plus weights) of a chart point in a simplex cell.
    pub fn simplex_point_to_pl(&self, g: &GeoPoint) -> Result<PLPoint, GeodesicError> {
        let Cell::Simplex { corners, coords } = &self.cells[g.cell] else {
            return Err(GeodesicError::Invalid("not a simplex cell".into()));
        };
        let bary = barycentric_in_orthoscheme(coords, &g.coords);
        let mut chain = Vec::new();
        let mut weights = Vec::new();
        for (name, w) in corners.iter().zip(&bary) {
            if *w > 1e-12 {
                chain.push(name.clone());
                weights.push(*w);
            }
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            // All weight collapsed numerically; report the nearest corner.
            let mut best = 0;
            for (i, c) in coords.iter().enumerate() {
                if linalg::dist(c, &g.coords) < linalg::dist(&coords[best], &g.coords) {
                    best = i;
                }
            }
            return Ok(PLPoint::vertex(&corners[best]));
        }
        for w in &mut weights {
            *w /= sum;
        }
        Ok(PLPoint { chain, weights })
    }

    // ------------------------------------------------------------------
    // Sampling.
    // ------------------------------------------------------------------

    /// A uniformly chosen cell with a random interior point.
    pub fn sample_point(&self, rng: &mut Xoshiro256) -> GeoPoint {
        let cell = rng.usize_below(self.cells.len());
        let coords = match &self.cells[cell] {
            Cell::Cube { axes } => (0..axes.len()).map(|_| rng.f64()).collect(),
            Cell::Simplex { coords, .. } => {
                let w = rng.dirichlet(coords.len());
                let mut x = vec![0.0; coords[0].len()];
                for (wi, c) in w.iter().zip(coords) {
                    linalg::axpy(&mut x, *wi, c);
                }
                x
            }
        };
        GeoPoint { cell, coords }
    }
}

/// Barycentric coordinates of a chart point inside an orthoscheme cell whose
/// vertex coordinates are the staircase vertices (prefix sums of positive
/// edge lengths).
fn barycentric_in_orthoscheme(verts: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let d = x.len();
    debug_assert_eq!(verts.len(), d + 1);
    // s_j = sum of barycentric weights of vertices j.. ; recovered from the
    // chart coordinate along axis j divided by the edge length there.
    let mut s = vec![0.0; d + 2];
    s[0] = 1.0;
    for j in 1..=d {
        let len = verts[j][j - 1] - verts[j - 1][j - 1];
        s[j] = if len.abs() > 1e-300 {
            x[j - 1] / len
        } else {
            0.0
        };
    }
    s[d + 1] = 0.0;
    let mut t = Vec::with_capacity(d + 1);
    for i in 0..=d {
        t.push((s[i] - s[i + 1]).max(0.0));
    }
    let sum: f64 = t.iter().sum();
    if sum > 0.0 {
        for w in &mut t {
            *w /= sum;
        }
    }
    t
}

/// The unit-cube complex of the cubical cone `CC(K)`: one cube per facet,
/// glued along shared subcubes (every pair shares at least the apex).
pub fn complex_of_cc(k: &SimplicialComplex) -> CellComplexGeometry {
    let mut cells = Vec::new();
    let mut labels = Vec::new();
    for facet in k.facets() {
        let axes: Vec<String> = facet
            .iter()
            .map(|&v| k.vertex_name(v).to_string())
            .collect();
        labels.push(k.face_label(facet));
        cells.push(Cell::Cube { axes });
    }
    let n = cells.len();
    let adjacency: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i).collect())
        .collect();
    // Ambient coordinates are the witness embedding (isometric per cube).
    let axes: Vec<String> = k.vertices().to_vec();
    let cube_axes = cells
        .iter()
        .map(|c| match c {
            Cell::Cube { axes: ax } => Some(
                ax.iter()
                    .map(|v| axes.iter().position(|w| w == v).expect("facet vertex"))
                    .collect(),
            ),
            _ => None,
        })
        .collect();
    let witness = Witness {
        axes,
        cube_axes,
        corner_images: vec![None; n],
    };
    CellComplexGeometry {
        cells,
        labels,
        kind: Kind::CubicalCone,
        adjacency,
        witness,
    }
}

/// The orthoscheme complex of a finite poset with the canonical height: one
/// orthoscheme per maximal chain, glued along shared subchains.
pub fn complex_of_orthoschemes(p: &Poset) -> Result<CellComplexGeometry, GeodesicError> {
    if !p.is_connected() {
        return Err(GeodesicError::DisconnectedPoset);
    }
    let mut cells = Vec::new();
    let mut labels = Vec::new();
    for chain in p.maximal_chains_idx() {
        let names: Vec<&str> = chain.iter().map(|&i| p.name(i)).collect();
        let cell = chain_cell(p, &names).expect("maximal chains are chains");
        let coords = cell.vertex_coords();
        labels.push(names.join("<"));
        cells.push(Cell::Simplex {
            corners: names.iter().map(|s| s.to_string()).collect(),
            coords,
        });
    }
    let n = cells.len();
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (Cell::Simplex { corners: ci, .. }, Cell::Simplex { corners: cj, .. }) =
                (&cells[i], &cells[j])
            else {
                unreachable!()
            };
            if ci.iter().any(|v| cj.contains(v)) {
                adjacency[i].push(j);
            }
        }
    }
    let witness = orthoscheme_witness(p, &cells);
    Ok(CellComplexGeometry {
        cells,
        labels,
        kind: Kind::Orthoscheme,
        adjacency,
        witness,
    })
}

/// Indicator-coordinate witness embedding for an orthoscheme complex:
/// `g_z(point) = total weight at or above z`, one coordinate per chosen
/// element `z` (the join-irreducibles when the poset is a semilattice,
/// everything otherwise), rescaled by the largest per-cell operator norm.
fn orthoscheme_witness(p: &Poset, cells: &[Cell]) -> Witness {
    let chosen: Vec<usize> = match p.as_semilattice() {
        Ok(s) => {
            let irr = s.irreducible_indices();
            if irr.is_empty() {
                (0..p.len()).collect()
            } else {
                irr
            }
        }
        Err(_) => (0..p.len()).collect(),
    };
    let axes: Vec<String> = chosen.iter().map(|&z| p.name(z).to_string()).collect();
    // Raw images: corner x maps to the indicator of {z : z <= x}.
    let raw: Vec<Vec<Vec<f64>>> = cells
        .iter()
        .map(|cell| {
            let Cell::Simplex { corners, .. } = cell else {
                unreachable!()
            };
            corners
                .iter()
                .map(|name| {
                    let x = p.index_of(name).expect("corner names come from the poset");
                    chosen
                        .iter()
                        .map(|&z| if p.leq_idx(z, x) { 1.0 } else { 0.0 })
                        .collect()
                })
                .collect()
        })
        .collect();
    // Largest per-cell operator norm of the affine map chart -> witness.
    let mut lipschitz: f64 = 1.0;
    for (cell, images) in cells.iter().zip(&raw) {
        let Cell::Simplex { coords, .. } = cell else {
            unreachable!()
        };
        lipschitz = lipschitz.max(affine_map_norm(coords, images));
    }
    let corner_images = raw
        .into_iter()
        .map(|images| {
            Some(
                images
                    .into_iter()
                    .map(|img| img.into_iter().map(|v| v / lipschitz).collect())
                    .collect(),
            )
        })
        .collect();
    Witness {
        axes,
        cube_axes: vec![None; cells.len()],
        corner_images,
    }
}

/// Operator norm of the linear part of the affine map sending the chart
/// vertices `verts` to the witness `images`, by power iteration on the
/// Gram matrix of the map's action on the chart basis.
fn affine_map_norm(verts: &[Vec<f64>], images: &[Vec<f64>]) -> f64 {
    let d = verts.len() - 1;
    if d == 0 {
        return 0.0;
    }
    // Chart edge matrix T (columns verts[j] - verts[0]) is upper triangular
    // for orthoscheme vertex staircases; solve T c = e_j by back
    // substitution to express the chart basis in edge coordinates.
    let col = |j: usize, i: usize| verts[j + 1][i] - verts[0][i];
    let mut n_cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    for j in 0..d {
        // Solve sum_k c_k * T[., k] = e_j.
        let mut c = vec![0.0; d];
        for i in (0..d).rev() {
            let rhs = if i == j { 1.0 } else { 0.0 };
            let mut acc = rhs;
            for (k, ck) in c.iter().enumerate().skip(i + 1) {
                acc -= col(k, i) * ck;
            }
            let diag = col(i, i);
            c[i] = if diag.abs() > 1e-300 { acc / diag } else { 0.0 };
        }
        // Column j of the linear part: sum_k c_k (images[k+1] - images[0]).
        let mut n_col = vec![0.0; images[0].len()];
        for (k, ck) in c.iter().enumerate() {
            for (o, (a, b)) in n_col.iter_mut().zip(images[k + 1].iter().zip(&images[0])) {
                *o += ck * (a - b);
            }
        }
        n_cols.push(n_col);
    }
    // Power iteration on G = N^T N.
    let mut g = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            g[i * d + j] = linalg::dot(&n_cols[i], &n_cols[j]);
        }
    }
    let mut v = vec![1.0 / (d as f64).sqrt(); d];
    let mut lambda = 0.0;
    for _ in 0..200 {
        let mut w = vec![0.0; d];
        for i in 0..d {
            for j in 0..d {
                w[i] += g[i * d + j] * v[j];
            }
        }
        let n = linalg::norm(&w);
        if n < 1e-300 {
            return 0.0;
        }
        for x in &mut w {
            *x /= n;
        }
        lambda = n;
        v = w;
    }
    lambda.sqrt()
}
