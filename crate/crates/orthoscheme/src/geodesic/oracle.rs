//! Independent distance oracle: shortest path in the graph of an h-net.
//!
//! Every cell gets a lattice net of mesh at most `h` (a uniform grid on
//! cubes, the barycentric lattice on simplices) with one global subdivision
//! count, so nets agree on shared faces and nodes there are identified by a
//! canonical key. Edges connect nodes sharing a cell, weighted by the
//! within-cell Euclidean distance. Any net path is a valid string, so the
//! value always bounds the true distance from above; the mesh controls how
//! far above.
//!
//! The subdivision count is the next power of two above `diameter / h`, so
//! halving `h` exactly doubles it and the nets are nested.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::linalg::{axpy, dist};

use super::{Cell, CellComplexGeometry, GeodesicError, Located};

const MAX_NODES: usize = 400_000;

/// Length of the shortest net path between the located points.
pub fn grid_oracle_distance(
    geometry: &CellComplexGeometry,
    p: &Located,
    q: &Located,
    h: f64,
) -> Result<f64, GeodesicError> {
    if h <= 0.0 {
        return Err(GeodesicError::Invalid("net mesh h must be positive".into()));
    }
    if p.placements.is_empty() || q.placements.is_empty() {
        return Err(GeodesicError::NotLocated("empty placement list".into()));
    }
    let diameter = geometry
        .cells()
        .iter()
        .map(Cell::diameter)
        .fold(0.0f64, f64::max)
        .max(1e-9);
    let mut m = 1usize;
    while (m as f64) < diameter / h {
        m *= 2;
        if m > 1 << 20 {
            return Err(GeodesicError::NetTooLarge(m));
        }
    }

    // Node identity: canonical support-form key, shared across cells.
    let mut keys: HashMap<Vec<(String, u64)>, usize> = HashMap::new();
    let mut members: Vec<Vec<(usize, Vec<f64>)>> = Vec::new();
    let mut per_cell: Vec<Vec<usize>> = vec![Vec::new(); geometry.cell_count()];
    let mut add_node = |cell: usize,
                        coords: Vec<f64>,
                        key: Vec<(String, u64)>,
                        members: &mut Vec<Vec<(usize, Vec<f64>)>>,
                        per_cell: &mut Vec<Vec<usize>>|
     -> usize {
        let id = *keys.entry(key).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        if !per_cell[cell].contains(&id) {
            members[id].push((cell, coords));
            per_cell[cell].push(id);
        }
        id
    };

    let mut total_nodes = 0usize;
    for (ci, cell) in geometry.cells().iter().enumerate() {
        match cell {
            Cell::Cube { axes } => {
                let d = axes.len();
                let count = (m + 1).pow(d as u32);
                total_nodes += count;
                if total_nodes > MAX_NODES {
                    return Err(GeodesicError::NetTooLarge(total_nodes));
                }
                let mut idx = vec![0usize; d];
                loop {
                    let coords: Vec<f64> = idx.iter().map(|&k| k as f64 / m as f64).collect();
                    let key = cube_key(axes, &coords);
                    add_node(ci, coords, key, &mut members, &mut per_cell);
                    // Odometer increment.
                    let mut j = 0;
                    loop {
                        if j == d {
                            break;
                        }
                        idx[j] += 1;
                        if idx[j] <= m {
                            break;
                        }
                        idx[j] = 0;
                        j += 1;
                    }
                    if j == d {
                        break;
                    }
                }
                if d == 0 {
                    let key = cube_key(axes, &[]);
                    add_node(ci, Vec::new(), key, &mut members, &mut per_cell);
                }
            }
            Cell::Simplex { corners, coords } => {
                let d = corners.len() - 1;
                let mut composition = vec![0usize; d + 1];
                composition[0] = m;
                loop {
                    let bary: Vec<f64> = composition.iter().map(|&k| k as f64 / m as f64).collect();
                    let mut chart = vec![0.0; d];
                    for (w, v) in bary.iter().zip(coords) {
                        axpy(&mut chart, *w, v);
                    }
                    let key = simplex_key(corners, &bary);
                    add_node(ci, chart, key, &mut members, &mut per_cell);
                    total_nodes += 1;
                    if total_nodes > MAX_NODES {
                        return Err(GeodesicError::NetTooLarge(total_nodes));
                    }
                    if !next_composition(&mut composition) {
                        break;
                    }
                }
            }
        }
    }

    // Insert the endpoints as nodes of every cell containing them.
    let mut endpoint = |loc: &Located,
                        members: &mut Vec<Vec<(usize, Vec<f64>)>>,
                        per_cell: &mut Vec<Vec<usize>>|
     -> usize {
        let mut id = usize::MAX;
        for gp in &loc.placements {
            let key = match &geometry.cells()[gp.cell] {
                Cell::Cube { axes } => cube_key(axes, &gp.coords),
                Cell::Simplex { corners, coords } => {
                    let bary = super::barycentric_in_orthoscheme(coords, &gp.coords);
                    simplex_key(corners, &bary)
                }
            };
            id = add_node(gp.cell, gp.coords.clone(), key, members, per_cell);
        }
        id
    };
    let source = endpoint(p, &mut members, &mut per_cell);
    let target = endpoint(q, &mut members, &mut per_cell);

    // Dijkstra over implicit per-cell cliques.
    let n = members.len();
    let mut best = vec![f64::INFINITY; n];
    let mut heap: BinaryHeap<Reverse<(OrdF64, usize)>> = BinaryHeap::new();
    best[source] = 0.0;
    heap.push(Reverse((OrdF64(0.0), source)));
    while let Some(Reverse((OrdF64(d), u))) = heap.pop() {
        if d > best[u] + 1e-15 {
            continue;
        }
        if u == target {
            return Ok(d);
        }
        for (cell, coords_u) in &members[u] {
            for &v in &per_cell[*cell] {
                if v == u {
                    continue;
                }
                let coords_v = members[v]
                    .iter()
                    .find(|(c, _)| c == cell)
                    .map(|(_, x)| x)
                    .expect("membership lists are consistent");
                let w = dist(coords_u, coords_v);
                if best[u] + w < best[v] - 1e-15 {
                    best[v] = best[u] + w;
                    heap.push(Reverse((OrdF64(best[v]), v)));
                }
            }
        }
    }
    if best[target].is_finite() {
        Ok(best[target])
    } else {
        Err(GeodesicError::Disconnected)
    }
}

#[derive(PartialEq)]
struct OrdF64(f64);
impl Eq for OrdF64 {}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

fn quantize(x: f64) -> u64 {
    (x * 1e12).round() as u64
}

fn cube_key(axes: &[String], coords: &[f64]) -> Vec<(String, u64)> {
    let mut key: Vec<(String, u64)> = axes
        .iter()
        .zip(coords)
        .filter(|(_, &c)| c > 1e-13)
        .map(|(a, &c)| (a.clone(), quantize(c)))
        .collect();
    key.sort();
    key
}

fn simplex_key(corners: &[String], bary: &[f64]) -> Vec<(String, u64)> {
    let mut key: Vec<(String, u64)> = corners
        .iter()
        .zip(bary)
        .filter(|(_, &w)| w > 1e-13)
        .map(|(c, &w)| (c.clone(), quantize(w)))
        .collect();
    key.sort();
    key
}

/// Advances a composition of a fixed total in colex order; false at the end.
fn next_composition(c: &mut [usize]) -> bool {
    let k = c.len();
    if k <= 1 {
        return false;
    }
    // Find the first nonzero from the left, move one unit rightward.
    let mut i = 0;
    while i < k - 1 && c[i] == 0 {
        i += 1;
    }
    if i == k - 1 {
        return false;
    }
    let head = c[i] - 1;
    c[i + 1] += 1;
    c[i] = 0;
    c[0] = head;
    true
}
