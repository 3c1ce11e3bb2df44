//! Small dense linear algebra used by the geodesic solver: vector helpers,
//! Gram-Schmidt with column pivots, and a Cholesky solve with adaptive ridge
//! for the Newton systems (all matrices here are tiny).

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `a += s * b`.
pub(crate) fn axpy(a: &mut [f64], s: f64, b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += s * y;
    }
}

pub(crate) fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// Solves the symmetric positive (semi)definite system `m x = rhs` with a
/// Cholesky factorization, adding a small ridge and retrying on breakdown.
/// `m` is row-major `n x n`.
pub(crate) fn solve_spd(m: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    debug_assert_eq!(m.len(), n * n);
    let trace: f64 = (0..n).map(|i| m[i * n + i].abs()).sum::<f64>().max(1e-300);
    let mut ridge = 1e-14 * trace / n as f64;
    for _ in 0..12 {
        if let Some(x) = try_cholesky(m, rhs, ridge) {
            return Some(x);
        }
        ridge *= 100.0;
    }
    None
}

fn try_cholesky(m: &[f64], rhs: &[f64], ridge: f64) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i * n + j];
            if i == j {
                s += ridge;
            }
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    // Forward then backward substitution.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = rhs[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Some(x)
}

/// Nearest point of the convex hull of `verts` to `x`, by projecting onto
/// the affine hull and recursing into facets while negative barycentric
/// coordinates remain. Exact for the small vertex counts used here.
pub(crate) fn project_onto_hull(verts: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    debug_assert!(!verts.is_empty());
    if verts.len() == 1 {
        return verts[0].clone();
    }
    let v0 = &verts[0];
    let basis: Vec<Vec<f64>> = verts[1..].iter().map(|v| sub(v, v0)).collect();
    let k = basis.len();
    let mut gram = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    let r = sub(x, v0);
    for i in 0..k {
        for j in 0..k {
            gram[i * k + j] = dot(&basis[i], &basis[j]);
        }
        rhs[i] = dot(&basis[i], &r);
    }
    if let Some(c) = solve_spd(&gram, &rhs) {
        let lambda0 = 1.0 - c.iter().sum::<f64>();
        if lambda0 >= -1e-12 && c.iter().all(|&l| l >= -1e-12) {
            let mut p = v0.clone();
            for (ci, b) in c.iter().zip(&basis) {
                axpy(&mut p, *ci, b);
            }
            return p;
        }
        // Recurse on facets obtained by dropping a vertex with negative
        // coordinate.
        let mut lambdas = vec![lambda0];
        lambdas.extend(c.iter().copied());
        let mut best: Option<(f64, Vec<f64>)> = None;
        for (drop, &l) in lambdas.iter().enumerate() {
            if l < -1e-12 {
                let facet: Vec<Vec<f64>> = verts
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != drop)
                    .map(|(_, v)| v.clone())
                    .collect();
                let p = project_onto_hull(&facet, x);
                let d = dist(&p, x);
                if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                    best = Some((d, p));
                }
            }
        }
        if let Some((_, p)) = best {
            return p;
        }
    }
    // Degenerate affine hull: fall back to trying all facets.
    let mut best: Option<(f64, Vec<f64>)> = None;
    for drop in 0..verts.len() {
        let facet: Vec<Vec<f64>> = verts
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != drop)
            .map(|(_, v)| v.clone())
            .collect();
        let p = project_onto_hull(&facet, x);
        let d = dist(&p, x);
        if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
            best = Some((d, p));
        }
    }
    best.expect("nonempty vertex set").1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_identity() {
        let m = vec![1.0, 0.0, 0.0, 1.0];
        let x = solve_spd(&m, &[3.0, 4.0]).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-12 && (x[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn cholesky_solves_spd() {
        // [[4, 1], [1, 3]] x = [1, 2]  =>  x = [1/11, 7/11]
        let m = vec![4.0, 1.0, 1.0, 3.0];
        let x = solve_spd(&m, &[1.0, 2.0]).unwrap();
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-10);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-10);
    }

    #[test]
    fn hull_projection_inside_and_outside() {
        let tri = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        // Interior point projects to itself.
        let p = project_onto_hull(&tri, &[0.2, 0.2]);
        assert!(dist(&p, &[0.2, 0.2]) < 1e-12);
        // Outside past the hypotenuse.
        let p = project_onto_hull(&tri, &[1.0, 1.0]);
        assert!(dist(&p, &[0.5, 0.5]) < 1e-10);
        // Outside past a vertex.
        let p = project_onto_hull(&tri, &[2.0, -1.0]);
        assert!(dist(&p, &[1.0, 0.0]) < 1e-10);
    }

    #[test]
    fn hull_projection_onto_segment_in_3d() {
        let seg = vec![vec![0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        let p = project_onto_hull(&seg, &[1.0, 0.3, 1.0]);
        assert!(dist(&p, &[0.0, 0.3, 0.0]) < 1e-12);
    }
}
