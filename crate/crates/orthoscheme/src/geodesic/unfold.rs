//! Isometric unfolding of galleries into a common Euclidean frame.
//!
//! Each cell chart is placed into `E^D` by an affine isometry chosen so that
//! consecutive placements agree on the shared face. Any orthonormal
//! completion beyond the shared face gives the same constrained optimum, so
//! the completion is chosen deterministically from standard basis vectors.

use crate::linalg::{axpy, dist, dot, norm, project_onto_hull, scale, sub};

const RANK_TOL: f64 = 1e-9;

/// An affine isometry from a `d`-dimensional chart into `E^D`, stored as an
/// orthonormal frame: `T(x) = base_to + sum_i dot(x - base_from, q_i) p_i`.
#[derive(Debug, Clone)]
pub(crate) struct Placement {
    base_from: Vec<f64>,
    base_to: Vec<f64>,
    /// Orthonormal basis of the chart (length d each).
    q: Vec<Vec<f64>>,
    /// Matching orthonormal images in `E^D`.
    p: Vec<Vec<f64>>,
}

impl Placement {
    /// The identity placement of a `d`-dimensional chart into `E^dim`.
    pub fn identity(d: usize, dim: usize) -> Placement {
        assert!(d <= dim);
        let mut q = Vec::with_capacity(d);
        let mut p = Vec::with_capacity(d);
        for j in 0..d {
            let mut ej = vec![0.0; d];
            ej[j] = 1.0;
            q.push(ej);
            let mut fj = vec![0.0; dim];
            fj[j] = 1.0;
            p.push(fj);
        }
        Placement {
            base_from: vec![0.0; d],
            base_to: vec![0.0; dim],
            q,
            p,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let r = sub(x, &self.base_from);
        let mut y = self.base_to.clone();
        for (qi, pi) in self.q.iter().zip(&self.p) {
            axpy(&mut y, dot(&r, qi), pi);
        }
        y
    }

    /// Inverse on the image: chart coordinates of an unfolded point.
    pub fn pull_back(&self, y: &[f64]) -> Vec<f64> {
        let r = sub(y, &self.base_to);
        let mut x = self.base_from.clone();
        for (qi, pi) in self.q.iter().zip(&self.p) {
            axpy(&mut x, dot(&r, pi), qi);
        }
        x
    }

    /// Builds a placement of a `d`-dimensional chart into `E^dim` that maps
    /// each anchor `from` point to its prescribed `to` image (the anchor
    /// configurations must be isometric), completed deterministically.
    pub fn from_anchors(d: usize, dim: usize, anchors: &[(Vec<f64>, Vec<f64>)]) -> Placement {
        assert!(!anchors.is_empty());
        let base_from = anchors[0].0.clone();
        let base_to = anchors[0].1.clone();
        let mut q: Vec<Vec<f64>> = Vec::new();
        let mut p: Vec<Vec<f64>> = Vec::new();
        // Paired Gram-Schmidt over the anchor differences: identical
        // combination coefficients on both sides keep the pairing isometric.
        for (from, to) in anchors.iter().skip(1) {
            let mut rq = sub(from, &base_from);
            let mut rp = sub(to, &base_to);
            for (qi, pi) in q.iter().zip(&p) {
                let c = dot(&rq, qi);
                axpy(&mut rq, -c, qi);
                axpy(&mut rp, -c, pi);
            }
            let nq = norm(&rq);
            if nq > RANK_TOL {
                q.push(scale(&rq, 1.0 / nq));
                let np = norm(&rp);
                debug_assert!(
                    (np - nq).abs() <= 1e-6 * (1.0 + nq),
                    "anchors must be isometric"
                );
                p.push(scale(&rp, 1.0 / np.max(1e-300)));
            }
        }
        // Complete the chart basis with standard directions, and choose
        // matching images orthogonal to everything placed so far.
        for j in 0..d {
            if q.len() == d {
                break;
            }
            let mut rq = vec![0.0; d];
            rq[j] = 1.0;
            for qi in &q {
                let c = dot(&rq, qi);
                axpy(&mut rq, -c, qi);
            }
            let nq = norm(&rq);
            if nq > RANK_TOL {
                q.push(scale(&rq, 1.0 / nq));
                // First standard vector of E^dim independent of p.
                let mut extension = None;
                for e in 0..dim {
                    let mut rp = vec![0.0; dim];
                    rp[e] = 1.0;
                    for pi in &p {
                        let c = dot(&rp, pi);
                        axpy(&mut rp, -c, pi);
                    }
                    let np = norm(&rp);
                    if np > RANK_TOL {
                        extension = Some(scale(&rp, 1.0 / np));
                        break;
                    }
                }
                p.push(extension.expect("dim >= d leaves room for completion"));
            }
        }
        Placement {
            base_from,
            base_to,
            q,
            p,
        }
    }
}

/// A face of a cell described in that cell's own chart.
#[derive(Debug, Clone)]
pub(crate) enum ChartFace {
    Hull {
        verts: Vec<Vec<f64>>,
    },
    UnitBox {
        origin: Vec<f64>,
        axes: Vec<Vec<f64>>,
    },
}

/// A face carried into the unfolded frame: the constraint set for one
/// breakpoint of a gallery.
#[derive(Debug, Clone)]
pub(crate) enum UFace {
    Hull {
        verts: Vec<Vec<f64>>,
    },
    /// `origin + sum u_i axes_i` with orthonormal axes and `u in [0,1]^k`.
    UnitBox {
        origin: Vec<f64>,
        axes: Vec<Vec<f64>>,
    },
}

impl ChartFace {
    pub fn unfold(&self, placement: &Placement) -> UFace {
        match self {
            ChartFace::Hull { verts } => UFace::Hull {
                verts: verts.iter().map(|v| placement.apply(v)).collect(),
            },
            ChartFace::UnitBox { origin, axes } => {
                let o = placement.apply(origin);
                let axes = axes
                    .iter()
                    .map(|a| {
                        let mut end = origin.clone();
                        axpy(&mut end, 1.0, a);
                        sub(&placement.apply(&end), &o)
                    })
                    .collect();
                UFace::UnitBox { origin: o, axes }
            }
        }
    }
}

impl UFace {
    /// Nearest point of the face to `x`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match self {
            UFace::Hull { verts } => project_onto_hull(verts, x),
            UFace::UnitBox { origin, axes } => {
                let r = sub(x, origin);
                let mut y = origin.clone();
                for a in axes {
                    let c = dot(&r, a).clamp(0.0, 1.0);
                    axpy(&mut y, c, a);
                }
                y
            }
        }
    }

    pub fn distance_to(&self, x: &[f64]) -> f64 {
        dist(&self.project(x), x)
    }

    /// Support function `max over the face of <point, dir>`.
    pub fn support(&self, dir: &[f64]) -> f64 {
        match self {
            UFace::Hull { verts } => verts
                .iter()
                .map(|v| dot(v, dir))
                .fold(f64::NEG_INFINITY, f64::max),
            UFace::UnitBox { origin, axes } => {
                dot(origin, dir) + axes.iter().map(|a| dot(a, dir).max(0.0)).sum::<f64>()
            }
        }
    }

    /// A point of the face attaining the support in direction `dir`.
    pub fn support_point(&self, dir: &[f64]) -> Vec<f64> {
        match self {
            UFace::Hull { verts } => verts
                .iter()
                .max_by(|a, b| dot(a, dir).total_cmp(&dot(b, dir)))
                .expect("faces have vertices")
                .clone(),
            UFace::UnitBox { origin, axes } => {
                let mut out = origin.clone();
                for a in axes {
                    if dot(a, dir) > 0.0 {
                        axpy(&mut out, 1.0, a);
                    }
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_placement_pads_dimension() {
        let t = Placement::identity(2, 4);
        assert_eq!(t.apply(&[1.0, 2.0]), vec![1.0, 2.0, 0.0, 0.0]);
        assert_eq!(t.pull_back(&[1.0, 2.0, 0.0, 0.0]), vec![1.0, 2.0]);
    }

    #[test]
    fn anchored_placement_is_isometric_on_anchors() {
        // Map the unit square chart so that the shared edge {(0,y)} goes to
        // the segment from (1,1) to (1,2) in E^2.
        let anchors = vec![
            (vec![0.0, 0.0], vec![1.0, 1.0]),
            (vec![0.0, 1.0], vec![1.0, 2.0]),
        ];
        let t = Placement::from_anchors(2, 2, &anchors);
        for (from, to) in &anchors {
            assert!(dist(&t.apply(from), to) < 1e-12);
        }
        // Isometry: distances preserved for arbitrary chart points.
        let a = [0.3, 0.4];
        let b = [0.9, 0.1];
        assert!((dist(&t.apply(&a), &t.apply(&b)) - dist(&a, &b)).abs() < 1e-12);
        // Pull-back inverts.
        assert!(dist(&t.pull_back(&t.apply(&a)), &a) < 1e-12);
    }

    #[test]
    fn unfolded_box_projection_and_support() {
        let t = Placement::from_anchors(
            2,
            2,
            &[
                (vec![0.0, 0.0], vec![0.0, 0.0]),
                (vec![1.0, 0.0], vec![0.0, 1.0]),
            ],
        );
        let face = ChartFace::UnitBox {
            origin: vec![0.0, 0.0],
            axes: vec![vec![1.0, 0.0]],
        };
        let u = face.unfold(&t);
        // The box is now the segment from (0,0) to (0,1).
        let p = u.project(&[1.0, 0.4]);
        assert!(dist(&p, &[0.0, 0.4]) < 1e-12);
        let p = u.project(&[-1.0, 9.0]);
        assert!(dist(&p, &[0.0, 1.0]) < 1e-12);
        assert!((u.support(&[0.0, 1.0]) - 1.0).abs() < 1e-12);
        assert!((u.support(&[0.0, -1.0]) - 0.0).abs() < 1e-12);
    }

    #[test]
    fn hull_face_unfolds_rigidly() {
        let verts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let anchors = vec![
            (vec![0.0, 0.0], vec![5.0, 5.0]),
            (vec![1.0, 0.0], vec![5.0, 6.0]),
            (vec![1.0, 1.0], vec![4.0, 6.0]),
        ];
        let t = Placement::from_anchors(2, 2, &anchors);
        let u = ChartFace::Hull { verts }.unfold(&t);
        let UFace::Hull { verts: uv } = &u else {
            panic!()
        };
        for (i, (_, to)) in anchors.iter().enumerate() {
            assert!(dist(&uv[i], to) < 1e-12);
        }
    }
}
