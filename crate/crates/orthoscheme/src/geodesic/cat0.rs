//! The CAT(0) comparison inequality, numerically, and the deterministic
//! flag-witness test for locally distributive semilattices.
//!
//! For points x, y, z and the geodesic γ from x to y, a CAT(0) space
//! satisfies
//!
//!   d(γ(tℓ), z)^2 <= t d(y,z)^2 + (1-t) d(x,z)^2 - t(1-t) d(x,y)^2.
//!
//! `cat0_check` reports the left side minus the right side (positive means
//! violation) together with a slack bound derived from the solver gaps.
//!
//! `flag_witness_check` decides CAT(0)-ness of the orthoscheme complex of a
//! locally distributive semilattice: it builds the down-face representation,
//! and for the canonical minimal pairwise-bounded-but-unbounded triple
//! (σ1, σ2, σ3) evaluates the comparison at x = χ_{σ1}, y = χ_{σ2},
//! z = χ_{σ3}, t = 1/2 inside the cubical cone, where the down region is
//! convex and the pairwise distances are exact integers |σi Δ σj|^(1/2).
//! A flag semilattice has no such triple and is sampled instead.

use serde::Serialize;

use crate::geometry::{embed_cc, EuclideanPoint, PLPoint};
use crate::linalg::{axpy, dist, scale};
use crate::poset::Semilattice;
use crate::representation::birkhoff;
use crate::rng::Xoshiro256;
use crate::simplicial::Face;

use super::solver::{geodesic_distance, SolverConfig};
use super::{complex_of_cc, CellComplexGeometry, GeoPoint, GeodesicError, GeodesicResult, Located};

/// Outcome of one comparison-inequality evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct Cat0Margin {
    /// lhs - rhs of the comparison inequality; positive means violation
    /// beyond the numerical slack.
    pub margin: f64,
    /// Bound on how much of the margin could be numerical: callers compare
    /// `margin` against `tol + slack`.
    pub slack: f64,
    pub d_xy: f64,
    pub d_xz: f64,
    pub d_yz: f64,
    pub d_gamma_z: f64,
}

/// Evaluates the comparison inequality at parameter `t` for located points.
pub fn cat0_check(
    geometry: &CellComplexGeometry,
    x: &Located,
    y: &Located,
    z: &Located,
    t: f64,
    cfg: &SolverConfig,
) -> Result<Cat0Margin, GeodesicError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(GeodesicError::Invalid(format!("t = {t} outside [0, 1]")));
    }
    let r_xy = run(geometry, x, y, cfg)?;
    let r_xz = run(geometry, x, z, cfg)?;
    let r_yz = run(geometry, y, z, cfg)?;
    let gamma = point_along(&r_xy, t);
    let gamma_loc = geometry.locate_geo(&gamma)?;
    let r_gz = run(geometry, &gamma_loc, z, cfg)?;

    let (d_xy, d_xz, d_yz, d_gz) = (r_xy.distance, r_xz.distance, r_yz.distance, r_gz.distance);
    let rhs = t * d_yz * d_yz + (1.0 - t) * d_xz * d_xz - t * (1.0 - t) * d_xy * d_xy;
    let margin = d_gz * d_gz - rhs;
    // Error budget: each squared distance is off by at most 2 d g + g^2 for
    // a gap g; the γ point itself moves by at most the xy gap, which the
    // d(γ, z) term inherits.
    let sq = |d: f64, g: f64| 2.0 * d * g + g * g;
    let slack = sq(d_gz, r_gz.gap + r_xy.gap)
        + t * sq(d_yz, r_yz.gap)
        + (1.0 - t) * sq(d_xz, r_xz.gap)
        + t * (1.0 - t) * sq(d_xy, r_xy.gap)
        + 1e-12;
    Ok(Cat0Margin {
        margin,
        slack,
        d_xy,
        d_xz,
        d_yz,
        d_gamma_z: d_gz,
    })
}

fn run(
    geometry: &CellComplexGeometry,
    a: &Located,
    b: &Located,
    cfg: &SolverConfig,
) -> Result<GeodesicResult, GeodesicError> {
    match geodesic_distance(geometry, a, b, cfg) {
        Ok(r) => Ok(r),
        Err(GeodesicError::BudgetExceeded { best }) if best.distance.is_finite() => Ok(best),
        Err(e) => Err(e),
    }
}

/// The point at arclength fraction `t` along a path, as a chart point.
fn point_along(result: &GeodesicResult, t: f64) -> GeoPoint {
    let total = result.path.length();
    let mut remaining = (t * total).max(0.0);
    for seg in &result.path.segments {
        let len = dist(&seg.entry, &seg.exit);
        if remaining <= len || std::ptr::eq(seg, result.path.segments.last().unwrap()) {
            let s = if len > 1e-300 {
                (remaining / len).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut coords = scale(&seg.entry, 1.0 - s);
            axpy(&mut coords, s, &seg.exit);
            return GeoPoint {
                cell: seg.cell,
                coords,
            };
        }
        remaining -= len;
    }
    let seg = result.path.segments.last().expect("paths are nonempty");
    GeoPoint {
        cell: seg.cell,
        coords: seg.exit.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cat0Verdict {
    FlagAndConsistent,
    ViolationFound,
}

/// The canonical witness triple and its evaluated margin.
#[derive(Debug, Clone, Serialize)]
pub struct TripleWitness {
    pub faces: [String; 3],
    pub margin: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlagCheckReport {
    pub is_flag: bool,
    pub verdict: Cat0Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<TripleWitness>,
    /// Largest sampled comparison margin (flag inputs only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_sampled_margin: Option<f64>,
    pub trials_run: usize,
}

#[derive(Debug, Clone)]
pub struct FlagCheckConfig {
    pub trials: usize,
    pub seed: u64,
    pub solver: SolverConfig,
}

impl Default for FlagCheckConfig {
    fn default() -> Self {
        FlagCheckConfig {
            trials: 100,
            seed: 0,
            solver: SolverConfig::default(),
        }
    }
}

/// Decides CAT(0)-consistency of the orthoscheme complex of a locally
/// distributive semilattice through its down-face representation.
///
/// Non-flag inputs yield the canonical minimal pairwise-bounded-but-
/// unbounded triple of down faces with its positive margin; flag inputs are
/// sampled (`trials` random comparisons at t = 1/2) and report the largest
/// margin seen.
pub fn flag_witness_check(
    s: &Semilattice,
    cfg: &FlagCheckConfig,
) -> Result<FlagCheckReport, GeodesicError> {
    let rep = birkhoff(s).map_err(|_| GeodesicError::NotLocallyDistributive)?;
    let oc = &rep.complex;
    let k = oc.complex();
    let df = oc
        .down_faces()
        .expect("representation orders are compatible");
    let geometry = complex_of_cc(k);

    // Pairwise bounded in DF(K) means the pairwise unions are faces (unions
    // of down sets are down sets); the triple is bounded iff the full union
    // is a face.
    let faces = df.faces();
    let mut violating: Vec<[usize; 3]> = Vec::new();
    for i in 0..faces.len() {
        for j in (i + 1)..faces.len() {
            let uij: Face = faces[i].union(&faces[j]).copied().collect();
            if !k.is_face(&uij) {
                continue;
            }
            for l in (j + 1)..faces.len() {
                let uil: Face = faces[i].union(&faces[l]).copied().collect();
                let ujl: Face = faces[j].union(&faces[l]).copied().collect();
                if k.is_face(&uil) && k.is_face(&ujl) {
                    let all: Face = uij.union(&faces[l]).copied().collect();
                    if !k.is_face(&all) {
                        violating.push([i, j, l]);
                    }
                }
            }
        }
    }

    if let Some(&[i, j, l]) = violating
        .iter()
        .min_by_key(|[i, j, l]| faces[*i].len() + faces[*j].len() + faces[*l].len())
    {
        // Evaluate the witness: x = χ_{σ1}, y = χ_{σ2}, z = χ_{σ3}, t = 1/2.
        // The pairwise segments lie in the down region, so the right side is
        // exact: squared distances are symmetric-difference sizes.
        let chi = |f: &Face| -> EuclideanPoint {
            let names: Vec<&str> = f.iter().map(|&v| k.vertex_name(v)).collect();
            EuclideanPoint::chi(&names)
        };
        let (x, y, z) = (chi(&faces[i]), chi(&faces[j]), chi(&faces[l]));
        let m = x.lerp(&y, 0.5);
        let m_loc = geometry.locate_euclidean(k, &m, 1e-9)?;
        let z_loc = geometry.locate_euclidean(k, &z, 1e-9)?;
        let r = run(&geometry, &m_loc, &z_loc, &cfg.solver)?;
        let sym = |a: &Face, b: &Face| a.symmetric_difference(b).count() as f64;
        let rhs = 0.5 * sym(&faces[j], &faces[l]) + 0.5 * sym(&faces[i], &faces[l])
            - 0.25 * sym(&faces[i], &faces[j]);
        let margin = r.distance * r.distance - rhs;
        let slack = 2.0 * r.distance * r.gap + r.gap * r.gap + 1e-12;
        return Ok(FlagCheckReport {
            is_flag: false,
            verdict: Cat0Verdict::ViolationFound,
            witness: Some(TripleWitness {
                faces: [
                    k.face_label(&faces[i]),
                    k.face_label(&faces[j]),
                    k.face_label(&faces[l]),
                ],
                margin,
                slack,
            }),
            max_sampled_margin: None,
            trials_run: 0,
        });
    }

    // Flag input: sampled consistency check inside the down region.
    let mut rng = Xoshiro256::seed_from_u64(cfg.seed);
    let df_poset = df.semilattice().poset().clone();
    let chains = df_poset.maximal_chains_idx();
    let mut max_margin = f64::NEG_INFINITY;
    let mut trials_run = 0usize;
    for _ in 0..cfg.trials {
        let mut pts = Vec::with_capacity(3);
        for _ in 0..3 {
            let chain = &chains[rng.usize_below(chains.len())];
            let labels: Vec<String> = chain
                .iter()
                .map(|&i| df_poset.name(i).to_string())
                .collect();
            let weights = rng.dirichlet(labels.len());
            let pl = PLPoint {
                chain: labels,
                weights,
            };
            let q = embed_cc(k, &pl).map_err(|e| GeodesicError::Invalid(e.to_string()))?;
            pts.push(geometry.locate_euclidean(k, &q, 1e-9)?);
        }
        let margin = cat0_check(&geometry, &pts[0], &pts[1], &pts[2], 0.5, &cfg.solver)?;
        max_margin = max_margin.max(margin.margin - margin.slack);
        trials_run += 1;
    }
    Ok(FlagCheckReport {
        is_flag: true,
        verdict: Cat0Verdict::FlagAndConsistent,
        witness: None,
        max_sampled_margin: if trials_run > 0 {
            Some(max_margin)
        } else {
            None
        },
        trials_run,
    })
}

/// Sampling-only CAT(0) testing for an arbitrary connected geometry (used
/// for semilattices outside the locally distributive theorem, where only
/// evidence is available). Returns the largest slack-adjusted margin.
pub fn sample_cat0_margins(
    geometry: &CellComplexGeometry,
    trials: usize,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<(f64, usize), GeodesicError> {
    let mut rng = Xoshiro256::seed_from_u64(seed);
    let mut max_margin = f64::NEG_INFINITY;
    let mut run_count = 0usize;
    for _ in 0..trials {
        let a = geometry.locate_geo(&geometry.sample_point(&mut rng))?;
        let b = geometry.locate_geo(&geometry.sample_point(&mut rng))?;
        let c = geometry.locate_geo(&geometry.sample_point(&mut rng))?;
        let m = cat0_check(geometry, &a, &b, &c, 0.5, cfg)?;
        max_margin = max_margin.max(m.margin - m.slack);
        run_count += 1;
    }
    Ok((max_margin, run_count))
}
