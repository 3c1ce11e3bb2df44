//! Cross-module invariants: the flag equivalences across complexes and
//! their face/down-face semilattices, the metric sandwich between the
//! solver, the grid oracle, and the ambient bound, and the string
//! inf-property of the intrinsic metric.

use std::collections::BTreeSet;

use orthoscheme::families;
use orthoscheme::geodesic::{
    complex_of_cc, complex_of_orthoschemes, geodesic_distance, grid_oracle_distance, GeodesicError,
    GeodesicResult, Located, SolverConfig,
};
use orthoscheme::geometry::{embed_cc, in_cc, EuclideanPoint, PLPoint};
use orthoscheme::poset::Poset;
use orthoscheme::rng::Xoshiro256;
use orthoscheme::simplicial::{Face, OrderedComplex, SimplicialComplex};

fn complex(facets: &[&[&str]]) -> SimplicialComplex {
    let owned: Vec<Vec<&str>> = facets.iter().map(|f| f.to_vec()).collect();
    SimplicialComplex::from_facets(&owned)
}

fn run(
    g: &orthoscheme::CellComplexGeometry,
    a: &Located,
    b: &Located,
    cfg: &SolverConfig,
) -> GeodesicResult {
    match geodesic_distance(g, a, b, cfg) {
        Ok(r) => r,
        Err(GeodesicError::BudgetExceeded { best }) => best,
        Err(e) => panic!("{e}"),
    }
}

// All complexes over at most `n` of the first five vertex names.
fn all_complexes_on(n: usize) -> Vec<SimplicialComplex> {
    let names = ["a", "b", "c", "d", "e"];
    let subsets: Vec<Vec<&str>> = (0u32..(1 << n))
        .map(|mask| {
            (0..n)
                .filter(|&b| mask & (1 << b) != 0)
                .map(|b| names[b])
                .collect()
        })
        .collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u64..(1 << subsets.len()) {
        let facets: Vec<Vec<&str>> = subsets
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, s)| s.clone())
            .collect();
        let k = SimplicialComplex::from_facets(&facets);
        let key: Vec<String> = k.facets().iter().map(|f| k.face_label(f)).collect();
        if seen.insert(key) {
            out.push(k);
        }
    }
    out
}

// A seeded compatible order on the vertices of K, built by closing random
// cover candidates and keeping only those that stay compatible.
fn random_compatible_order(k: &SimplicialComplex, rng: &mut Xoshiro256) -> OrderedComplex {
    let names: Vec<&str> = k.vertices().iter().map(|s| s.as_str()).collect();
    let mut covers: Vec<(usize, usize)> = Vec::new();
    for _ in 0..names.len() {
        let a = rng.usize_below(names.len().max(1));
        let b = rng.usize_below(names.len().max(1));
        if a == b {
            continue;
        }
        let mut trial = covers.clone();
        trial.push((a, b));
        let pairs: Vec<(&str, &str)> = trial.iter().map(|&(x, y)| (names[x], names[y])).collect();
        let Ok(order) = Poset::from_covers(&names, &pairs) else {
            continue;
        };
        if OrderedComplex::new(k.clone(), order).is_ok() {
            covers = trial;
        }
    }
    let pairs: Vec<(&str, &str)> = covers.iter().map(|&(x, y)| (names[x], names[y])).collect();
    let order = Poset::from_covers(&names, &pairs).unwrap();
    OrderedComplex::new(k.clone(), order).unwrap()
}

// K flag <=> F(K) flag semilattice <=> DF(K) flag semilattice, exhaustively
// over all complexes on <= 4 vertices with several compatible orders each.
#[test]
fn flag_equivalences_across_representations() {
    let mut rng = Xoshiro256::seed_from_u64(31);
    for k in all_complexes_on(4) {
        if k.is_void() {
            continue;
        }
        let flag_complex = k.is_flag();
        let fp = k.face_poset().unwrap();
        assert_eq!(
            flag_complex,
            fp.semilattice().is_flag(),
            "F(K) for {:?}",
            k.facets()
        );
        for _ in 0..3 {
            let oc = random_compatible_order(&k, &mut rng);
            let df = oc.down_faces().unwrap();
            assert_eq!(
                flag_complex,
                df.semilattice().is_flag(),
                "DF(K) for {:?} under {:?}",
                k.facets(),
                oc.vertex_order().cover_pairs()
            );
        }
    }
}

#[test]
fn oracle_sandwiches_the_solver() {
    let k = complex(&[&["a", "b"], &["b", "c"], &["a", "c"]]);
    let g = complex_of_cc(&k);
    let cfg = SolverConfig::default();
    let mut rng = Xoshiro256::seed_from_u64(5);
    for _ in 0..20 {
        let a = g.locate_geo(&g.sample_point(&mut rng)).unwrap();
        let b = g.locate_geo(&g.sample_point(&mut rng)).unwrap();
        let r = run(&g, &a, &b, &cfg);
        let mut prev = f64::INFINITY;
        for h in [0.4, 0.2, 0.1] {
            let d_net = grid_oracle_distance(&g, &a, &b, h).unwrap();
            // The net path is a string: solver distance <= net + tol, and
            // the net never undershoots the certified lower bound.
            assert!(r.distance <= d_net + cfg.tol, "{} vs {}", r.distance, d_net);
            assert!(d_net >= r.distance - r.gap - 1e-9);
            assert!(d_net <= prev + 1e-12, "nets must improve monotonically");
            prev = d_net;
        }
        // Converging together: the finest net is close to the solver value.
        assert!(prev - r.distance <= 4.0 * 0.1 * g.cell_count() as f64);
    }
}

#[test]
fn ambient_equality_certifies_straight_segments() {
    let k = complex(&[&["a", "b"], &["b", "c"]]);
    let g = complex_of_cc(&k);
    let cfg = SolverConfig::default();
    let mut rng = Xoshiro256::seed_from_u64(6);
    let mut hits = 0;
    for _ in 0..200 {
        let pa = g.sample_point(&mut rng);
        let pb = g.sample_point(&mut rng);
        let a = g.cube_point_to_euclidean(&pa).unwrap();
        let b = g.cube_point_to_euclidean(&pb).unwrap();
        let la = g.locate_euclidean(&k, &a, 1e-9).unwrap();
        let lb = g.locate_euclidean(&k, &b, 1e-9).unwrap();
        let r = run(&g, &la, &lb, &cfg);
        if (r.distance - a.distance(&b)).abs() <= cfg.tol {
            hits += 1;
            for i in 0..=100 {
                let t = i as f64 / 100.0;
                let point = a.lerp(&b, t);
                assert!(
                    in_cc(&k, &point.pruned(1e-12), 1e-6),
                    "segment leaves CC at t={t}"
                );
            }
        }
    }
    assert!(hits > 0, "no ambient-tight pairs sampled");
}

#[test]
fn strings_bound_the_distance_from_above() {
    // Any path through a vertex shared with both endpoint cells is a valid
    // string; the solver distance never exceeds its length (plus tol).
    let p = families::boolean_lattice(3);
    let g = complex_of_orthoschemes(&p).unwrap();
    let cfg = SolverConfig::default();
    let mut rng = Xoshiro256::seed_from_u64(7);
    for _ in 0..30 {
        let gp_a = g.sample_point(&mut rng);
        let gp_b = g.sample_point(&mut rng);
        let a = g.locate_geo(&gp_a).unwrap();
        let b = g.locate_geo(&gp_b).unwrap();
        let r = run(&g, &a, &b, &cfg);
        let (
            orthoscheme::geodesic::Cell::Simplex {
                corners: ca,
                coords: xa,
            },
            orthoscheme::geodesic::Cell::Simplex {
                corners: cb,
                coords: xb,
            },
        ) = (&g.cells()[gp_a.cell], &g.cells()[gp_b.cell])
        else {
            unreachable!()
        };
        for (i, name) in ca.iter().enumerate() {
            if let Some(j) = cb.iter().position(|x| x == name) {
                let through_vertex = dist(&gp_a.coords, &xa[i]) + dist(&gp_b.coords, &xb[j]);
                assert!(r.distance <= through_vertex + cfg.tol);
            }
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[test]
fn geodesics_between_down_region_points_stay_down() {
    let s = families::divisor_lattice(12).as_semilattice().unwrap();
    let rep = orthoscheme::representation::birkhoff(&s).unwrap();
    let oc = &rep.complex;
    let k = oc.complex();
    let g = complex_of_cc(k);
    let cfg = SolverConfig::default();
    let df = oc.down_faces().unwrap();
    let ambient = df.semilattice().poset().clone();
    let chains = ambient.maximal_chains_idx();
    let mut rng = Xoshiro256::seed_from_u64(8);
    for _ in 0..25 {
        let mut located = Vec::new();
        for _ in 0..2 {
            let chain = &chains[rng.usize_below(chains.len())];
            let labels: Vec<String> = chain.iter().map(|&i| ambient.name(i).to_string()).collect();
            let pl = PLPoint {
                chain: labels.clone(),
                weights: rng.dirichlet(labels.len()),
            };
            let q = embed_cc(k, &pl).unwrap();
            located.push(g.locate_euclidean(k, &q, 1e-9).unwrap());
        }
        let r = run(&g, &located[0], &located[1], &cfg);
        for seg in &r.path.segments {
            for coords in [&seg.entry, &seg.exit] {
                let point = g
                    .cube_point_to_euclidean(&orthoscheme::geodesic::GeoPoint {
                        cell: seg.cell,
                        coords: coords.clone(),
                    })
                    .unwrap();
                assert!(
                    orthoscheme::geometry::in_down_region(oc, &point, 1e-6).unwrap(),
                    "breakpoint {point:?} leaves the down region"
                );
            }
        }
    }
}

// The extract/embed pair respects membership: embedded chains of DF(K)
// always pass the down-region membership predicate.
#[test]
fn embedded_down_chains_are_members() {
    let mut rng = Xoshiro256::seed_from_u64(9);
    for _ in 0..10 {
        let s = families::random_distributive_semilattice(10, &mut rng);
        let rep = orthoscheme::representation::birkhoff(&s).unwrap();
        let k = rep.complex.complex();
        let df = rep.complex.down_faces().unwrap();
        let ambient = df.semilattice().poset().clone();
        for chain in ambient.maximal_chains_idx() {
            let labels: Vec<String> = chain.iter().map(|&i| ambient.name(i).to_string()).collect();
            let pl = PLPoint {
                chain: labels.clone(),
                weights: rng.dirichlet(labels.len()),
            };
            let q = embed_cc(k, &pl).unwrap();
            assert!(orthoscheme::geometry::in_down_region(&rep.complex, &q, 1e-9).unwrap());
            // And round-trips through the staircase.
            let back = orthoscheme::geometry::extract_cc(k, &q).unwrap();
            let q2 = embed_cc(k, &back).unwrap();
            assert!(q.distance(&q2) < 1e-9);
        }
    }
}

// Orthoscheme-side distance of F(K) equals cubical-cone distance of K,
// spot-checked here on tiny complexes (the acceptance suite runs the full
// version with five complexes and a hundred pairs each).
#[test]
fn isometry_spot_check() {
    let k = complex(&[&["a", "b"], &["b", "c"]]);
    let fp = k.face_poset().unwrap();
    let poset = fp.semilattice().poset().clone();
    let g_o = complex_of_orthoschemes(&poset).unwrap();
    let g_c = complex_of_cc(&k);
    let cfg = SolverConfig::default();
    let chains = poset.maximal_chains_idx();
    let mut rng = Xoshiro256::seed_from_u64(10);
    for _ in 0..40 {
        let mut pls = Vec::new();
        for _ in 0..2 {
            let chain = &chains[rng.usize_below(chains.len())];
            let labels: Vec<String> = chain.iter().map(|&i| poset.name(i).to_string()).collect();
            pls.push(PLPoint {
                chain: labels.clone(),
                weights: rng.dirichlet(labels.len()),
            });
        }
        let a_o = g_o.locate_pl(&poset, &pls[0]).unwrap();
        let b_o = g_o.locate_pl(&poset, &pls[1]).unwrap();
        let r_o = run(&g_o, &a_o, &b_o, &cfg);
        let qa = embed_cc(&k, &pls[0]).unwrap();
        let qb = embed_cc(&k, &pls[1]).unwrap();
        let a_c = g_c.locate_euclidean(&k, &qa, 1e-9).unwrap();
        let b_c = g_c.locate_euclidean(&k, &qb, 1e-9).unwrap();
        let r_c = run(&g_c, &a_c, &b_c, &cfg);
        assert!(
            (r_o.distance - r_c.distance).abs() <= 2e-6 + r_o.gap + r_c.gap,
            "{} vs {}",
            r_o.distance,
            r_c.distance
        );
    }
}

// Vertex pairs of the cubical cone: distances between χ faces within one
// cube equal the sqrt of the symmetric difference.
#[test]
fn chi_vertex_distances_in_one_cube() {
    let k = complex(&[&["a", "b", "c", "d"]]);
    let g = complex_of_cc(&k);
    let cfg = SolverConfig::default();
    let faces: Vec<Face> = k.all_faces();
    for fa in &faces {
        for fb in &faces {
            let names_a: Vec<&str> = fa.iter().map(|&v| k.vertex_name(v)).collect();
            let names_b: Vec<&str> = fb.iter().map(|&v| k.vertex_name(v)).collect();
            let a = EuclideanPoint::chi(&names_a);
            let b = EuclideanPoint::chi(&names_b);
            let la = g.locate_euclidean(&k, &a, 1e-9).unwrap();
            let lb = g.locate_euclidean(&k, &b, 1e-9).unwrap();
            let r = run(&g, &la, &lb, &cfg);
            let expected = (fa.symmetric_difference(fb).count() as f64).sqrt();
            assert!((r.distance - expected).abs() < 1e-9);
        }
    }
}

// The orthoscheme complex of the Boolean lattice 2^n assembles into a flat
// unit n-cube, so intrinsic distances must equal plain Euclidean distances
// of the embedded coordinates. This exercises the unfolding and the convex
// solve in dimensions 3 and 4 against an exact answer.
#[test]
fn boolean_orthoscheme_complexes_are_flat_cubes() {
    for n in [3usize, 4] {
        let p = families::boolean_lattice(n);
        let g = complex_of_orthoschemes(&p).unwrap();
        let chains = p.maximal_chains_idx();
        let cfg = SolverConfig::default();
        let mut rng = Xoshiro256::seed_from_u64(n as u64);
        for _ in 0..25 {
            let pl_a = {
                let chain = &chains[rng.usize_below(chains.len())];
                let labels: Vec<String> = chain.iter().map(|&i| p.name(i).to_string()).collect();
                PLPoint {
                    chain: labels.clone(),
                    weights: rng.dirichlet(labels.len()),
                }
            };
            let pl_b = {
                let chain = &chains[rng.usize_below(chains.len())];
                let labels: Vec<String> = chain.iter().map(|&i| p.name(i).to_string()).collect();
                PLPoint {
                    chain: labels.clone(),
                    weights: rng.dirichlet(labels.len()),
                }
            };
            // Boolean elements are faces of the full simplex; reuse the
            // cubical-cone coordinates as the flat embedding. Element names
            // are juxtaposed digits, so translate via vertex sets.
            let to_euclid = |pl: &PLPoint| -> EuclideanPoint {
                let mut coords = std::collections::BTreeMap::new();
                for (elt, w) in pl.chain.iter().zip(&pl.weights) {
                    if elt == "0" {
                        continue;
                    }
                    for ch in elt.chars() {
                        *coords.entry(ch.to_string()).or_insert(0.0) += *w;
                    }
                }
                EuclideanPoint::new(coords)
            };
            let exact = to_euclid(&pl_a).distance(&to_euclid(&pl_b));
            let a = g.locate_pl(&p, &pl_a).unwrap();
            let b = g.locate_pl(&p, &pl_b).unwrap();
            let r = run(&g, &a, &b, &cfg);
            assert!(
                (r.distance - exact).abs() <= 1e-6 + r.gap,
                "n={n}: {} vs exact {exact} (gap {})",
                r.distance,
                r.gap
            );
        }
    }
}

// Grid-oracle cross-check on a three-dimensional orthoscheme geometry.
#[test]
fn oracle_agrees_on_three_dimensional_orthoschemes() {
    let p = families::boolean_lattice(3);
    let g = complex_of_orthoschemes(&p).unwrap();
    let cfg = SolverConfig::default();
    let mut rng = Xoshiro256::seed_from_u64(12);
    for _ in 0..8 {
        let a = g.locate_geo(&g.sample_point(&mut rng)).unwrap();
        let b = g.locate_geo(&g.sample_point(&mut rng)).unwrap();
        let r = run(&g, &a, &b, &cfg);
        let net = grid_oracle_distance(&g, &a, &b, 0.3).unwrap();
        assert!(r.distance <= net + cfg.tol);
        assert!(net <= r.distance + 4.0 * 0.3 * g.cell_count() as f64);
    }
}
