//! Command implementations behind the `orthoscheme` binary. Each command
//! takes parsed inputs and returns the JSON it would print, so the logic is
//! testable without spawning processes.
//!
//! Exit-code conventions (the binary maps errors accordingly):
//! 0 ok, 2 parse error, 3 precondition violated, 4 budget exceeded.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::json;

use orthoscheme::families;
use orthoscheme::geodesic::{
    self, flag_witness_check, geodesic_distance, CellComplexGeometry, FlagCheckConfig,
    GeodesicError, GeodesicResult, Located, SolverConfig,
};
use orthoscheme::geometry::embed_cc;
use orthoscheme::io::{ComplexJson, PointJson, PosetJson, SpaceJson};
use orthoscheme::poset::{Poset, PropertyReport};
use orthoscheme::representation::{birkhoff, RepresentationError};
use orthoscheme::rng::Xoshiro256;

#[derive(Debug)]
pub enum CliError {
    /// Exit code 2.
    Parse(String),
    /// Exit code 3.
    Precondition(String),
    /// Exit code 4; carries the best-known output.
    Budget(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Precondition(m) => write!(f, "precondition violated: {m}"),
            CliError::Budget(m) => write!(f, "budget exceeded: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Budget(_) => 4,
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("output types serialize")
}

/// `check`: all structural predicates of a poset, with witnesses.
pub fn cmd_check(poset_text: &str) -> Result<String, CliError> {
    let poset =
        orthoscheme::io::parse_poset(poset_text).map_err(|e| CliError::Parse(e.to_string()))?;
    let report = PropertyReport::analyze(&poset);
    Ok(to_json(&report))
}

/// `represent`: the ordered complex of the down-face representation plus
/// the phi table (element -> list of irreducibles below it).
pub fn cmd_represent(poset_text: &str) -> Result<String, CliError> {
    let poset =
        orthoscheme::io::parse_poset(poset_text).map_err(|e| CliError::Parse(e.to_string()))?;
    let s = poset
        .as_semilattice()
        .map_err(|e| CliError::Precondition(e.to_string()))?;
    let rep = birkhoff(&s).map_err(|e| match e {
        RepresentationError::NotLocallyDistributive(w) => {
            CliError::Precondition(format!("not locally distributive: {w:?}"))
        }
        other => CliError::Precondition(other.to_string()),
    })?;
    let complex_json = ComplexJson::from_ordered_complex(&rep.complex);
    let k = rep.complex.complex();
    let mut phi: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (x, face) in rep.phi.iter().enumerate() {
        phi.insert(
            s.poset().name(x).to_string(),
            face.iter().map(|&v| k.vertex_name(v).to_string()).collect(),
        );
    }
    Ok(to_json(&json!({ "complex": complex_json, "phi": phi })))
}

/// Solver knobs shared by the distance and cat0 commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub tol: f64,
    pub seed: u64,
    pub trials: usize,
    /// Overrides the gallery budget (galleries solved per query).
    pub budget: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tol: 1e-6,
            seed: 0,
            trials: 100,
            budget: None,
        }
    }
}

impl RunConfig {
    fn solver(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            max_galleries: self.budget,
            max_pops: self.budget.map(|b| 50 * b),
            ..SolverConfig::default()
        }
    }
}

enum Space {
    Poset(Poset, CellComplexGeometry),
    Complex(orthoscheme::SimplicialComplex, CellComplexGeometry),
}

fn parse_space(text: &str) -> Result<Space, CliError> {
    let space: SpaceJson =
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    match space {
        SpaceJson::Poset(pj) => {
            let poset = pj.to_poset().map_err(|e| CliError::Parse(e.to_string()))?;
            let geometry = geodesic::complex_of_orthoschemes(&poset)
                .map_err(|e| CliError::Precondition(e.to_string()))?;
            Ok(Space::Poset(poset, geometry))
        }
        SpaceJson::Complex(cj) => {
            let complex = cj
                .to_complex()
                .map_err(|e| CliError::Parse(e.to_string()))?;
            let geometry = geodesic::complex_of_cc(&complex);
            Ok(Space::Complex(complex, geometry))
        }
    }
}

fn locate(space: &Space, point_text: &str) -> Result<Located, CliError> {
    let point =
        orthoscheme::io::parse_point(point_text).map_err(|e| CliError::Parse(e.to_string()))?;
    match (space, point) {
        (Space::Poset(poset, geometry), PointJson::Support(p)) => geometry
            .locate_pl(poset, &p)
            .map_err(|e| CliError::Precondition(e.to_string())),
        (Space::Poset(..), PointJson::Euclidean(_)) => Err(CliError::Precondition(
            "poset spaces take support-form points (chain/weights)".into(),
        )),
        (Space::Complex(k, geometry), PointJson::Euclidean(q)) => geometry
            .locate_euclidean(k, &q, 1e-9)
            .map_err(|e| CliError::Precondition(e.to_string())),
        (Space::Complex(k, geometry), PointJson::Support(p)) => {
            // Support form over F(K): embed into the cubical cone first.
            let q = embed_cc(k, &p).map_err(|e| CliError::Precondition(e.to_string()))?;
            geometry
                .locate_euclidean(k, &q, 1e-9)
                .map_err(|e| CliError::Precondition(e.to_string()))
        }
    }
}

fn path_json(
    space: &Space,
    geometry: &CellComplexGeometry,
    r: &GeodesicResult,
) -> serde_json::Value {
    let segments: Vec<serde_json::Value> = r
        .path
        .segments
        .iter()
        .map(|seg| {
            let (entry, exit) = match space {
                Space::Complex(..) => {
                    let to_pt = |coords: &[f64]| {
                        let gp = geodesic::GeoPoint {
                            cell: seg.cell,
                            coords: coords.to_vec(),
                        };
                        serde_json::to_value(geometry.cube_point_to_euclidean(&gp).unwrap())
                            .unwrap()
                    };
                    (to_pt(&seg.entry), to_pt(&seg.exit))
                }
                Space::Poset(..) => {
                    let to_pt = |coords: &[f64]| {
                        let gp = geodesic::GeoPoint {
                            cell: seg.cell,
                            coords: coords.to_vec(),
                        };
                        serde_json::to_value(geometry.simplex_point_to_pl(&gp).unwrap()).unwrap()
                    };
                    (to_pt(&seg.entry), to_pt(&seg.exit))
                }
            };
            json!({ "cell": seg.cell_label, "entry": entry, "exit": exit })
        })
        .collect();
    serde_json::Value::Array(segments)
}

/// `distance`: intrinsic distance between two points of a poset's
/// orthoscheme complex or a complex's cubical cone.
pub fn cmd_distance(
    space_text: &str,
    p_text: &str,
    q_text: &str,
    cfg: &RunConfig,
) -> Result<String, CliError> {
    let space = parse_space(space_text)?;
    let p = locate(&space, p_text)?;
    let q = locate(&space, q_text)?;
    let geometry = match &space {
        Space::Poset(_, g) => g,
        Space::Complex(_, g) => g,
    };
    match geodesic_distance(geometry, &p, &q, &cfg.solver()) {
        Ok(r) => Ok(to_json(&json!({
            "distance": r.distance,
            "gap": r.gap,
            "path": path_json(&space, geometry, &r),
        }))),
        Err(GeodesicError::BudgetExceeded { best }) => Err(CliError::Budget(to_json(&json!({
            "distance": best.distance,
            "gap": best.gap,
            "path": path_json(&space, geometry, &best),
        })))),
        Err(e) => Err(CliError::Precondition(e.to_string())),
    }
}

/// `cat0`: CAT(0) verdict for the orthoscheme complex of a semilattice.
///
/// Locally distributive inputs get the exact flag-witness test (plus
/// sampling on flag inputs). Other semilattices fall back to sampling-only
/// evidence on the orthoscheme complex itself, stated as such.
pub fn cmd_cat0(poset_text: &str, cfg: &RunConfig) -> Result<String, CliError> {
    let poset =
        orthoscheme::io::parse_poset(poset_text).map_err(|e| CliError::Parse(e.to_string()))?;
    let s = poset
        .as_semilattice()
        .map_err(|e| CliError::Precondition(e.to_string()))?;
    let locally_distributive = s.is_locally_distributive();
    if locally_distributive {
        let fcfg = FlagCheckConfig {
            trials: cfg.trials,
            seed: cfg.seed,
            solver: cfg.solver(),
        };
        let report =
            flag_witness_check(&s, &fcfg).map_err(|e| CliError::Precondition(e.to_string()))?;
        let verdict = match report.verdict {
            geodesic::Cat0Verdict::FlagAndConsistent => "flag-and-consistent",
            geodesic::Cat0Verdict::ViolationFound => "violation-found",
        };
        let max_margin = report
            .witness
            .as_ref()
            .map(|w| w.margin)
            .or(report.max_sampled_margin)
            .unwrap_or(f64::NEG_INFINITY);
        return Ok(to_json(&json!({
            "verdict": verdict,
            "is_flag_semilattice": report.is_flag,
            "locally_distributive": true,
            "sampling_only": false,
            "max_margin": max_margin,
            "witness": report.witness,
            "trials": report.trials_run,
            "seed": cfg.seed,
            "tol": cfg.tol,
        })));
    }
    // Sampling-only path: the characterization theorem does not apply, so
    // the output is evidence, not proof.
    let is_flag = s.is_flag();
    let geometry = geodesic::complex_of_orthoschemes(s.poset())
        .map_err(|e| CliError::Precondition(e.to_string()))?;
    let (max_margin, trials_run) =
        geodesic::sample_cat0_margins(&geometry, cfg.trials, cfg.seed, &cfg.solver())
            .map_err(|e| CliError::Precondition(e.to_string()))?;
    let violation = max_margin > cfg.tol;
    let verdict = if violation {
        "violation-found"
    } else if is_flag {
        "flag-and-consistent"
    } else {
        "inconclusive"
    };
    Ok(to_json(&json!({
        "verdict": verdict,
        "is_flag_semilattice": is_flag,
        "locally_distributive": false,
        "sampling_only": true,
        "max_margin": max_margin,
        "witness": serde_json::Value::Null,
        "trials": trials_run,
        "seed": cfg.seed,
        "tol": cfg.tol,
        "note": "input is not locally distributive; sampled evidence only, not a proof",
    })))
}

/// `generate`: emit a named poset family as JSON.
pub fn cmd_generate(family: &str, arg: Option<&str>, cfg: &RunConfig) -> Result<String, CliError> {
    let parse_n = |what: &str| -> Result<u64, CliError> {
        arg.ok_or_else(|| CliError::Parse(format!("family `{what}` needs a numeric argument")))?
            .parse::<u64>()
            .map_err(|e| CliError::Parse(format!("bad argument for `{what}`: {e}")))
    };
    let poset = match family {
        "boolean" => {
            let n = parse_n("boolean")?;
            if n > 9 {
                return Err(CliError::Parse("boolean supports n <= 9".into()));
            }
            families::boolean_lattice(n as usize)
        }
        "chain" => {
            let n = parse_n("chain")?;
            if n == 0 || n > 64 {
                return Err(CliError::Parse("chain supports 1 <= n <= 64".into()));
            }
            families::chain(n as usize)
        }
        "empty-triangle" => families::empty_triangle_face_poset(),
        "diamond-m3" => families::diamond_m3(),
        "divisor" => {
            let n = parse_n("divisor")?;
            if n == 0 || n > 1_000_000 {
                return Err(CliError::Parse("divisor supports 1 <= n <= 10^6".into()));
            }
            families::divisor_lattice(n)
        }
        "ncp" => {
            let n = parse_n("ncp")?;
            if !(1..=9).contains(&n) {
                return Err(CliError::Parse("ncp supports 1 <= n <= 9".into()));
            }
            families::noncrossing_partition_lattice(n as u8)
        }
        "random-distributive" => {
            let size = arg.map(|a| a.parse::<usize>()).transpose()
                .map_err(|e| CliError::Parse(format!("bad size: {e}")))?
                .unwrap_or(12);
            if size == 0 || size > 64 {
                return Err(CliError::Parse("random-distributive supports 1 <= size <= 64".into()));
            }
            let mut rng = Xoshiro256::seed_from_u64(cfg.seed);
            let s = families::random_distributive_semilattice(size, &mut rng);
            s.poset().clone()
        }
        other => {
            return Err(CliError::Parse(format!(
                "unknown family `{other}`; expected boolean, chain, empty-triangle, diamond-m3, divisor, random-distributive, or ncp"
            )))
        }
    };
    Ok(to_json(&PosetJson::from_poset(&poset)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generated(family: &str, arg: Option<&str>) -> String {
        cmd_generate(family, arg, &RunConfig::default()).unwrap()
    }

    #[test]
    fn generate_boolean_two_is_the_square_lattice() {
        let out = generated("boolean", Some("2"));
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["elements"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn generate_ncp3_has_five_elements() {
        let out = generated("ncp", Some("3"));
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["elements"].as_array().unwrap().len(), 5);
    }

    #[test]
    fn generate_divisor_12_has_six_elements() {
        let out = generated("divisor", Some("12"));
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["elements"].as_array().unwrap().len(), 6);
    }

    #[test]
    fn generated_posets_reparse() {
        for (family, arg) in [
            ("boolean", Some("3")),
            ("chain", Some("4")),
            ("empty-triangle", None),
            ("diamond-m3", None),
            ("divisor", Some("30")),
            ("ncp", Some("4")),
            ("random-distributive", Some("10")),
        ] {
            let out = generated(family, arg);
            let p = orthoscheme::io::parse_poset(&out).unwrap();
            assert!(p.len() >= 1);
            let again = cmd_generate(family, arg, &RunConfig::default()).unwrap();
            assert_eq!(out, again, "fixed seed must give identical output");
        }
    }

    #[test]
    fn check_reports_empty_triangle_flag_witness() {
        let poset = generated("empty-triangle", None);
        let out = cmd_check(&poset).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["is_flag"], false);
        assert_eq!(v["is_locally_boolean"], true);
        let w = &v["witnesses"]["not_flag"];
        assert_eq!(w["x"], "{a}");
        assert_eq!(w["y"], "{b}");
        assert_eq!(w["z"], "{c}");
    }

    #[test]
    fn check_reports_boolean_all_true() {
        let out = cmd_check(&generated("boolean", Some("3"))).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        for key in [
            "is_semilattice",
            "is_locally_distributive",
            "is_locally_boolean",
            "is_flag",
        ] {
            assert_eq!(v[key], true, "{key}");
        }
    }

    #[test]
    fn check_reports_m3_not_distributive() {
        let out = cmd_check(&generated("diamond-m3", None)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["is_locally_distributive"], false);
        assert!(v["witnesses"]["not_locally_distributive"].is_object());
    }

    #[test]
    fn generate_rejects_empty_chain() {
        assert!(matches!(
            cmd_generate("chain", Some("0"), &RunConfig::default()),
            Err(CliError::Parse(_))
        ));
    }

    #[test]
    fn check_rejects_bad_json() {
        assert!(matches!(cmd_check("{"), Err(CliError::Parse(_))));
    }

    #[test]
    fn represent_divisor_12() {
        let out = cmd_represent(&generated("divisor", Some("12"))).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let verts = v["complex"]["vertices"].as_array().unwrap();
        assert_eq!(verts.len(), 3);
        assert_eq!(v["phi"]["12"].as_array().unwrap().len(), 3);
        assert_eq!(v["phi"]["1"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn represent_rejects_m3() {
        let err = cmd_represent(&generated("diamond-m3", None)).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn distance_square_diagonal() {
        let space = r#"{"vertices": ["a", "b"], "facets": [["a", "b"]]}"#;
        let out = cmd_distance(
            space,
            r#"{"coords": {}}"#,
            r#"{"coords": {"a": 1.0, "b": 1.0}}"#,
            &RunConfig::default(),
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!((v["distance"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn distance_on_poset_space() {
        let space = generated("boolean", Some("2"));
        let out = cmd_distance(
            &space,
            r#"{"chain": ["0"], "weights": [1.0]}"#,
            r#"{"chain": ["12"], "weights": [1.0]}"#,
            &RunConfig::default(),
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!((v["distance"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn cat0_empty_triangle_finds_violation() {
        let out = cmd_cat0(&generated("empty-triangle", None), &RunConfig::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["verdict"], "violation-found");
        let margin = v["max_margin"].as_f64().unwrap();
        assert!((margin - 1.0).abs() < 0.01, "margin {margin}");
    }

    #[test]
    fn cat0_boolean_consistent() {
        let cfg = RunConfig {
            trials: 10,
            ..Default::default()
        };
        let out = cmd_cat0(&generated("boolean", Some("3")), &cfg).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["verdict"], "flag-and-consistent");
        assert_eq!(v["sampling_only"], false);
    }

    #[test]
    fn cat0_ncp4_samples_without_proof() {
        let cfg = RunConfig {
            trials: 5,
            ..Default::default()
        };
        let out = cmd_cat0(&generated("ncp", Some("4")), &cfg).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["verdict"], "flag-and-consistent");
        assert_eq!(v["sampling_only"], true);
        assert_eq!(v["locally_distributive"], false);
        assert!(v["note"].as_str().unwrap().contains("not a proof"));
    }
}
