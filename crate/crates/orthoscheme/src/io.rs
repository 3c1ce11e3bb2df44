//! Wire formats. Strict schemas: unknown keys are rejected.
//!
//! Poset: `{"elements": ["a", ...], "covers": [["a", "b"], ...]}`.
//! Complex: `{"vertices": [...], "facets": [[...], ...],
//!            "vertex_order_covers": [["v", "w"], ...]}` (order optional).
//! Points: `{"coords": {"v": 0.5, ...}}` or
//!         `{"chain": [...], "weights": [...]}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{EuclideanPoint, PLPoint};
use crate::poset::{Poset, PosetError};
use crate::simplicial::{ComplexError, OrderedComplex, SimplicialComplex};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetJson {
    pub elements: Vec<String>,
    pub covers: Vec<(String, String)>,
}

impl PosetJson {
    pub fn from_poset(p: &Poset) -> Self {
        PosetJson {
            elements: p.elements().to_vec(),
            covers: p.cover_pairs(),
        }
    }

    pub fn to_poset(&self) -> Result<Poset, PosetError> {
        let covers: Vec<(&str, &str)> = self
            .covers
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        let elements: Vec<&str> = self.elements.iter().map(|s| s.as_str()).collect();
        Poset::from_covers(&elements, &covers)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexJson {
    pub vertices: Vec<String>,
    pub facets: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex_order_covers: Option<Vec<(String, String)>>,
}

impl ComplexJson {
    pub fn from_complex(k: &SimplicialComplex) -> Self {
        ComplexJson {
            vertices: k.vertices().to_vec(),
            facets: k
                .facets()
                .iter()
                .map(|f| f.iter().map(|&v| k.vertex_name(v).to_string()).collect())
                .collect(),
            vertex_order_covers: None,
        }
    }

    pub fn from_ordered_complex(oc: &OrderedComplex) -> Self {
        let mut json = Self::from_complex(oc.complex());
        json.vertex_order_covers = Some(oc.vertex_order().cover_pairs());
        json
    }

    pub fn to_complex(&self) -> Result<SimplicialComplex, ComplexError> {
        SimplicialComplex::from_vertices_and_facets(&self.vertices, &self.facets)
    }

    /// Builds the ordered complex; a missing order means the antichain.
    pub fn to_ordered_complex(&self) -> Result<OrderedComplex, IoError> {
        let complex = self.to_complex()?;
        let covers = self.vertex_order_covers.clone().unwrap_or_default();
        let cover_refs: Vec<(&str, &str)> = covers
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        let vertex_refs: Vec<&str> = self.vertices.iter().map(|s| s.as_str()).collect();
        let order = Poset::from_covers(&vertex_refs, &cover_refs)?;
        Ok(OrderedComplex::new(complex, order)?)
    }
}

/// Either point format, detected by its keys.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointJson {
    Euclidean(EuclideanPoint),
    Support(PLPoint),
}

/// Either input object accepted by the distance command.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SpaceJson {
    Poset(PosetJson),
    Complex(ComplexJson),
}

pub fn parse_poset(text: &str) -> Result<Poset, IoError> {
    let json: PosetJson = serde_json::from_str(text)?;
    Ok(json.to_poset()?)
}

pub fn parse_complex(text: &str) -> Result<SimplicialComplex, IoError> {
    let json: ComplexJson = serde_json::from_str(text)?;
    Ok(json.to_complex()?)
}

pub fn parse_point(text: &str) -> Result<PointJson, IoError> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poset_round_trip() {
        let text = r#"{"elements": ["a", "b", "c"], "covers": [["a", "b"], ["b", "c"]]}"#;
        let p = parse_poset(text).unwrap();
        assert!(p.leq("a", "c").unwrap());
        let json = PosetJson::from_poset(&p);
        let p2 = json.to_poset().unwrap();
        assert_eq!(p, p2);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"elements": ["a"], "covers": [], "extra": 1}"#;
        assert!(matches!(parse_poset(text), Err(IoError::Parse(_))));
        let text = r#"{"vertices": ["a"], "facets": [["a"]], "bogus": true}"#;
        assert!(matches!(parse_complex(text), Err(IoError::Parse(_))));
    }

    #[test]
    fn complex_round_trip_with_order() {
        let text = r#"{"vertices": ["a", "b"], "facets": [["a", "b"]], "vertex_order_covers": [["a", "b"]]}"#;
        let json: ComplexJson = serde_json::from_str(text).unwrap();
        let oc = json.to_ordered_complex().unwrap();
        assert!(oc.vertex_order().leq("a", "b").unwrap());
        let back = ComplexJson::from_ordered_complex(&oc);
        assert_eq!(back.vertices, vec!["a", "b"]);
        assert_eq!(
            back.vertex_order_covers,
            Some(vec![("a".to_string(), "b".to_string())])
        );
    }

    #[test]
    fn incompatible_order_rejected_at_parse() {
        let text = r#"{"vertices": ["a", "b", "c"], "facets": [["a", "b"], ["c"]], "vertex_order_covers": [["c", "b"]]}"#;
        let json: ComplexJson = serde_json::from_str(text).unwrap();
        assert!(matches!(
            json.to_ordered_complex(),
            Err(IoError::Complex(_))
        ));
    }

    #[test]
    fn point_detection() {
        match parse_point(r#"{"coords": {"a": 0.5}}"#).unwrap() {
            PointJson::Euclidean(q) => assert_eq!(q.get("a"), 0.5),
            _ => panic!("expected euclidean"),
        }
        match parse_point(r#"{"chain": ["x"], "weights": [1.0]}"#).unwrap() {
            PointJson::Support(p) => assert_eq!(p.chain, vec!["x"]),
            _ => panic!("expected support form"),
        }
    }
}
