//! Orthoscheme complexes of finite semilattices: structural predicates
//! (locally distributive, locally Boolean, flag), the Birkhoff-style
//! representation through down faces of an ordered simplicial complex, the
//! cubical-cone embedding with its staircase inverse, and numerically
//! certified intrinsic geodesic distances with CAT(0) comparison testing.

pub mod families;
pub mod geodesic;
pub mod geometry;
pub mod io;
mod linalg;
pub mod poset;
pub mod representation;
pub mod rng;
pub mod simplicial;

pub use geodesic::{
    complex_of_cc, complex_of_orthoschemes, CellComplexGeometry, GeodesicError, GeodesicResult,
};
pub use geometry::{EuclideanPoint, GeometryError, OrthoschemeCell, PLPoint};
pub use poset::{Poset, PosetError, PropertyReport, Semilattice};
pub use representation::{birkhoff, boolean_representation, verify_representation, Representation};
pub use simplicial::{ComplexError, OrderedComplex, SimplicialComplex};
