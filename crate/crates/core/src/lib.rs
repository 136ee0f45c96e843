//! Free-dimension calculus for finite von Neumann algebras in normal form,
//! decomposition of weighted graph algebras into an interpolated free group
//! factor plus atoms, factor parameters along principal-graph truncations,
//! Temperley–Lieb moment enumeration, and random-matrix checks of the
//! free-Poisson atom of an edge.

#![allow(clippy::result_large_err, clippy::large_enum_variant)]

pub mod cli;
pub mod decompose;
pub mod graph;
pub mod principal;
pub mod rmt;
pub mod samples;
pub mod scalar;
pub mod tl;
pub mod vn;

pub use decompose::{decompose_direct, decompose_incremental, BuildOrder, Decomposition, Outcome};
pub use graph::{parse_graph, WeightedGraph};
pub use principal::PrincipalGraph;
pub use scalar::Scalar;
pub use vn::VNAlgebra;
