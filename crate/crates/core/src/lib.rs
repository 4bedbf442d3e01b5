//! Exact touching representations of graphs by comparable axis-aligned
//! boxes: certificates, constructions, and randomized grid fragility.

pub mod construct;
pub mod fragility;
pub mod geometry;
pub mod graph;
pub mod representation;
