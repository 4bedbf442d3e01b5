//! Builders that turn verified certificates into new verified certificates.
//!
//! Every public builder runs the matching verifier on its output and returns
//! [`ConstructError::NotVerified`] instead of an invalid certificate.

mod basic;
mod extendable;
mod ktree;
mod pipeline;

pub use basic::{
    apex_add, cocktail_party, strong_product, subgraph_extend, unit_rep_clique, unit_rep_path,
    ProductPlan,
};
pub use extendable::{
    clique_sum, make_cs_extendable, pad_dimension, promote_root, CliqueSumResult,
};
pub use ktree::{ktree_base_rep, ktree_cs_rep, treewidth_rep};
pub use pipeline::{
    pipeline_clique_sums, pipeline_minor, CliqueSumNode, CliqueSumTree, NodeSource, PipelineOutput,
    Recipe,
};

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::graph::GraphError;
use crate::representation::{
    verify_cs_rep, verify_touching_rep, CsRep, RepError, StructuralFailure, TouchingRep,
};

#[derive(Debug, Clone, Error)]
pub enum ConstructError {
    #[error("output does not verify: {0}")]
    NotVerified(String),
    #[error("input does not verify: {0}")]
    InvalidInput(String),
    #[error("box of vertex {0} is not a unit hypercube")]
    NotUnitHypercubes(usize),
    #[error("invalid coloring: {0}")]
    InvalidColoring(String),
    #[error("no dimension permutation aligns the glue clique: {0}")]
    DimensionAlignment(String),
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("cannot separate deleted edge {0}-{1}: {2}")]
    Shrink(usize, usize, String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Structural(#[from] StructuralFailure),
}

fn summarize<T: std::fmt::Debug>(items: &[T], count: usize) -> String {
    let shown: Vec<String> = items.iter().take(3).map(|x| format!("{x:?}")).collect();
    format!("{count} violation(s), e.g. {}", shown.join("; "))
}

pub(crate) fn check_touching(r: TouchingRep) -> Result<TouchingRep, ConstructError> {
    let report = verify_touching_rep(&r, true);
    if report.is_valid() {
        Ok(r)
    } else if !report.shape_errors.is_empty() {
        Err(ConstructError::NotVerified(report.shape_errors.join("; ")))
    } else {
        Err(ConstructError::NotVerified(summarize(
            &report.violations.items,
            report.violations.count,
        )))
    }
}

pub(crate) fn check_cs(c: CsRep) -> Result<CsRep, ConstructError> {
    let report = verify_cs_rep(&c);
    if report.is_valid() {
        Ok(c)
    } else if !report.touching.is_valid() {
        Err(ConstructError::NotVerified(format!(
            "{} {}",
            report.touching.shape_errors.join("; "),
            summarize(
                &report.touching.violations.items,
                report.touching.violations.count
            )
        )))
    } else {
        Err(ConstructError::NotVerified(summarize(
            &report.violations.items,
            report.violations.count,
        )))
    }
}

pub(crate) fn require_touching(r: &TouchingRep) -> Result<(), ConstructError> {
    let report = verify_touching_rep(r, true);
    if report.is_valid() {
        Ok(())
    } else {
        Err(ConstructError::InvalidInput(format!(
            "{} {}",
            report.shape_errors.join("; "),
            summarize(&report.violations.items, report.violations.count)
        )))
    }
}

pub(crate) fn require_cs(c: &CsRep) -> Result<(), ConstructError> {
    let report = verify_cs_rep(c);
    if report.is_valid() {
        Ok(())
    } else {
        Err(ConstructError::InvalidInput(summarize(
            &report.violations.items,
            report.violations.count,
        )))
    }
}
