//! Certificates for touching box representations and their exact verifiers.
//!
//! Three flavors are supported: plain touching representations, clique-sum
//! extendable representations ([`CsRep`]) that carry a root clique and a point
//! for every clique, and ordered envelope representations used by the
//! fragility sampler.

mod cs;
mod envelope;
mod io;

pub use cs::{
    max_valid_epsilon, verify_cs_rep, verify_cs_rep_with, CsRep, CsReport, CsViolation,
    StructuralFailure,
};
pub use envelope::{
    envelope_from_boxes, thickness_of_boxes, verify_envelope_rep, Ball, EnvViolation, EnvelopeRep,
    EnvelopeReport, InnerSet,
};
pub use io::{
    from_json_str, read_certificate, read_cs_rep, read_envelope_rep, read_touching_rep,
    to_json_string, Certificate, CertificateError, CertificateKind, ParseMode,
};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{BoxNd, BoxRelation, Comparability, RankedBoxes, Rational};
use crate::graph::Graph;

/// Witness lists keep at most this many entries (the count stays exact).
pub const MAX_WITNESSES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RepError {
    #[error("expected {expected} boxes, found {found}")]
    BoxCount { expected: usize, found: usize },
    #[error("box of vertex {vertex} has dimension {found}, expected {expected}")]
    BoxDimension {
        vertex: usize,
        expected: usize,
        found: usize,
    },
    #[error("representation is not comparable")]
    NotComparable,
    #[error("representation does not verify: {0}")]
    NotVerified(String),
}

/// A bounded list of violation witnesses together with the total count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witnesses<T> {
    pub count: usize,
    pub items: Vec<T>,
}

impl<T> Default for Witnesses<T> {
    fn default() -> Self {
        Witnesses {
            count: 0,
            items: Vec::new(),
        }
    }
}

impl<T> Witnesses<T> {
    pub fn push(&mut self, item: T) {
        self.count += 1;
        if self.items.len() < MAX_WITNESSES {
            self.items.push(item);
        }
    }

    pub fn extend(&mut self, other: Witnesses<T>) {
        self.count += other.count;
        let room = MAX_WITNESSES.saturating_sub(self.items.len());
        self.items.extend(other.items.into_iter().take(room));
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

/// Vertex `v` is represented by `boxes[v]`; every box has dimension `dim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TouchingRep {
    pub graph: Graph,
    pub dim: usize,
    pub boxes: Vec<BoxNd>,
}

impl TouchingRep {
    pub fn new(graph: Graph, dim: usize, boxes: Vec<BoxNd>) -> Result<Self, RepError> {
        if boxes.len() != graph.n() {
            return Err(RepError::BoxCount {
                expected: graph.n(),
                found: boxes.len(),
            });
        }
        if let Some((vertex, b)) = boxes.iter().enumerate().find(|(_, b)| b.dim() != dim) {
            return Err(RepError::BoxDimension {
                vertex,
                expected: dim,
                found: b.dim(),
            });
        }
        Ok(TouchingRep { graph, dim, boxes })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Vertices sorted by non-increasing box volume, ties broken by id.
    pub fn volume_order(&self) -> Vec<usize> {
        let vols: Vec<Rational> = self.boxes.iter().map(BoxNd::volume).collect();
        let mut order: Vec<usize> = (0..self.n()).collect();
        order.sort_by(|&a, &b| vols[b].cmp(&vols[a]).then(a.cmp(&b)));
        order
    }

    /// Largest absolute value of any box coordinate.
    pub fn max_abs_coord(&self) -> Rational {
        self.boxes
            .iter()
            .flat_map(|b| b.sides().iter().flat_map(|s| [s.lo().abs(), s.hi().abs()]))
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// The graph realized by the boxes: vertices adjacent iff their boxes meet.
    pub fn intersection_graph(&self) -> Graph {
        let ranked = RankedBoxes::new(self.dim, &self.boxes);
        let mut g = Graph::empty(self.n());
        for u in 0..self.n() {
            for v in u + 1..self.n() {
                if ranked.intersects(u, v) {
                    g.ensure_edge(u, v);
                }
            }
        }
        g
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PairFault {
    InteriorOverlap,
    EdgeNotTouching,
    NonEdgeTouching,
    Incomparable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairViolation {
    pub u: usize,
    pub v: usize,
    pub fault: PairFault,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TouchingReport {
    pub dim: usize,
    pub comparable_checked: bool,
    pub shape_errors: Vec<String>,
    pub violations: Witnesses<PairViolation>,
}

impl TouchingReport {
    pub fn is_valid(&self) -> bool {
        self.shape_errors.is_empty() && self.violations.is_empty()
    }
}

/// Checks every pair of boxes: interiors disjoint, touching exactly on edges,
/// and (optionally) comparable.
pub fn verify_touching_rep(r: &TouchingRep, require_comparable: bool) -> TouchingReport {
    let mut report = TouchingReport {
        dim: r.dim,
        comparable_checked: require_comparable,
        shape_errors: Vec::new(),
        violations: Witnesses::default(),
    };
    if r.dim == 0 {
        report
            .shape_errors
            .push("dimension must be positive".into());
    }
    if r.boxes.len() != r.n() {
        report
            .shape_errors
            .push(format!("{} boxes for {} vertices", r.boxes.len(), r.n()));
    }
    for (v, b) in r.boxes.iter().enumerate() {
        if b.dim() != r.dim {
            report
                .shape_errors
                .push(format!("box of vertex {v} has dimension {}", b.dim()));
        }
    }
    if !report.shape_errors.is_empty() {
        return report;
    }
    let ranked = RankedBoxes::new(r.dim, &r.boxes);
    let per_vertex: Vec<Witnesses<PairViolation>> = (0..r.n())
        .into_par_iter()
        .map(|u| {
            let mut w = Witnesses::default();
            for v in u + 1..r.n() {
                let edge = r.graph.has_edge(u, v);
                let fault = match ranked.relation(u, v) {
                    BoxRelation::InteriorOverlap => Some(PairFault::InteriorOverlap),
                    BoxRelation::Disjoint if edge => Some(PairFault::EdgeNotTouching),
                    BoxRelation::Touch if !edge => Some(PairFault::NonEdgeTouching),
                    _ => None,
                };
                if let Some(fault) = fault {
                    w.push(PairViolation { u, v, fault });
                }
                if require_comparable && ranked.comparable(u, v) == Comparability::Incomparable {
                    w.push(PairViolation {
                        u,
                        v,
                        fault: PairFault::Incomparable,
                    });
                }
            }
            w
        })
        .collect();
    for w in per_vertex {
        report.violations.extend(w);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rat, Interval};

    pub(crate) fn corner_k4() -> TouchingRep {
        let unit = |neg: bool| {
            if neg {
                Interval::of(rat(-1, 1), rat(0, 1))
            } else {
                Interval::of(rat(0, 1), rat(1, 1))
            }
        };
        let boxes = (0..4)
            .map(|m| BoxNd::new(vec![unit(m & 1 == 0), unit(m & 2 == 0)]).unwrap())
            .collect();
        TouchingRep::new(Graph::complete(4), 2, boxes).unwrap()
    }

    #[test]
    fn corner_clique_verifies() {
        let r = verify_touching_rep(&corner_k4(), true);
        assert!(r.is_valid(), "{r:?}");
    }

    #[test]
    fn single_vertex_verifies() {
        let b = BoxNd::cube(3, rat(2, 1), rat(7, 3)).unwrap();
        let r = TouchingRep::new(Graph::empty(1), 3, vec![b]).unwrap();
        assert!(verify_touching_rep(&r, true).is_valid());
    }

    #[test]
    fn overlapping_squares_fail_with_witness() {
        let a = BoxNd::cube(2, rat(0, 1), rat(1, 1)).unwrap();
        let b = BoxNd::cube(2, rat(1, 2), rat(3, 2)).unwrap();
        let r = TouchingRep::new(Graph::empty(2), 2, vec![a, b]).unwrap();
        let rep = verify_touching_rep(&r, true);
        assert_eq!(
            rep.violations.items,
            vec![PairViolation {
                u: 0,
                v: 1,
                fault: PairFault::InteriorOverlap
            }]
        );
    }

    #[test]
    fn missing_and_spurious_touches() {
        let a = BoxNd::cube(1, rat(0, 1), rat(1, 1)).unwrap();
        let b = BoxNd::cube(1, rat(1, 1), rat(2, 1)).unwrap();
        let c = BoxNd::cube(1, rat(3, 1), rat(4, 1)).unwrap();
        let g = Graph::from_edges(3, [(1, 2)]).unwrap();
        let r = TouchingRep::new(g, 1, vec![a, b, c]).unwrap();
        let faults: Vec<PairFault> = verify_touching_rep(&r, false)
            .violations
            .items
            .iter()
            .map(|p| p.fault)
            .collect();
        assert_eq!(
            faults,
            vec![PairFault::NonEdgeTouching, PairFault::EdgeNotTouching]
        );
    }

    #[test]
    fn incomparable_pair_is_reported() {
        let a = BoxNd::new(vec![
            Interval::of(rat(0, 1), rat(2, 1)),
            Interval::of(rat(0, 1), rat(1, 1)),
        ])
        .unwrap();
        let b = BoxNd::new(vec![
            Interval::of(rat(2, 1), rat(3, 1)),
            Interval::of(rat(0, 1), rat(3, 1)),
        ])
        .unwrap();
        let r = TouchingRep::new(Graph::path(2), 2, vec![a, b]).unwrap();
        assert!(verify_touching_rep(&r, false).is_valid());
        let rep = verify_touching_rep(&r, true);
        assert_eq!(
            rep.violations.items,
            vec![PairViolation {
                u: 0,
                v: 1,
                fault: PairFault::Incomparable
            }]
        );
    }

    #[test]
    fn volume_order_breaks_ties_by_id() {
        let small = BoxNd::cube(1, rat(0, 1), rat(1, 2)).unwrap();
        let big = BoxNd::cube(1, rat(5, 1), rat(6, 1)).unwrap();
        let r =
            TouchingRep::new(Graph::empty(3), 1, vec![small.clone(), big.clone(), big]).unwrap();
        assert_eq!(r.volume_order(), vec![1, 2, 0]);
    }
}
