use serde::{Deserialize, Serialize};

use super::{verify_touching_rep, RepError, TouchingRep, Witnesses};
use crate::geometry::{box_sqsubseteq_s, BoxNd, CoordTable, RankedBoxes, Rational};
use crate::graph::{max_clique_size_capped, Graph};

/// A closed ball given by its center and squared radius. Balls are carried
/// as declared inner sets: their fit parameters are trusted, not verified.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ball {
    pub center: Vec<Rational>,
    pub radius_sq: Rational,
}

impl Ball {
    fn dist_sq_to(&self, lo: &[Rational], hi: &[Rational]) -> Rational {
        self.center
            .iter()
            .zip(lo.iter().zip(hi))
            .map(|(c, (l, h))| {
                let gap = if c < l {
                    l - c
                } else if c > h {
                    c - h
                } else {
                    Rational::zero()
                };
                &gap * &gap
            })
            .sum()
    }

    pub fn meets_box(&self, b: &BoxNd) -> bool {
        let (lo, hi) = bounds(b);
        self.dist_sq_to(&lo, &hi) <= self.radius_sq
    }

    /// Intersection with the open box `(lo, hi)`.
    pub fn meets_open_box(&self, lo: &[Rational], hi: &[Rational]) -> bool {
        self.dist_sq_to(lo, hi) < self.radius_sq
    }

    pub fn inside_box(&self, b: &BoxNd) -> bool {
        self.center.iter().zip(b.sides()).all(|(c, s)| {
            let (a, z) = (c - s.lo(), s.hi() - c);
            !a.is_negative()
                && !z.is_negative()
                && &a * &a >= self.radius_sq
                && &z * &z >= self.radius_sq
        })
    }
}

fn bounds(b: &BoxNd) -> (Vec<Rational>, Vec<Rational>) {
    (
        b.sides().iter().map(|s| s.lo().clone()).collect(),
        b.sides().iter().map(|s| s.hi().clone()).collect(),
    )
}

/// The inner set of a vertex: a box, or a declared ball.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InnerSet {
    Box(BoxNd),
    Ball(Ball),
}

impl InnerSet {
    pub fn as_box(&self) -> Option<&BoxNd> {
        match self {
            InnerSet::Box(b) => Some(b),
            InnerSet::Ball(_) => None,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            InnerSet::Box(b) => b.dim(),
            InnerSet::Ball(b) => b.center.len(),
        }
    }

    pub fn meets_box(&self, other: &BoxNd) -> bool {
        match self {
            InnerSet::Box(b) => b.intersects(other),
            InnerSet::Ball(b) => b.meets_box(other),
        }
    }

    /// Whether the set meets the open box `(lo, hi)`.
    pub fn meets_open_box(&self, lo: &[Rational], hi: &[Rational]) -> bool {
        match self {
            InnerSet::Box(b) => b
                .sides()
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(s, (l, h))| s.lo() < h && l < s.hi()),
            InnerSet::Ball(b) => b.meets_open_box(lo, hi),
        }
    }

    pub fn inside(&self, outer: &BoxNd) -> bool {
        match self {
            InnerSet::Box(b) => outer.contains(b),
            InnerSet::Ball(b) => b.inside_box(outer),
        }
    }
}

/// Ordered pairs `(inner(v), outer(v))`: later outer boxes fit an `s`-th of
/// themselves into earlier inner sets, edges are witnessed by later outer
/// boxes meeting earlier inner sets, and no point lies in more than `t`
/// inner sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvelopeRep {
    pub graph: Graph,
    pub dim: usize,
    pub order: Vec<usize>,
    pub inner: Vec<InnerSet>,
    pub outer: Vec<BoxNd>,
    pub s: u64,
    pub t: u64,
}

impl EnvelopeRep {
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn has_declared_sets(&self) -> bool {
        self.inner.iter().any(|i| i.as_box().is_none())
    }

    /// Position of each vertex in `order`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![usize::MAX; self.n()];
        for (i, &v) in self.order.iter().enumerate() {
            if v < pos.len() {
                pos[v] = i;
            }
        }
        pos
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum EnvViolation {
    Shape(String),
    InnerNotInOuter(usize),
    NotSqsubseteq { earlier: usize, later: usize },
    EdgeMiss { earlier: usize, later: usize },
    Thickness { declared: u64, found: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnvelopeReport {
    /// Exact thickness of the inner boxes; `None` when any inner set is
    /// declared rather than a box.
    pub thickness: Option<usize>,
    pub declared_unverified: bool,
    pub violations: Witnesses<EnvViolation>,
}

impl EnvelopeReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Largest number of the closed boxes sharing a common point. Boxes have the
/// Helly property, so this is the clique number of their intersection graph.
pub fn thickness_of_boxes(dim: usize, boxes: &[BoxNd]) -> usize {
    if boxes.is_empty() {
        return 0;
    }
    let ranked = RankedBoxes::new(dim, boxes);
    let mut g = Graph::empty(boxes.len());
    for a in 0..boxes.len() {
        for b in a + 1..boxes.len() {
            if ranked.intersects(a, b) {
                g.ensure_edge(a, b);
            }
        }
    }
    max_clique_size_capped(&g, usize::MAX).expect("no cap")
}

pub fn verify_envelope_rep(e: &EnvelopeRep) -> EnvelopeReport {
    let mut violations = Witnesses::default();
    let n = e.n();
    let declared = e.has_declared_sets();
    let mut shape = Vec::new();
    if e.inner.len() != n || e.outer.len() != n {
        shape.push(format!("expected {n} inner and outer sets"));
    }
    let pos = e.positions();
    if e.order.len() != n || pos.contains(&usize::MAX) {
        shape.push("order is not a permutation of the vertices".into());
    }
    if e.s == 0 || e.t == 0 || e.dim == 0 {
        shape.push("s, t and dim must be positive".into());
    }
    if e.inner.iter().any(|i| i.dim() != e.dim) || e.outer.iter().any(|b| b.dim() != e.dim) {
        shape.push("set of wrong dimension".into());
    }
    if !shape.is_empty() {
        for s in shape {
            violations.push(EnvViolation::Shape(s));
        }
        return EnvelopeReport {
            thickness: None,
            declared_unverified: declared,
            violations,
        };
    }

    for v in 0..n {
        if !e.inner[v].inside(&e.outer[v]) {
            violations.push(EnvViolation::InnerNotInOuter(v));
        }
    }

    for (u, v) in e.graph.edges() {
        let (earlier, later) = if pos[u] < pos[v] { (u, v) } else { (v, u) };
        if !e.inner[earlier].meets_box(&e.outer[later]) {
            violations.push(EnvViolation::EdgeMiss { earlier, later });
        }
    }

    let thickness = if declared {
        None
    } else {
        let inner: Vec<BoxNd> = e
            .inner
            .iter()
            .map(|i| i.as_box().expect("all boxes").clone())
            .collect();
        // Side-length ranks across inner and outer boxes give a fast path:
        // a later box no longer than the earlier one in every dimension fits
        // entirely.
        let mut lens = CoordTable::builder(e.dim);
        for b in inner.iter().chain(&e.outer) {
            for (j, s) in b.sides().iter().enumerate() {
                lens.push(j, s.len());
            }
        }
        let lens = lens.finish();
        let rank = |b: &BoxNd| -> Vec<u32> {
            b.sides()
                .iter()
                .enumerate()
                .map(|(j, s)| lens.rank(j, &s.len()))
                .collect()
        };
        let inner_r: Vec<Vec<u32>> = inner.iter().map(rank).collect();
        let outer_r: Vec<Vec<u32>> = e.outer.iter().map(rank).collect();
        for (i, &vi) in e.order.iter().enumerate() {
            for &vj in &e.order[i + 1..] {
                let fits = outer_r[vj].iter().zip(&inner_r[vi]).all(|(a, b)| a <= b);
                if !fits
                    && !box_sqsubseteq_s(&e.outer[vj], &inner[vi], e.s).expect("equal dimensions")
                {
                    violations.push(EnvViolation::NotSqsubseteq {
                        earlier: vi,
                        later: vj,
                    });
                }
            }
        }
        let t = thickness_of_boxes(e.dim, &inner);
        if t as u64 > e.t {
            violations.push(EnvViolation::Thickness {
                declared: e.t,
                found: t,
            });
        }
        Some(t)
    };
    EnvelopeReport {
        thickness,
        declared_unverified: declared,
        violations,
    }
}

/// The envelope `(f, f)` of a comparable touching representation, ordered by
/// non-increasing volume, with `s = 1` and the exact thickness.
pub fn envelope_from_boxes(r: &TouchingRep) -> Result<EnvelopeRep, RepError> {
    let report = verify_touching_rep(r, true);
    if !report.is_valid() {
        return Err(RepError::NotComparable);
    }
    let t = thickness_of_boxes(r.dim, &r.boxes).max(1) as u64;
    Ok(EnvelopeRep {
        graph: r.graph.clone(),
        dim: r.dim,
        order: r.volume_order(),
        inner: r.boxes.iter().cloned().map(InnerSet::Box).collect(),
        outer: r.boxes.clone(),
        s: 1,
        t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rat, Interval};

    fn corner(d: usize) -> TouchingRep {
        let boxes = (0..1usize << d)
            .map(|m| {
                BoxNd::new(
                    (0..d)
                        .map(|j| {
                            if m >> j & 1 == 1 {
                                Interval::of(rat(0, 1), rat(1, 1))
                            } else {
                                Interval::of(rat(-1, 1), rat(0, 1))
                            }
                        })
                        .collect(),
                )
                .unwrap()
            })
            .collect();
        TouchingRep::new(Graph::complete(1 << d), d, boxes).unwrap()
    }

    /// Thickness by brute force over the coordinate arrangement: every
    /// candidate point takes each coordinate from the endpoints and the
    /// midpoints between consecutive endpoints.
    fn arrangement_thickness(boxes: &[BoxNd]) -> usize {
        let d = boxes[0].dim();
        let axes: Vec<Vec<Rational>> = (0..d)
            .map(|j| {
                let mut xs: Vec<Rational> = boxes
                    .iter()
                    .flat_map(|b| [b.side(j).lo().clone(), b.side(j).hi().clone()])
                    .collect();
                xs.sort();
                xs.dedup();
                let mids: Vec<Rational> =
                    xs.windows(2).map(|w| (&w[0] + &w[1]) * rat(1, 2)).collect();
                xs.extend(mids);
                xs
            })
            .collect();
        let mut best = 0;
        let mut idx = vec![0usize; d];
        loop {
            let pt: Vec<Rational> = (0..d).map(|j| axes[j][idx[j]].clone()).collect();
            best = best.max(boxes.iter().filter(|b| b.contains_point(&pt)).count());
            let mut j = 0;
            loop {
                if j == d {
                    return best;
                }
                idx[j] += 1;
                if idx[j] < axes[j].len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
    }

    #[test]
    fn corner_cliques_have_full_thickness() {
        for d in 1..=3 {
            let r = corner(d);
            let e = envelope_from_boxes(&r).unwrap();
            assert_eq!(e.t, 1 << d);
            assert_eq!(arrangement_thickness(&r.boxes), 1 << d);
            assert!(verify_envelope_rep(&e).is_valid());
        }
    }

    #[test]
    fn disjoint_intervals_have_thickness_one() {
        let boxes = vec![
            BoxNd::cube(1, rat(0, 1), rat(1, 1)).unwrap(),
            BoxNd::cube(1, rat(2, 1), rat(3, 1)).unwrap(),
        ];
        let r = TouchingRep::new(Graph::empty(2), 1, boxes).unwrap();
        assert_eq!(envelope_from_boxes(&r).unwrap().t, 1);
    }

    #[test]
    fn reversed_order_breaks_fit() {
        let small = BoxNd::cube(2, rat(0, 1), rat(1, 1)).unwrap();
        let big = BoxNd::cube(2, rat(1, 1), rat(3, 1)).unwrap();
        let r = TouchingRep::new(Graph::path(2), 2, vec![small, big]).unwrap();
        let mut e = envelope_from_boxes(&r).unwrap();
        assert_eq!(e.order, vec![1, 0]);
        assert!(verify_envelope_rep(&e).is_valid());
        e.order = vec![0, 1];
        let rep = verify_envelope_rep(&e);
        assert_eq!(
            rep.violations.items,
            vec![EnvViolation::NotSqsubseteq {
                earlier: 0,
                later: 1
            }]
        );
    }

    #[test]
    fn single_vertex_is_trivial() {
        let r = TouchingRep::new(
            Graph::empty(1),
            2,
            vec![BoxNd::cube(2, rat(0, 1), rat(1, 1)).unwrap()],
        )
        .unwrap();
        let e = envelope_from_boxes(&r).unwrap();
        assert!(verify_envelope_rep(&e).is_valid());
        assert_eq!(e.t, 1);
    }

    #[test]
    fn ball_predicates() {
        let ball = Ball {
            center: vec![rat(0, 1), rat(0, 1)],
            radius_sq: rat(1, 1),
        };
        let unit = BoxNd::cube(2, rat(-1, 1), rat(1, 1)).unwrap();
        assert!(ball.inside_box(&unit));
        let corner = BoxNd::cube(2, rat(1, 1), rat(2, 1)).unwrap();
        assert!(!ball.meets_box(&corner));
        let edge = BoxNd::new(vec![
            Interval::of(rat(1, 1), rat(2, 1)),
            Interval::of(rat(-1, 1), rat(1, 1)),
        ])
        .unwrap();
        assert!(ball.meets_box(&edge));
        assert!(!ball.meets_open_box(&[rat(1, 1), rat(-1, 1)], &[rat(2, 1), rat(1, 1)]));
        assert!(ball.meets_open_box(&[rat(1, 2), rat(-1, 1)], &[rat(2, 1), rat(1, 1)]));
    }

    #[test]
    fn declared_balls_skip_geometry() {
        let ball = InnerSet::Ball(Ball {
            center: vec![rat(1, 2)],
            radius_sq: rat(1, 16),
        });
        let e = EnvelopeRep {
            graph: Graph::empty(1),
            dim: 1,
            order: vec![0],
            inner: vec![ball],
            outer: vec![BoxNd::cube(1, rat(0, 1), rat(1, 1)).unwrap()],
            s: 3,
            t: 1,
        };
        let r = verify_envelope_rep(&e);
        assert!(r.is_valid());
        assert!(r.declared_unverified);
        assert_eq!(r.thickness, None);
    }
}
