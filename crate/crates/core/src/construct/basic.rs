use std::collections::BTreeSet;

use super::{check_touching, require_touching, ConstructError};
use crate::geometry::{rat, BoxNd, Interval, Rational};
use crate::graph::{verify_coloring, Coloring, ColoringKind, Graph};
use crate::representation::TouchingRep;

/// Adds a vertex `v = r.n()` adjacent exactly to `neighbors`.
///
/// Neighbors get `[0,1]` in a new leading dimension, the others `[1/2,3/2]`,
/// and `v` gets `[-1,0] x [-M,M]^d` with `M` one more than the largest
/// coordinate magnitude.
pub fn apex_add(
    r: &TouchingRep,
    neighbors: &BTreeSet<usize>,
) -> Result<TouchingRep, ConstructError> {
    require_touching(r)?;
    if let Some(&u) = neighbors.iter().find(|&&u| u >= r.n()) {
        return Err(ConstructError::Mismatch(format!(
            "neighbor {u} is not a vertex"
        )));
    }
    let m = r.max_abs_coord() + Rational::one();
    let near = Interval::of(rat(0, 1), rat(1, 1));
    let far = Interval::of(rat(1, 2), rat(3, 2));
    let mut boxes: Vec<BoxNd> = r
        .boxes
        .iter()
        .enumerate()
        .map(|(u, b)| {
            let lead = if neighbors.contains(&u) {
                near.clone()
            } else {
                far.clone()
            };
            BoxNd::new(vec![lead])
                .expect("one side")
                .cartesian_product(b)
        })
        .collect();
    let mut sides = vec![Interval::of(rat(-1, 1), rat(0, 1))];
    sides.extend(std::iter::repeat_n(Interval::of(-m.clone(), m), r.dim));
    boxes.push(BoxNd::new(sides)?);
    let mut g = r.graph.clone();
    let v = g.add_vertex();
    for &u in neighbors {
        g.add_edge(u, v)?;
    }
    check_touching(TouchingRep::new(g, r.dim + 1, boxes)?)
}

/// Two representations to be multiplied; every box of `right` must be a
/// hypercube of side one.
#[derive(Clone, Debug)]
pub struct ProductPlan {
    pub left: TouchingRep,
    pub right: TouchingRep,
}

impl ProductPlan {
    pub fn new(left: TouchingRep, right: TouchingRep) -> Result<Self, ConstructError> {
        let one = Rational::one();
        if let Some(v) = right
            .boxes
            .iter()
            .position(|b| b.sides().iter().any(|s| s.len() != one))
        {
            return Err(ConstructError::NotUnitHypercubes(v));
        }
        Ok(ProductPlan { left, right })
    }
}

/// Representation of the strong product: vertex `(u, v)` has id
/// `u * |H| + v` and box `g(u) x h(v)`.
pub fn strong_product(p: &ProductPlan) -> Result<TouchingRep, ConstructError> {
    let p = ProductPlan::new(p.left.clone(), p.right.clone())?;
    require_touching(&p.left)?;
    require_touching(&p.right)?;
    let mut boxes = Vec::with_capacity(p.left.n() * p.right.n());
    for gu in &p.left.boxes {
        for hv in &p.right.boxes {
            boxes.push(gu.cartesian_product(hv));
        }
    }
    let g = p.left.graph.strong_product(&p.right.graph);
    check_touching(TouchingRep::new(g, p.left.dim + p.right.dim, boxes)?)
}

/// The path `0 - 1 - ... - (n-1)` by unit intervals `[i, i+1]`.
pub fn unit_rep_path(n: usize) -> TouchingRep {
    assert!(n >= 1);
    let boxes = (0..n as i64)
        .map(|i| BoxNd::new(vec![Interval::of(rat(i, 1), rat(i + 1, 1))]).unwrap())
        .collect();
    TouchingRep::new(Graph::path(n), 1, boxes).unwrap()
}

/// `K_m` by unit hypercubes at the origin in `max(1, ceil(log2 m))`
/// dimensions: bit `j` of the vertex id picks `[0,1]` (set) or `[-1,0]`.
pub fn unit_rep_clique(m: usize) -> TouchingRep {
    assert!(m >= 1);
    let d = (usize::BITS - (m - 1).leading_zeros()).max(1) as usize;
    let pos = Interval::of(rat(0, 1), rat(1, 1));
    let neg = Interval::of(rat(-1, 1), rat(0, 1));
    let boxes = (0..m)
        .map(|v| {
            BoxNd::new(
                (0..d)
                    .map(|j| {
                        if v >> j & 1 == 1 {
                            pos.clone()
                        } else {
                            neg.clone()
                        }
                    })
                    .collect(),
            )
            .unwrap()
        })
        .collect();
    TouchingRep::new(Graph::complete(m), d, boxes).unwrap()
}

/// `K_{2n}` minus the perfect matching `{2i, 2i+1}` by unit hypercubes in
/// `R^n`: vertex `2i + s` is pushed to `[-1,0]` (s = 0) or `[1,2]` (s = 1)
/// in dimension `i` and spans `[0,1]` elsewhere.
pub fn cocktail_party(n: usize) -> TouchingRep {
    assert!(n >= 1);
    let mut boxes = Vec::with_capacity(2 * n);
    let mut g = Graph::complete(2 * n);
    for i in 0..n {
        g.remove_edge(2 * i, 2 * i + 1);
        for s in 0..2 {
            let sides = (0..n)
                .map(|j| match (j == i, s) {
                    (true, 0) => Interval::of(rat(-1, 1), rat(0, 1)),
                    (true, _) => Interval::of(rat(1, 1), rat(2, 1)),
                    (false, _) => Interval::of(rat(0, 1), rat(1, 1)),
                })
                .collect();
            boxes.push(BoxNd::new(sides).unwrap());
        }
    }
    TouchingRep::new(g, n, boxes).unwrap()
}

/// Representation of the spanning subgraph `target` of `r.graph`, adding one
/// dimension per pair of colors of the star coloring.
pub fn subgraph_extend(
    r: &TouchingRep,
    target: &Graph,
    coloring: &Coloring,
) -> Result<TouchingRep, ConstructError> {
    require_touching(r)?;
    if target.n() != r.n() {
        return Err(ConstructError::Mismatch(format!(
            "target has {} vertices, expected {}",
            target.n(),
            r.n()
        )));
    }
    if let Some((u, v)) = target.edges().find(|&(u, v)| !r.graph.has_edge(u, v)) {
        return Err(ConstructError::Mismatch(format!(
            "edge {u}-{v} is not an edge of the represented graph"
        )));
    }
    if coloring.kind != ColoringKind::Star {
        return Err(ConstructError::InvalidColoring(
            "a star coloring is required".into(),
        ));
    }
    let report = verify_coloring(&r.graph, coloring);
    if !report.is_valid() {
        return Err(ConstructError::InvalidColoring(format!(
            "{:?}",
            &report.violations[..report.violations.len().min(3)]
        )));
    }
    let c = coloring.color_count();
    // in_a[u] holds the colors j with u in A_{color(u), j}.
    let mut in_a: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); r.n()];
    for (u, v) in r.graph.edges() {
        if !target.has_edge(u, v) {
            in_a[u].insert(coloring.color(v));
            in_a[v].insert(coloring.color(u));
        }
    }
    let up = Interval::of(rat(1, 3), rat(4, 3));
    let down = Interval::of(rat(-4, 3), rat(-1, 3));
    let mid = Interval::of(rat(-1, 2), rat(1, 2));
    let boxes = r
        .boxes
        .iter()
        .enumerate()
        .map(|(u, b)| {
            let cu = coloring.color(u);
            let mut sides = b.sides().to_vec();
            for i in 1..=c {
                for j in i + 1..=c {
                    let side = if cu == i && in_a[u].contains(&j) {
                        up.clone()
                    } else if cu == j && in_a[u].contains(&i) {
                        down.clone()
                    } else {
                        mid.clone()
                    };
                    sides.push(side);
                }
            }
            BoxNd::new(sides).unwrap()
        })
        .collect();
    check_touching(TouchingRep::new(
        target.clone(),
        r.dim + c * (c - 1) / 2,
        boxes,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{greedy_star_coloring, StarRule};
    use crate::representation::verify_touching_rep;

    fn single_unit() -> TouchingRep {
        TouchingRep::new(
            Graph::empty(1),
            1,
            vec![BoxNd::cube(1, rat(0, 1), rat(1, 1)).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn apex_on_single_vertex() {
        let r = apex_add(&single_unit(), &BTreeSet::from([0])).unwrap();
        assert_eq!(r.boxes[0], BoxNd::cube(2, rat(0, 1), rat(1, 1)).unwrap());
        assert_eq!(
            r.boxes[1],
            BoxNd::new(vec![
                Interval::of(rat(-1, 1), rat(0, 1)),
                Interval::of(rat(-2, 1), rat(2, 1))
            ])
            .unwrap()
        );
        assert!(r.graph.has_edge(0, 1));
    }

    #[test]
    fn apex_without_neighbors_is_isolated() {
        let r = apex_add(&single_unit(), &BTreeSet::new()).unwrap();
        assert_eq!(r.graph.edge_count(), 0);
    }

    #[test]
    fn repeated_apex_builds_cliques() {
        let mut r = single_unit();
        for n in 1..6 {
            r = apex_add(&r, &(0..n).collect()).unwrap();
            assert_eq!(r.dim, n + 1);
        }
        assert_eq!(r.graph, Graph::complete(6));
    }

    #[test]
    fn product_of_edges_is_k4() {
        let p = ProductPlan::new(unit_rep_path(2), unit_rep_path(2)).unwrap();
        let r = strong_product(&p).unwrap();
        assert_eq!(r.dim, 2);
        assert_eq!(r.graph, Graph::complete(4));
    }

    #[test]
    fn product_with_single_vertex_keeps_graph() {
        let left = unit_rep_clique(3);
        let right = TouchingRep::new(
            Graph::empty(1),
            1,
            vec![BoxNd::cube(1, rat(0, 1), rat(1, 1)).unwrap()],
        )
        .unwrap();
        let r = strong_product(&ProductPlan::new(left.clone(), right).unwrap()).unwrap();
        assert_eq!(r.graph, left.graph);
        assert_eq!(
            r.boxes[2],
            left.boxes[2].cartesian_product(&BoxNd::cube(1, rat(0, 1), rat(1, 1)).unwrap())
        );
    }

    #[test]
    fn king_graph_three_by_three() {
        let r =
            strong_product(&ProductPlan::new(unit_rep_path(3), unit_rep_path(3)).unwrap()).unwrap();
        // Independent adjacency: distinct cells at Chebyshev distance one.
        for a in 0..9usize {
            for b in a + 1..9 {
                let (ax, ay, bx, by) = (a / 3, a % 3, b / 3, b % 3);
                let king = ax.abs_diff(bx) <= 1 && ay.abs_diff(by) <= 1;
                assert_eq!(r.graph.has_edge(a, b), king, "{a} {b}");
            }
        }
    }

    #[test]
    fn non_unit_right_factor_is_rejected() {
        let right = TouchingRep::new(
            Graph::empty(1),
            1,
            vec![BoxNd::cube(1, rat(0, 1), rat(2, 1)).unwrap()],
        )
        .unwrap();
        assert!(matches!(
            ProductPlan::new(unit_rep_path(2), right),
            Err(ConstructError::NotUnitHypercubes(0))
        ));
    }

    #[test]
    fn unit_reps() {
        let p = unit_rep_path(3);
        assert_eq!(p.boxes[2], BoxNd::cube(1, rat(2, 1), rat(3, 1)).unwrap());
        assert!(verify_touching_rep(&p, true).is_valid());
        for m in 1..=9 {
            let c = unit_rep_clique(m);
            assert!(verify_touching_rep(&c, true).is_valid(), "m={m}");
            assert_eq!(c.graph, Graph::complete(m));
        }
        assert_eq!(unit_rep_clique(4).dim, 2);
        assert_eq!(unit_rep_clique(5).dim, 3);
        assert_eq!(unit_rep_clique(1).dim, 1);
    }

    #[test]
    fn cocktail_party_small() {
        let r = cocktail_party(1);
        assert_eq!(r.graph.edge_count(), 0);
        assert!(verify_touching_rep(&r, true).is_valid());
        let r = cocktail_party(2);
        assert!(r.graph.is_isomorphic_small(&Graph::cycle(4)));
        assert!(verify_touching_rep(&r, true).is_valid());
    }

    #[test]
    fn subgraph_of_corner_k4() {
        let r = unit_rep_clique(4);
        let star = greedy_star_coloring(&r.graph, &[0, 1, 2, 3], StarRule::AsWritten).unwrap();
        let mut target = r.graph.clone();
        target.remove_edge(0, 3);
        let s = subgraph_extend(&r, &target, &star).unwrap();
        assert_eq!(s.dim, 2 + 6);
        assert_eq!(s.graph, target);

        let same = subgraph_extend(&r, &r.graph, &star).unwrap();
        let mid = Interval::of(rat(-1, 2), rat(1, 2));
        assert!(same
            .boxes
            .iter()
            .all(|b| b.sides()[2..].iter().all(|s| *s == mid)));

        let mut matching = r.graph.clone();
        matching.remove_edge(0, 3);
        matching.remove_edge(1, 2);
        let m = subgraph_extend(&r, &matching, &star).unwrap();
        assert!(m.graph.is_isomorphic_small(&cocktail_party(2).graph));
    }

    #[test]
    fn subgraph_rejects_proper_only_coloring() {
        let r = unit_rep_clique(4);
        let mut proper =
            greedy_star_coloring(&r.graph, &[0, 1, 2, 3], StarRule::AsWritten).unwrap();
        proper.kind = ColoringKind::Proper;
        assert!(matches!(
            subgraph_extend(&r, &r.graph, &proper),
            Err(ConstructError::InvalidColoring(_))
        ));
    }
}
