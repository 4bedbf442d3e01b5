use std::collections::{BTreeMap, BTreeSet};

use super::{check_cs, require_cs, require_touching, ConstructError};
use crate::geometry::{rat, BoxNd, Interval, Rational};
use crate::graph::{enumerate_cliques, verify_coloring, Clique, Coloring, Graph};
use crate::representation::{max_valid_epsilon, CsRep, TouchingRep};

/// Raises the dimension by one: root boxes get `[0,1]`, the others `[0,1/2]`,
/// and every clique point gets `1/4` in the new coordinate.
pub fn pad_dimension(c: &CsRep) -> Result<CsRep, ConstructError> {
    require_cs(c)?;
    Ok(pad_unchecked(c))
}

fn pad_unchecked(c: &CsRep) -> CsRep {
    let root_side = Interval::of(rat(0, 1), rat(1, 1));
    let other_side = Interval::of(rat(0, 1), rat(1, 2));
    let boxes = c
        .base
        .boxes
        .iter()
        .enumerate()
        .map(|(v, b)| {
            let extra = if c.is_root(v) {
                root_side.clone()
            } else {
                other_side.clone()
            };
            b.cartesian_product(&BoxNd::new(vec![extra]).unwrap())
        })
        .collect();
    let quarter = rat(1, 4);
    let clique_points = c
        .clique_points
        .iter()
        .map(|(k, p)| {
            let mut p = p.clone();
            p.push(quarter.clone());
            (k.clone(), p)
        })
        .collect();
    CsRep {
        base: TouchingRep::new(c.base.graph.clone(), c.dim() + 1, boxes).unwrap(),
        root: c.root.clone(),
        root_dims: c.root_dims.clone(),
        clique_points,
        epsilon: c.epsilon.clone().min(quarter),
    }
}

fn pad_to(c: &CsRep, d: usize) -> CsRep {
    let mut out = c.clone();
    while out.dim() < d {
        out = pad_unchecked(&out);
    }
    out
}

/// A glued certificate and where the vertices of the second input went.
#[derive(Clone, Debug)]
pub struct CliqueSumResult {
    pub rep: CsRep,
    /// `vertex_map[v]` is the new id of vertex `v` of the second input.
    pub vertex_map: Vec<usize>,
}

/// Full clique-sum of `c1` and `c2`, identifying each vertex `v` of `glue`
/// (a clique of the first graph) with the root vertex `matching[v]` of `c2`.
///
/// Vertices of the first graph keep their ids and the non-root vertices of
/// the second are appended in increasing order. The second representation
/// is scaled into the cube of `glue`, with its dimensions permuted so that
/// each root dimension lands on the facet dimension of the matched vertex.
pub fn clique_sum(
    c1: &CsRep,
    glue: &Clique,
    c2: &CsRep,
    matching: &BTreeMap<usize, usize>,
) -> Result<CliqueSumResult, ConstructError> {
    require_cs(c1)?;
    require_cs(c2)?;
    let d = c1.dim().max(c2.dim());
    let mut rep = pad_to(c1, d);
    let c2 = pad_to(c2, d);
    let min_side = min_side(&rep.base.boxes);
    let vertex_map = glue_in_place(&mut rep, glue, &c2, matching, &min_side)?;
    Ok(CliqueSumResult {
        rep: check_cs(rep)?,
        vertex_map,
    })
}

pub(crate) fn min_side(boxes: &[BoxNd]) -> Rational {
    boxes
        .iter()
        .flat_map(|b| b.sides().iter().map(Interval::len))
        .min()
        .unwrap_or_else(Rational::one)
}

/// The gluing step without verification. `c1` and `c2` must have the same
/// dimension and `min_side` must bound every side of `c1`'s boxes.
pub(crate) fn glue_in_place(
    c1: &mut CsRep,
    glue: &Clique,
    c2: &CsRep,
    matching: &BTreeMap<usize, usize>,
    min_side: &Rational,
) -> Result<Vec<usize>, ConstructError> {
    let d = c1.dim();
    if c2.dim() != d {
        return Err(ConstructError::Mismatch(format!(
            "dimensions {d} and {} differ",
            c2.dim()
        )));
    }
    let keys: Vec<usize> = matching.keys().copied().collect();
    if keys != glue.vertices() {
        return Err(ConstructError::Mismatch(format!(
            "matching keys {keys:?} differ from glue {glue:?}"
        )));
    }
    let images: BTreeSet<usize> = matching.values().copied().collect();
    if images.len() != matching.len() || images.iter().ne(c2.root.vertices()) {
        return Err(ConstructError::Mismatch(format!(
            "matching is not a bijection onto the root {:?}",
            c2.root
        )));
    }
    let p1 = c1
        .point(glue)
        .ok_or_else(|| ConstructError::Mismatch(format!("{glue:?} has no clique point")))?
        .to_vec();

    // perm[j] is the first-input dimension receiving dimension j of c2.
    let mut perm: Vec<Option<usize>> = vec![None; d];
    let mut taken = vec![false; d];
    for (&v, &r) in matching {
        let i = c1.facet_dim(glue, v).ok_or_else(|| {
            ConstructError::DimensionAlignment(format!(
                "vertex {v} has no unique facet at p({glue:?})"
            ))
        })?;
        if taken[i] {
            return Err(ConstructError::DimensionAlignment(format!(
                "facet dimension {i} is used twice"
            )));
        }
        taken[i] = true;
        perm[c2.root_dims[&r]] = Some(i);
    }
    let mut free = (0..d).filter(|&i| !taken[i]);
    let perm: Vec<usize> = perm
        .into_iter()
        .map(|p| p.unwrap_or_else(|| free.next().unwrap()))
        .collect();

    let one = Rational::one();
    let headroom = p1
        .iter()
        .map(|x| &one - x)
        .min()
        .unwrap_or_else(Rational::one)
        * rat(1, 2);
    let scale = c1
        .epsilon
        .clone()
        .min(headroom)
        .min(min_side.clone())
        .pow2_floor();
    let inner_room = c2
        .clique_points
        .values()
        .flat_map(|p| p.iter().map(|x| &one - x))
        .min()
        .unwrap_or_else(Rational::one)
        .pow2_floor();
    let inner_eps = c2.epsilon.clone().min(inner_room);

    let place = |j: usize, x: &Rational| &p1[perm[j]] + &(&scale * x);
    let n1 = c1.base.n();
    let mut vertex_map = vec![usize::MAX; c2.base.n()];
    for (&v, &r) in matching {
        vertex_map[r] = v;
    }
    for (next, slot) in (n1..).zip(vertex_map.iter_mut().filter(|s| **s == usize::MAX)) {
        *slot = next;
    }
    for v in (0..c2.base.n()).filter(|&v| !c2.is_root(v)) {
        let b = &c2.base.boxes[v];
        let mut sides = vec![None; d];
        for (j, s) in b.sides().iter().enumerate() {
            sides[perm[j]] = Some(Interval::of(place(j, s.lo()), place(j, s.hi())));
        }
        c1.base.graph.add_vertex();
        c1.base
            .boxes
            .push(BoxNd::new(sides.into_iter().map(Option::unwrap).collect()).unwrap());
    }
    for (u, v) in c2.base.graph.edges() {
        c1.base.graph.ensure_edge(vertex_map[u], vertex_map[v]);
    }
    // Subcliques of the glue clique are cliques of the second graph too, so
    // their points are overwritten here.
    for (k, p2) in &c2.clique_points {
        let mut p = vec![Rational::zero(); d];
        for (j, x) in p2.iter().enumerate() {
            p[perm[j]] = place(j, x);
        }
        c1.clique_points.insert(k.map(|v| vertex_map[v]), p);
    }
    c1.epsilon = scale * inner_eps;
    Ok(vertex_map)
}

/// Turns an `∅`-rooted certificate of `G - C*` into a `C*`-rooted one of `G`.
///
/// `root_neighbors[i]` lists the vertices of `G - C*` adjacent to the i-th
/// root vertex. Existing vertices keep their ids; root vertex `i` becomes
/// `n + i` with private dimension `i`. Leading dimension `i` holds `[0,1/2]`
/// for neighbors of root `i` and `[1/4,3/4]` otherwise; the old
/// representation, scaled by a power of two, fills the trailing dimensions.
pub fn promote_root(
    c: &CsRep,
    root_neighbors: &[BTreeSet<usize>],
) -> Result<CsRep, ConstructError> {
    require_cs(c)?;
    if !c.root.is_empty() {
        return Err(ConstructError::Mismatch(
            "the input root clique must be empty".into(),
        ));
    }
    let k = root_neighbors.len();
    if k == 0 {
        return Ok(c.clone());
    }
    let n = c.base.n();
    if let Some(u) = root_neighbors.iter().flatten().find(|&&u| u >= n) {
        return Err(ConstructError::Mismatch(format!(
            "root neighbor {u} is not a vertex"
        )));
    }
    let mut g = c.base.graph.clone();
    for _ in 0..k {
        g.add_vertex();
    }
    for (i, nb) in root_neighbors.iter().enumerate() {
        for j in i + 1..k {
            g.add_edge(n + i, n + j)?;
        }
        for &u in nb {
            g.add_edge(u, n + i)?;
        }
    }

    let max_coord = c.base.max_abs_coord().max(Rational::one());
    let alpha = (Rational::one() / (max_coord * rat(2, 1)))
        .min(Rational::one())
        .pow2_floor();
    let near = Interval::of(rat(0, 1), rat(1, 2));
    let far = Interval::of(rat(1, 4), rat(3, 4));
    let mut boxes = Vec::with_capacity(n + k);
    for (u, b) in c.base.boxes.iter().enumerate() {
        let mut sides: Vec<Interval> = (0..k)
            .map(|i| {
                if root_neighbors[i].contains(&u) {
                    near.clone()
                } else {
                    far.clone()
                }
            })
            .collect();
        sides.extend(
            b.sides()
                .iter()
                .map(|s| s.affine(&alpha, &Rational::zero()).unwrap()),
        );
        boxes.push(BoxNd::new(sides).unwrap());
    }
    let d = k + c.dim();
    for i in 0..k {
        let sides = (0..d)
            .map(|j| {
                if j == i {
                    Interval::of(rat(-1, 1), rat(0, 1))
                } else {
                    Interval::of(rat(0, 1), rat(1, 1))
                }
            })
            .collect();
        boxes.push(BoxNd::new(sides).unwrap());
    }

    let mut clique_points = BTreeMap::new();
    let mut headroom = Rational::one();
    for clique in enumerate_cliques(&g)? {
        let rest = Clique::new(
            clique
                .vertices()
                .iter()
                .copied()
                .filter(|&v| v < n)
                .collect(),
        );
        let inner = c
            .point(&rest)
            .ok_or_else(|| ConstructError::Mismatch(format!("no clique point for {rest:?}")))?;
        let mut p: Vec<Rational> = (0..k)
            .map(|i| {
                if clique.contains(n + i) {
                    Rational::zero()
                } else {
                    rat(1, 4)
                }
            })
            .collect();
        for x in inner {
            let y = &alpha * x;
            headroom = headroom.min(Rational::one() - &y);
            p.push(y);
        }
        clique_points.insert(clique, p);
    }
    let epsilon = (&alpha * &c.epsilon)
        .min(rat(1, 8))
        .min(headroom * rat(1, 2))
        .pow2_floor();
    let rep = CsRep {
        base: TouchingRep::new(g, d, boxes)?,
        root: Clique::new((n..n + k).collect()),
        root_dims: (0..k).map(|i| (n + i, i)).collect(),
        clique_points,
        epsilon,
    };
    check_cs(rep)
}

/// An `∅`-rooted certificate from a comparable touching representation and
/// a proper coloring, in dimension `d + colors`.
///
/// The boxes are scaled into `[1/4,3/4]^d` and inflated so that cliques
/// have full-dimensional intersections; each clique point sits near the
/// center of its intersection, nudged along the diagonal by the clique's
/// rank. One trailing dimension per color restores the touchings.
pub fn make_cs_extendable(r: &TouchingRep, coloring: &Coloring) -> Result<CsRep, ConstructError> {
    require_touching(r)?;
    let report = verify_coloring(&r.graph, coloring);
    if !report.is_valid() {
        return Err(ConstructError::InvalidColoring(format!(
            "{:?}",
            &report.violations[..report.violations.len().min(3)]
        )));
    }
    let d = r.dim;
    let n = r.n();
    let colors = coloring.color_count();

    let mins: Vec<Rational> = (0..d)
        .map(|j| {
            r.boxes
                .iter()
                .map(|b| b.side(j).lo().clone())
                .min()
                .unwrap_or_else(Rational::zero)
        })
        .collect();
    let span = (0..d)
        .map(|j| {
            r.boxes
                .iter()
                .map(|b| b.side(j).hi() - &mins[j])
                .max()
                .unwrap_or_else(Rational::one)
        })
        .max()
        .unwrap_or_else(Rational::one);
    let scale = Rational::one() / (span * rat(2, 1));
    let shift: Vec<Rational> = mins.iter().map(|m| rat(1, 4) - &(&scale * m)).collect();
    let scaled: Vec<BoxNd> = r
        .boxes
        .iter()
        .map(|b| b.affine(&vec![scale.clone(); d], &shift).unwrap())
        .collect();

    let mut min_gap: Option<Rational> = None;
    for u in 0..n {
        for v in u + 1..n {
            if r.graph.has_edge(u, v) {
                continue;
            }
            let gap = (0..d)
                .map(|j| {
                    let (a, b) = (scaled[u].side(j), scaled[v].side(j));
                    (b.lo() - a.hi()).max(a.lo() - b.hi())
                })
                .max()
                .unwrap();
            min_gap = Some(match min_gap {
                Some(g) => g.min(gap),
                None => gap,
            });
        }
    }
    let alpha = min_gap
        .map_or(rat(1, 8), |g| (g * rat(1, 4)).min(rat(1, 8)))
        .pow2_floor();
    let inflated: Vec<BoxNd> = scaled
        .iter()
        .map(|b| {
            BoxNd::new(
                b.sides()
                    .iter()
                    .map(|s| Interval::of(s.lo() - &alpha, s.hi() + &alpha))
                    .collect(),
            )
            .unwrap()
        })
        .collect();

    let cliques = enumerate_cliques(&r.graph)?;
    let centers: Vec<Vec<Rational>> = cliques
        .iter()
        .map(|k| {
            (0..d)
                .map(|j| {
                    let sides = k.vertices().iter().map(|&v| inflated[v].side(j));
                    let lo = sides
                        .clone()
                        .map(|s| s.lo().clone())
                        .max()
                        .unwrap_or_else(Rational::zero);
                    let hi = sides
                        .map(|s| s.hi().clone())
                        .min()
                        .unwrap_or_else(Rational::one);
                    (lo + hi) * rat(1, 2)
                })
                .collect()
        })
        .collect();
    let mut delta = (&alpha / &Rational::from_integer(2 * (cliques.len() as i64 + 1))).pow2_floor();
    let points = loop {
        let pts: Vec<Vec<Rational>> = centers
            .iter()
            .enumerate()
            .map(|(rank, ctr)| {
                let off = &delta * &Rational::from_integer(rank as i64);
                ctr.iter().map(|x| x + &off).collect()
            })
            .collect();
        let distinct: BTreeSet<&Vec<Rational>> = pts.iter().collect();
        if distinct.len() == pts.len() {
            break pts;
        }
        delta = delta * rat(1, 2);
    };

    let trailing = |cu: usize, t: usize| match cu.cmp(&t) {
        std::cmp::Ordering::Less => Interval::of(rat(1, 5), rat(3, 5)),
        std::cmp::Ordering::Equal => Interval::of(rat(0, 1), rat(2, 5)),
        std::cmp::Ordering::Greater => Interval::of(rat(2, 5), rat(4, 5)),
    };
    let boxes: Vec<BoxNd> = inflated
        .iter()
        .enumerate()
        .map(|(u, b)| {
            let mut sides = b.sides().to_vec();
            sides.extend((1..=colors).map(|t| trailing(coloring.color(u), t)));
            BoxNd::new(sides).unwrap()
        })
        .collect();
    let clique_points: BTreeMap<Clique, Vec<Rational>> = cliques
        .into_iter()
        .zip(points)
        .map(|(k, mut p)| {
            let used: BTreeSet<usize> = k.vertices().iter().map(|&v| coloring.color(v)).collect();
            p.extend((1..=colors).map(|t| {
                if used.contains(&t) {
                    rat(2, 5)
                } else {
                    rat(1, 2)
                }
            }));
            (k, p)
        })
        .collect();
    let mut rep = CsRep {
        base: TouchingRep::new(r.graph.clone(), d + colors, boxes)?,
        root: Clique::empty(),
        root_dims: BTreeMap::new(),
        clique_points,
        epsilon: Rational::one(),
    };
    rep.epsilon = max_valid_epsilon(&rep)?;
    check_cs(rep)
}

/// Restriction of a touching representation to `keep`, renumbered in order.
pub(crate) fn restrict(r: &TouchingRep, keep: &[usize]) -> TouchingRep {
    let g: Graph = r.graph.induced(keep);
    TouchingRep::new(g, r.dim, keep.iter().map(|&v| r.boxes[v].clone()).collect()).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{ktree_base_rep, unit_rep_clique, unit_rep_path};
    use crate::geometry::box_fully_touching;
    use crate::graph::{greedy_proper_coloring, Graph};
    use crate::representation::verify_cs_rep;

    fn identity_matching(glue: &[usize], root: &[usize]) -> BTreeMap<usize, usize> {
        glue.iter().copied().zip(root.iter().copied()).collect()
    }

    #[test]
    fn pad_extends_exactly() {
        let base = ktree_base_rep(2);
        let p = pad_dimension(&base).unwrap();
        assert_eq!(p.dim(), 4);
        for &v in base.root.vertices() {
            assert_eq!(p.base.boxes[v].side(3), &Interval::of(rat(0, 1), rat(1, 1)));
        }
        assert_eq!(p.base.boxes[2].side(3), &Interval::of(rat(0, 1), rat(1, 2)));
        assert!(p.clique_points.values().all(|x| x[3] == rat(1, 4)));
        let pp = pad_dimension(&p).unwrap();
        assert_eq!(pp, pad_unchecked(&pad_unchecked(&base)));
        assert!(verify_cs_rep(&pp).is_valid());
    }

    #[test]
    fn two_triangles_on_an_edge() {
        let a = ktree_base_rep(2);
        let b = ktree_base_rep(2);
        let glue = Clique::new(vec![1, 2]);
        let res = clique_sum(&a, &glue, &b, &identity_matching(&[1, 2], &[0, 1])).unwrap();
        assert_eq!(res.rep.dim(), 3);
        assert_eq!(res.vertex_map, vec![1, 2, 3]);
        let mut k4 = Graph::complete(4);
        k4.remove_edge(0, 3);
        assert_eq!(res.rep.graph(), &k4);
        assert_eq!(res.rep.root, a.root);
    }

    #[test]
    fn glue_on_empty_root() {
        let a = ktree_base_rep(2);
        let b = ktree_base_rep(0);
        let res = clique_sum(&a, &Clique::empty(), &b, &BTreeMap::new()).unwrap();
        assert_eq!(res.rep.graph().n(), 4);
        assert_eq!(res.rep.graph().edge_count(), 3);
        assert_eq!(res.vertex_map, vec![3]);
    }

    #[test]
    fn lower_dimensional_second_input_is_padded() {
        let a = ktree_base_rep(3);
        let b = ktree_base_rep(1);
        let res = clique_sum(
            &a,
            &Clique::new(vec![3]),
            &b,
            &identity_matching(&[3], &[0]),
        )
        .unwrap();
        assert_eq!(res.rep.dim(), 4);
        assert!(res.rep.graph().has_edge(3, 4));
    }

    #[test]
    fn glue_order_gives_isomorphic_graphs() {
        let t = || ktree_base_rep(1);
        let ab = clique_sum(
            &t(),
            &Clique::new(vec![1]),
            &t(),
            &identity_matching(&[1], &[0]),
        )
        .unwrap()
        .rep;
        let abc = clique_sum(
            &ab,
            &Clique::new(vec![2]),
            &t(),
            &identity_matching(&[2], &[0]),
        )
        .unwrap()
        .rep;
        let bc = clique_sum(
            &t(),
            &Clique::new(vec![1]),
            &t(),
            &identity_matching(&[1], &[0]),
        )
        .unwrap()
        .rep;
        let a_bc = clique_sum(
            &t(),
            &Clique::new(vec![1]),
            &bc,
            &identity_matching(&[1], &[0]),
        )
        .unwrap()
        .rep;
        assert!(abc.graph().is_isomorphic_small(a_bc.graph()));
    }

    #[test]
    fn promote_endpoint_of_edge() {
        let single = unit_rep_path(1);
        let col = greedy_proper_coloring(&single.graph, &[0]).unwrap();
        let ext = make_cs_extendable(&single, &col).unwrap();
        assert_eq!(ext.dim(), 2);
        let p = promote_root(&ext, &[BTreeSet::from([0])]).unwrap();
        assert_eq!(p.dim(), 3);
        assert_eq!(p.graph(), &Graph::complete(2));
        assert_eq!(p.root_dims, BTreeMap::from([(1, 0)]));
        for (k, x) in &p.clique_points {
            let expect = if k.contains(1) { rat(0, 1) } else { rat(1, 4) };
            assert_eq!(x[0], expect);
        }
        assert_eq!(promote_root(&ext, &[]).unwrap(), ext);
    }

    #[test]
    fn extendable_corner_k4_is_fully_touching() {
        let r = unit_rep_clique(4);
        let col = greedy_proper_coloring(&r.graph, &[0, 1, 2, 3]).unwrap();
        let c = make_cs_extendable(&r, &col).unwrap();
        assert_eq!(c.dim(), 6);
        for (u, v) in c.graph().edges() {
            assert!(box_fully_touching(&c.base.boxes[u], &c.base.boxes[v]).unwrap());
        }
    }

    #[test]
    fn extendable_path() {
        let r = unit_rep_path(3);
        let col = greedy_proper_coloring(&r.graph, &[0, 1, 2]).unwrap();
        assert_eq!(col.color_count(), 2);
        let c = make_cs_extendable(&r, &col).unwrap();
        assert_eq!(c.dim(), 3);
        assert!(c.root.is_empty());
    }
}
