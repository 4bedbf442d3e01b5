use std::collections::{BTreeMap, BTreeSet};

use super::extendable::{glue_in_place, min_side};
use super::{check_cs, check_touching, ConstructError};
use crate::geometry::{rat, BoxNd, Interval, Rational};
use crate::graph::{ktree_embed, ktree_realize, Clique, Graph, KTreeBuildPlan, TreeDecomp};
use crate::representation::{CsRep, TouchingRep};

/// Certificate of `K_{k+1}` rooted at `{0, .., k-1}` in `R^{k+1}`.
///
/// Root `i` has private dimension `i`; vertex `k` is `[0,1/2]^{k+1}`. The
/// point of a clique has coordinate `i < k` equal to `0` if it contains `i`
/// and `1/4` otherwise, and last coordinate `1/2` or `3/4` depending on
/// whether it contains `k`. Epsilon is `1/8`.
pub fn ktree_base_rep(k: usize) -> CsRep {
    let d = k + 1;
    let mut boxes = Vec::with_capacity(d);
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
    boxes.push(BoxNd::cube(d, rat(0, 1), rat(1, 2)).unwrap());
    let mut clique_points = BTreeMap::new();
    for mask in 0u64..1 << d {
        let clique = Clique::new((0..d).filter(|&v| mask >> v & 1 == 1).collect());
        let mut p: Vec<Rational> = (0..k)
            .map(|i| {
                if clique.contains(i) {
                    rat(0, 1)
                } else {
                    rat(1, 4)
                }
            })
            .collect();
        p.push(if clique.contains(k) {
            rat(1, 2)
        } else {
            rat(3, 4)
        });
        clique_points.insert(clique, p);
    }
    CsRep {
        base: TouchingRep::new(Graph::complete(d), d, boxes).unwrap(),
        root: Clique::new((0..k).collect()),
        root_dims: (0..k).map(|i| (i, i)).collect(),
        clique_points,
        epsilon: rat(1, 8),
    }
}

/// Certificate of the k-tree described by `plan`, rooted at `{0, .., k-1}`,
/// obtained by gluing a copy of the base certificate onto the attachment
/// clique of every step.
pub fn ktree_cs_rep(plan: &KTreeBuildPlan) -> Result<CsRep, ConstructError> {
    let target = ktree_realize(plan)?;
    let rep = ktree_cs_rep_unchecked(plan)?;
    if rep.base.graph != target {
        return Err(ConstructError::Mismatch(
            "glued graph differs from the k-tree".into(),
        ));
    }
    check_cs(rep)
}

fn ktree_cs_rep_unchecked(plan: &KTreeBuildPlan) -> Result<CsRep, ConstructError> {
    let k = plan.k;
    let base = ktree_base_rep(k);
    let mut rep = base.clone();
    let mut smallest = min_side(&rep.base.boxes);
    for step in &plan.steps {
        let glue = Clique::new(step.clique.clone());
        let matching: BTreeMap<usize, usize> = glue.vertices().iter().copied().zip(0..k).collect();
        glue_in_place(&mut rep, &glue, &base, &matching, &smallest)?;
        let added = rep.base.boxes.last().expect("a vertex was added");
        smallest = smallest.min(min_side(std::slice::from_ref(added)));
    }
    Ok(rep)
}

/// Comparable touching representation of `g` in `R^{k+1}`, where `k` is the
/// width of `td`.
///
/// `g` is completed to a k-tree with k extra root vertices; the k-tree
/// certificate without its root boxes represents a supergraph of `g` by
/// hypercubes. For every superfluous edge the box whose lower side sits on
/// the contact is raised by a common `delta` in that one dimension, which
/// is small enough that no other coordinate order changes.
pub fn treewidth_rep(g: &Graph, td: &TreeDecomp) -> Result<TouchingRep, ConstructError> {
    let emb = ktree_embed(g, td)?;
    let k = emb.plan.k;
    let cert = ktree_cs_rep(&emb.plan)?;
    let tree = cert.graph();
    let mut boxes: Vec<BoxNd> = emb
        .vertex_map
        .iter()
        .map(|&t| cert.base.boxes[t].clone())
        .collect();
    let n = g.n();
    let d = k + 1;

    if let Some((u, v)) = g
        .edges()
        .find(|&(u, v)| !tree.has_edge(emb.vertex_map[u], emb.vertex_map[v]))
    {
        return Err(ConstructError::Mismatch(format!(
            "edge {u}-{v} is missing from the k-tree"
        )));
    }
    let mut budget = min_side(&boxes);
    for j in 0..d {
        let mut coords: Vec<Rational> = boxes
            .iter()
            .flat_map(|b| [b.side(j).lo().clone(), b.side(j).hi().clone()])
            .collect();
        coords.sort_unstable();
        coords.dedup();
        for w in coords.windows(2) {
            budget = budget.min(&w[1] - &w[0]);
        }
    }
    let mut sizes: Vec<Rational> = boxes.iter().flat_map(BoxNd::side_lengths).collect();
    sizes.sort_unstable();
    sizes.dedup();
    for w in sizes.windows(2) {
        budget = budget.min(&w[1] - &w[0]);
    }
    let delta = (budget * rat(1, 4)).pow2_floor();

    let mut lifts: BTreeSet<(usize, usize)> = BTreeSet::new();
    for u in 0..n {
        for v in u + 1..n {
            if g.has_edge(u, v) || !tree.has_edge(emb.vertex_map[u], emb.vertex_map[v]) {
                continue;
            }
            let contact = (0..d).find_map(|j| {
                if boxes[u].side(j).lo() == boxes[v].side(j).hi() {
                    Some((u, j))
                } else if boxes[v].side(j).lo() == boxes[u].side(j).hi() {
                    Some((v, j))
                } else {
                    None
                }
            });
            let (x, j) =
                contact.ok_or_else(|| ConstructError::Shrink(u, v, "boxes do not touch".into()))?;
            if let Some(&w) = g
                .neighbors(x)
                .iter()
                .find(|&&w| boxes[w].side(j).hi() == boxes[x].side(j).lo())
            {
                return Err(ConstructError::Shrink(
                    u,
                    v,
                    format!("kept neighbor {w} shares the contact"),
                ));
            }
            lifts.insert((x, j));
        }
    }
    for (x, j) in lifts {
        let mut sides = boxes[x].sides().to_vec();
        sides[j] = Interval::of(sides[j].lo() + &delta, sides[j].hi().clone());
        boxes[x] = BoxNd::new(sides).unwrap();
    }
    check_touching(TouchingRep::new(g.clone(), d, boxes)?)
}
