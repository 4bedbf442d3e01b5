use num_bigint::BigInt;
use serde::Serialize;

use super::cells::{build_decomposition, cell_tree_in_frame};
use super::experiment::{draw_in_frame, require_valid, width_bound};
use super::frame::Frame;
use super::schedule::{grid_lengths, sample_seed};
use super::FragilityError;
use crate::graph::{Graph, TreeDecomp};
use crate::representation::EnvelopeRep;

/// Draws tried before settling for the smallest deletion set seen.
pub const SEPARATOR_DRAW_CAP: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Separator {
    /// Deleted vertices of the chosen draw, sorted.
    pub deleted: Vec<usize>,
    /// Bag of the decomposition of the surviving graph, sorted.
    pub bag: Vec<usize>,
    pub draws: usize,
    pub sample_seed: u64,
    /// No draw met `|X| <= n/k`; the smallest draw was used.
    pub capped: bool,
    /// Vertices of the graph minus the deleted set.
    pub remaining: usize,
    /// Largest component left after removing the bag too.
    pub largest_component: usize,
    pub width_bound: String,
}

impl Separator {
    pub fn size(&self) -> usize {
        self.deleted.len() + self.bag.len()
    }

    pub fn is_balanced(&self) -> bool {
        2 * self.largest_component <= self.remaining
    }
}

/// A separator `X ∪ S`: `X` a deletion set with `|X| <= n/k` and `S` a bag
/// of the cell-tree decomposition of `G - X` that leaves no component larger
/// than half of `G - X`.
pub fn balanced_separator(e: &EnvelopeRep, k: u64, seed: u64) -> Result<Separator, FragilityError> {
    require_valid(e)?;
    let lengths = grid_lengths(e, k)?;
    let frame = Frame::new(e, &lengths, &[]);
    let n = e.n();
    let mut best: Option<(u64, crate::fragility::DeletionSample, Vec<BigInt>)> = None;
    let mut draws = 0;
    let mut capped = true;
    for i in 0..SEPARATOR_DRAW_CAP {
        draws = i + 1;
        let s = sample_seed(seed, i as u64);
        let (sample, x) = draw_in_frame(e, k, &lengths, &frame, s);
        if best
            .as_ref()
            .is_none_or(|b| sample.deleted.len() < b.1.deleted.len())
        {
            best = Some((s, sample, x));
        }
        if best.as_ref().unwrap().1.deleted.len() as u64 * k <= n as u64 {
            capped = false;
            break;
        }
    }
    let (s, sample, x) = best.expect("at least one draw");
    let ct = cell_tree_in_frame(e, &frame, &sample, &x)?;
    let td = build_decomposition(&ct);
    let removed = sample.removed_flags(n);
    let (node, largest) = centroid_bag(&e.graph, &removed, &td);
    Ok(Separator {
        bag: node.map(|x| td.bag(x).to_vec()).unwrap_or_default(),
        deleted: sample.deleted,
        draws,
        sample_seed: s,
        capped,
        remaining: removed.iter().filter(|&&r| !r).count(),
        largest_component: largest,
        width_bound: width_bound(k, e.s, e.t, e.dim).to_string(),
    })
}

fn largest_component_without(g: &Graph, removed: &[bool], bag: &[usize]) -> (usize, Vec<usize>) {
    let mut alive: Vec<bool> = removed.iter().map(|r| !r).collect();
    for &v in bag {
        alive[v] = false;
    }
    g.components(&alive)
        .into_iter()
        .max_by_key(|c| c.len())
        .map(|c| (c.len(), c))
        .unwrap_or((0, Vec::new()))
}

/// A bag whose removal leaves components of at most half the surviving
/// vertices, with the largest remaining component size.
///
/// Walks from the root toward the branch holding the oversized component;
/// falls back to scanning every bag if the walk revisits a node.
pub fn centroid_bag(g: &Graph, removed: &[bool], td: &TreeDecomp) -> (Option<usize>, usize) {
    let total = removed.iter().filter(|&&r| !r).count();
    let Some(order) = td.bfs_order() else {
        return (None, total);
    };
    let Some(&root) = order.first() else {
        return (None, total);
    };
    let mut depth = vec![0usize; td.len()];
    for &x in &order[1..] {
        depth[x] = depth[td.parent(x).unwrap()] + 1;
    }
    let mut home = vec![usize::MAX; g.n()];
    for &x in &order {
        for &v in td.bag(x) {
            if home[v] == usize::MAX {
                home[v] = x;
            }
        }
    }

    let mut visited = vec![false; td.len()];
    let mut x = root;
    loop {
        visited[x] = true;
        let (largest, comp) = largest_component_without(g, removed, td.bag(x));
        if 2 * largest <= total {
            return (Some(x), largest);
        }
        // Step toward the node holding a vertex of the big component.
        let mut y = home[comp[0]];
        let next = if depth[y] > depth[x] && {
            while depth[y] > depth[x] + 1 {
                y = td.parent(y).unwrap();
            }
            td.parent(y) == Some(x)
        } {
            y
        } else {
            match td.parent(x) {
                Some(p) => p,
                None => break,
            }
        };
        if visited[next] {
            break;
        }
        x = next;
    }
    (0..td.len())
        .map(|x| (x, largest_component_without(g, removed, td.bag(x)).0))
        .min_by_key(|&(x, size)| (size, x))
        .map(|(x, size)| (Some(x), size))
        .unwrap_or((None, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rat, BoxNd};
    use crate::representation::{envelope_from_boxes, TouchingRep};

    #[test]
    fn path_decomposition_centroid() {
        let g = Graph::path(7);
        let mut td = TreeDecomp::new();
        let mut prev = None;
        for i in 0..6 {
            prev = Some(td.add_node(prev, vec![i, i + 1]));
        }
        let (node, largest) = centroid_bag(&g, &[false; 7], &td);
        let bag = td.bag(node.unwrap());
        assert!(2 * largest <= 7, "bag {bag:?}");
        assert_eq!(largest, 3);
    }

    #[test]
    fn single_vertex_is_balanced() {
        let boxes = vec![BoxNd::cube(1, rat(0, 1), rat(1, 1)).unwrap()];
        let e = envelope_from_boxes(&TouchingRep::new(Graph::empty(1), 1, boxes).unwrap()).unwrap();
        let s = balanced_separator(&e, 2, 0).unwrap();
        assert!(s.is_balanced());
        assert!(s.size() <= 1);
    }
}
