//! Finite simple graphs with clique machinery, greedy colorings, tree
//! decompositions and k-tree build plans.

mod cliques;
mod coloring;
mod ktree;
mod treedecomp;

pub use cliques::{
    clique_cap, enumerate_cliques, enumerate_cliques_capped, max_clique_size,
    max_clique_size_capped, Clique,
};
pub use coloring::{
    greedy_proper_coloring, greedy_star_coloring, verify_coloring, Coloring, ColoringKind,
    ColoringReport, ColoringViolation, StarRule,
};
pub use ktree::{ktree_embed, ktree_realize, AttachStep, KTreeBuildPlan, KTreeEmbedding};
pub use treedecomp::{
    exact_treewidth, verify_tree_decomposition, verify_tree_decomposition_excluding, TdNode,
    TdReport, TdViolation, TreeDecomp,
};

use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {0} out of range (n = {1})")]
    VertexOutOfRange(usize, usize),
    #[error("loop at vertex {0}")]
    Loop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("clique enumeration exceeded the cap of {0} cliques")]
    CliqueCapExceeded(usize),
    #[error("exact search refused: n = {n} exceeds the cap {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("order is not a permutation of the vertices")]
    BadOrder,
    #[error("invalid k-tree plan: {0}")]
    InvalidPlan(String),
    #[error("invalid tree decomposition: {0}")]
    InvalidDecomposition(String),
}

/// Simple undirected graph on vertices `0..n`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
        }
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::empty(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.insert_edge_unchecked(u, v);
            }
        }
        g
    }

    pub fn path(n: usize) -> Self {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("path edges are valid")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3);
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle edges are valid")
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn add_vertex(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        let n = self.n();
        for w in [u, v] {
            if w >= n {
                return Err(GraphError::VertexOutOfRange(w, n));
            }
        }
        if u == v {
            return Err(GraphError::Loop(u));
        }
        if self.has_edge(u, v) {
            return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
        }
        self.insert_edge_unchecked(u, v);
        Ok(())
    }

    /// Adds the edge if absent; returns whether it was new.
    pub fn ensure_edge(&mut self, u: usize, v: usize) -> bool {
        if u == v || self.has_edge(u, v) {
            return false;
        }
        self.insert_edge_unchecked(u, v);
        true
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> bool {
        match self.adj[u].binary_search(&v) {
            Ok(i) => {
                self.adj[u].remove(i);
                let j = self.adj[v]
                    .binary_search(&u)
                    .expect("adjacency is symmetric");
                self.adj[v].remove(j);
                true
            }
            Err(_) => false,
        }
    }

    fn insert_edge_unchecked(&mut self, u: usize, v: usize) {
        let i = self.adj[u].binary_search(&v).unwrap_err();
        self.adj[u].insert(i, v);
        let j = self.adj[v].binary_search(&u).unwrap_err();
        self.adj[v].insert(j, u);
    }

    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        vertices.iter().enumerate().all(|(i, &u)| {
            u < self.n()
                && vertices[i + 1..]
                    .iter()
                    .all(|&v| u != v && self.has_edge(u, v))
        })
    }

    /// Induced subgraph on `keep` (in the given order); vertex `i` of the
    /// result is `keep[i]`.
    pub fn induced(&self, keep: &[usize]) -> Graph {
        let mut index = vec![usize::MAX; self.n()];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let mut g = Graph::empty(keep.len());
        for (i, &v) in keep.iter().enumerate() {
            g.adj[i] = self.adj[v]
                .iter()
                .filter_map(|&w| (index[w] != usize::MAX).then_some(index[w]))
                .collect();
            g.adj[i].sort_unstable();
        }
        g
    }

    /// Graph with the vertices of `removed` deleted; ids are compacted.
    /// Returns the graph and the surviving original ids.
    pub fn remove_vertices(&self, removed: &BTreeSet<usize>) -> (Graph, Vec<usize>) {
        let keep: Vec<usize> = (0..self.n()).filter(|v| !removed.contains(v)).collect();
        (self.induced(&keep), keep)
    }

    /// Strong product with vertex `(u, v)` numbered `u * other.n() + v`.
    pub fn strong_product(&self, other: &Graph) -> Graph {
        let m = other.n();
        let mut g = Graph::empty(self.n() * m);
        let close = |gr: &Graph, a: usize, b: usize| a == b || gr.has_edge(a, b);
        for u1 in 0..self.n() {
            for v1 in 0..m {
                for u2 in 0..self.n() {
                    for v2 in 0..m {
                        let (a, b) = (u1 * m + v1, u2 * m + v2);
                        if a < b && close(self, u1, u2) && close(other, v1, v2) {
                            g.insert_edge_unchecked(a, b);
                        }
                    }
                }
            }
        }
        g
    }

    /// Connected components of the subgraph induced by `alive`.
    pub fn components(&self, alive: &[bool]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n()];
        let mut out = Vec::new();
        for s in 0..self.n() {
            if !alive[s] || seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &w in &self.adj[u] {
                    if alive[w] && !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Brute-force isomorphism test for small graphs (n <= 10).
    pub fn is_isomorphic_small(&self, other: &Graph) -> bool {
        let n = self.n();
        assert!(n <= 10, "brute-force isomorphism is limited to 10 vertices");
        if n != other.n() || self.edge_count() != other.edge_count() {
            return false;
        }
        let mut da: Vec<usize> = (0..n).map(|v| self.degree(v)).collect();
        let mut db: Vec<usize> = (0..n).map(|v| other.degree(v)).collect();
        da.sort_unstable();
        db.sort_unstable();
        if da != db {
            return false;
        }
        let mut perm: Vec<usize> = Vec::with_capacity(n);
        let mut used = vec![false; n];
        self.iso_extend(other, &mut perm, &mut used)
    }

    fn iso_extend(&self, other: &Graph, perm: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let i = perm.len();
        if i == self.n() {
            return true;
        }
        for cand in 0..other.n() {
            if used[cand] || self.degree(i) != other.degree(cand) {
                continue;
            }
            let ok = (0..i).all(|j| self.has_edge(i, j) == other.has_edge(cand, perm[j]));
            if ok {
                used[cand] = true;
                perm.push(cand);
                if self.iso_extend(other, perm, used) {
                    return true;
                }
                perm.pop();
                used[cand] = false;
            }
        }
        false
    }
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl Serialize for Graph {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        GraphFile {
            n: self.n(),
            edges: self.edges().map(|(u, v)| [u, v]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = GraphFile::deserialize(deserializer)?;
        Graph::from_edges(raw.n, raw.edges.into_iter().map(|[u, v]| (u, v)))
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_edges() {
        assert_eq!(Graph::from_edges(2, [(0, 0)]), Err(GraphError::Loop(0)));
        assert_eq!(
            Graph::from_edges(2, [(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert_eq!(
            Graph::from_edges(2, [(0, 2)]),
            Err(GraphError::VertexOutOfRange(2, 2))
        );
    }

    #[test]
    fn json_roundtrip_and_strictness() {
        let g = Graph::cycle(4);
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"n":4,"edges":[[0,1],[0,3],[1,2],[2,3]]}"#);
        assert_eq!(serde_json::from_str::<Graph>(&s).unwrap(), g);
        assert!(serde_json::from_str::<Graph>(r#"{"n":2,"edges":[[1,1]]}"#).is_err());
    }

    #[test]
    fn strong_product_of_edges_is_k4() {
        let p2 = Graph::path(2);
        let g = p2.strong_product(&p2);
        assert!(g.is_isomorphic_small(&Graph::complete(4)));
        let king = Graph::path(3).strong_product(&Graph::path(3));
        assert_eq!(king.edge_count(), 20);
        assert_eq!(king.degree(4), 8);
    }

    #[test]
    fn isomorphism_small() {
        let c4 = Graph::cycle(4);
        let other = Graph::from_edges(4, [(0, 2), (2, 1), (1, 3), (3, 0)]).unwrap();
        assert!(c4.is_isomorphic_small(&other));
        assert!(!c4.is_isomorphic_small(&Graph::path(4)));
    }

    #[test]
    fn components_respect_mask() {
        let g = Graph::path(5);
        let alive = [true, true, false, true, true];
        assert_eq!(g.components(&alive), vec![vec![0, 1], vec![3, 4]]);
    }
}
