use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Graph, GraphError};

/// Largest graph accepted by [`exact_treewidth`].
pub const EXACT_TREEWIDTH_CAP: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TdNode {
    pub parent: Option<usize>,
    pub bag: Vec<usize>,
}

/// Rooted tree of bags; nodes are numbered `0..len`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TreeDecomp {
    pub nodes: Vec<TdNode>,
}

impl TreeDecomp {
    pub fn new() -> Self {
        TreeDecomp::default()
    }

    pub fn single_bag(bag: Vec<usize>) -> Self {
        let mut td = TreeDecomp::new();
        td.add_node(None, bag);
        td
    }

    /// Adds a node; the bag is sorted and deduplicated.
    pub fn add_node(&mut self, parent: Option<usize>, mut bag: Vec<usize>) -> usize {
        bag.sort_unstable();
        bag.dedup();
        self.nodes.push(TdNode { parent, bag });
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn bag(&self, node: usize) -> &[usize] {
        &self.nodes[node].bag
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.nodes[node].parent
    }

    /// Largest bag size minus one (0 for an empty decomposition).
    pub fn width(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| n.bag.len())
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    pub fn max_bag_size(&self) -> usize {
        self.nodes.iter().map(|n| n.bag.len()).max().unwrap_or(0)
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            if let Some(p) = node.parent {
                if p < self.len() {
                    ch[p].push(i);
                }
            }
        }
        ch
    }

    pub fn root(&self) -> Option<usize> {
        self.nodes.iter().position(|n| n.parent.is_none())
    }

    /// Nodes in breadth-first order from the root. Returns `None` unless the
    /// parent links form a single rooted tree.
    pub fn bfs_order(&self) -> Option<Vec<usize>> {
        let roots: Vec<usize> = (0..self.len())
            .filter(|&i| self.nodes[i].parent.is_none())
            .collect();
        if self.is_empty() {
            return Some(Vec::new());
        }
        if roots.len() != 1
            || self
                .nodes
                .iter()
                .any(|n| n.parent.is_some_and(|p| p >= self.len()))
        {
            return None;
        }
        let ch = self.children();
        let mut order = vec![roots[0]];
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            order.extend(ch[u].iter().copied());
        }
        (order.len() == self.len()).then_some(order)
    }
}

#[derive(Serialize, Deserialize)]
struct TreeDecompFile {
    nodes: Vec<usize>,
    parent: BTreeMap<String, Option<usize>>,
    bags: BTreeMap<String, Vec<usize>>,
}

impl Serialize for TreeDecomp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        TreeDecompFile {
            nodes: (0..self.len()).collect(),
            parent: self
                .nodes
                .iter()
                .enumerate()
                .map(|(i, n)| (i.to_string(), n.parent))
                .collect(),
            bags: self
                .nodes
                .iter()
                .enumerate()
                .map(|(i, n)| (i.to_string(), n.bag.clone()))
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TreeDecomp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = TreeDecompFile::deserialize(deserializer)?;
        let index: BTreeMap<usize, usize> = raw
            .nodes
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, i))
            .collect();
        if index.len() != raw.nodes.len() {
            return Err(D::Error::custom("duplicate node id"));
        }
        let lookup = |key: &str| -> Result<usize, D::Error> {
            let id: usize = key
                .parse()
                .map_err(|_| D::Error::custom(format!("bad node id `{key}`")))?;
            index
                .get(&id)
                .copied()
                .ok_or_else(|| D::Error::custom(format!("unknown node {id}")))
        };
        let mut td = TreeDecomp {
            nodes: vec![
                TdNode {
                    parent: None,
                    bag: Vec::new()
                };
                raw.nodes.len()
            ],
        };
        let mut seen_parent = vec![false; raw.nodes.len()];
        for (key, p) in &raw.parent {
            let i = lookup(key)?;
            seen_parent[i] = true;
            td.nodes[i].parent = match p {
                None => None,
                Some(pid) => Some(lookup(&pid.to_string())?),
            };
        }
        if let Some(i) = seen_parent.iter().position(|s| !s) {
            return Err(D::Error::custom(format!(
                "node {} has no parent entry",
                raw.nodes[i]
            )));
        }
        for (key, bag) in raw.bags {
            let i = lookup(&key)?;
            let mut bag = bag;
            bag.sort_unstable();
            bag.dedup();
            td.nodes[i].bag = bag;
        }
        Ok(td)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum TdViolation {
    NotATree,
    VertexOutOfRange { node: usize, vertex: usize },
    RemovedVertexInBag { node: usize, vertex: usize },
    MissingVertex(usize),
    UncoveredEdge(usize, usize),
    Disconnected { vertex: usize, pieces: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TdReport {
    pub width: usize,
    pub violations: Vec<TdViolation>,
}

impl TdReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks both tree-decomposition axioms for `g`.
pub fn verify_tree_decomposition(g: &Graph, td: &TreeDecomp) -> TdReport {
    verify_tree_decomposition_excluding(g, td, &vec![false; g.n()])
}

/// Checks that `td` decomposes `g` minus the vertices flagged in `removed`.
/// Removed vertices may not appear in any bag.
pub fn verify_tree_decomposition_excluding(
    g: &Graph,
    td: &TreeDecomp,
    removed: &[bool],
) -> TdReport {
    let n = g.n();
    let mut violations = Vec::new();
    let alive = |v: usize| !removed[v];
    if td.bfs_order().is_none() {
        violations.push(TdViolation::NotATree);
    }
    let mut in_bag: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, node) in td.nodes.iter().enumerate() {
        for &v in &node.bag {
            if v >= n {
                violations.push(TdViolation::VertexOutOfRange { node: i, vertex: v });
            } else if !alive(v) {
                violations.push(TdViolation::RemovedVertexInBag { node: i, vertex: v });
            } else {
                in_bag[v].push(i);
            }
        }
    }
    for v in (0..n).filter(|&v| alive(v)) {
        if in_bag[v].is_empty() {
            violations.push(TdViolation::MissingVertex(v));
            continue;
        }
        let pieces = in_bag[v]
            .iter()
            .filter(|&&i| match td.nodes[i].parent {
                Some(p) if p < td.len() => td.nodes[p].bag.binary_search(&v).is_err(),
                _ => true,
            })
            .count();
        if pieces != 1 {
            violations.push(TdViolation::Disconnected { vertex: v, pieces });
        }
    }
    for (u, v) in g.edges().filter(|&(u, v)| alive(u) && alive(v)) {
        let covered = in_bag[u]
            .iter()
            .any(|&i| td.nodes[i].bag.binary_search(&v).is_ok());
        if !covered {
            violations.push(TdViolation::UncoveredEdge(u, v));
        }
    }
    TdReport {
        width: td.width(),
        violations,
    }
}

/// Exact treewidth by dynamic programming over vertex subsets
/// (elimination orderings). Refuses graphs above [`EXACT_TREEWIDTH_CAP`].
pub fn exact_treewidth(g: &Graph) -> Result<usize, GraphError> {
    let n = g.n();
    if n > EXACT_TREEWIDTH_CAP {
        return Err(GraphError::TooLarge {
            n,
            cap: EXACT_TREEWIDTH_CAP,
        });
    }
    if n == 0 {
        return Ok(0);
    }
    let adj: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w))
        .collect();
    // q(s, v): vertices outside s ∪ {v} reachable from v through s.
    let q = |s: u32, v: usize| -> u32 {
        let mut seen = 1u32 << v;
        let mut stack = vec![v];
        let mut out = 0u32;
        while let Some(u) = stack.pop() {
            let mut nb = adj[u] & !seen;
            while nb != 0 {
                let w = nb.trailing_zeros() as usize;
                nb &= nb - 1;
                seen |= 1 << w;
                if s >> w & 1 == 1 {
                    stack.push(w);
                } else {
                    out |= 1 << w;
                }
            }
        }
        out
    };
    let full = (1u32 << n) - 1;
    let mut tw = vec![usize::MAX; 1 << n];
    tw[0] = 0;
    for s in 1..=full {
        let mut best = usize::MAX;
        let mut rest = s;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let prev = s & !(1 << v);
            let cost = tw[prev as usize].max(q(prev, v).count_ones() as usize);
            best = best.min(cost);
        }
        tw[s as usize] = best;
    }
    Ok(tw[full as usize])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        let r =
            verify_tree_decomposition(&Graph::complete(3), &TreeDecomp::single_bag(vec![0, 1, 2]));
        assert!(r.is_valid());
        assert_eq!(r.width, 2);

        let mut td = TreeDecomp::new();
        let a = td.add_node(None, vec![0, 1]);
        td.add_node(Some(a), vec![1, 2]);
        let r = verify_tree_decomposition(&Graph::path(3), &td);
        assert!(r.is_valid());
        assert_eq!(r.width, 1);

        let mut td = TreeDecomp::new();
        let a = td.add_node(None, vec![0, 1]);
        td.add_node(Some(a), vec![2]);
        let g = Graph::from_edges(3, [(1, 2)]).unwrap();
        let r = verify_tree_decomposition(&g, &td);
        assert_eq!(r.violations, vec![TdViolation::UncoveredEdge(1, 2)]);
    }

    #[test]
    fn detects_disconnected_occurrence_and_bad_tree() {
        let mut td = TreeDecomp::new();
        let a = td.add_node(None, vec![0, 1]);
        let b = td.add_node(Some(a), vec![1, 2]);
        td.add_node(Some(b), vec![0, 2]);
        let r = verify_tree_decomposition(&Graph::path(3), &td);
        assert!(r.violations.contains(&TdViolation::Disconnected {
            vertex: 0,
            pieces: 2
        }));

        let cyc = TreeDecomp {
            nodes: vec![
                TdNode {
                    parent: Some(1),
                    bag: vec![0],
                },
                TdNode {
                    parent: Some(0),
                    bag: vec![0],
                },
            ],
        };
        assert!(verify_tree_decomposition(&Graph::empty(1), &cyc)
            .violations
            .contains(&TdViolation::NotATree));
    }

    #[test]
    fn excluding_removed_vertices() {
        let g = Graph::path(3);
        let td = TreeDecomp::single_bag(vec![0]);
        let removed = [false, true, true];
        assert!(verify_tree_decomposition_excluding(&g, &td, &removed).is_valid());
        let bad = TreeDecomp::single_bag(vec![0, 1]);
        assert!(!verify_tree_decomposition_excluding(&g, &bad, &removed).is_valid());
    }

    #[test]
    fn json_roundtrip() {
        let mut td = TreeDecomp::new();
        let a = td.add_node(None, vec![1, 0]);
        td.add_node(Some(a), vec![2, 1]);
        let s = serde_json::to_string(&td).unwrap();
        assert_eq!(
            s,
            r#"{"nodes":[0,1],"parent":{"0":null,"1":0},"bags":{"0":[0,1],"1":[1,2]}}"#
        );
        assert_eq!(serde_json::from_str::<TreeDecomp>(&s).unwrap(), td);
        let relabelled =
            r#"{"nodes":[7,3],"parent":{"7":null,"3":7},"bags":{"7":[0,1],"3":[1,2]}}"#;
        assert_eq!(serde_json::from_str::<TreeDecomp>(relabelled).unwrap(), td);
    }

    #[test]
    fn exact_treewidth_small_graphs() {
        assert_eq!(exact_treewidth(&Graph::path(6)).unwrap(), 1);
        assert_eq!(exact_treewidth(&Graph::cycle(6)).unwrap(), 2);
        assert_eq!(exact_treewidth(&Graph::complete(5)).unwrap(), 4);
        assert_eq!(exact_treewidth(&Graph::empty(4)).unwrap(), 0);
        let grid = Graph::path(3).strong_product(&Graph::path(3));
        assert_eq!(exact_treewidth(&grid).unwrap(), 3);
        assert!(exact_treewidth(&Graph::empty(13)).is_err());
    }
}
