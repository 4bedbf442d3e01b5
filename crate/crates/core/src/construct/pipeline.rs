use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basic::{apex_add, strong_product, subgraph_extend, unit_rep_path, ProductPlan};
use super::extendable::{clique_sum, make_cs_extendable, promote_root, restrict};
use super::ktree::ktree_cs_rep;
use super::{check_touching, require_cs, require_touching, ConstructError};
use crate::graph::{
    greedy_proper_coloring, greedy_star_coloring, Clique, Graph, KTreeBuildPlan, StarRule,
};
use crate::representation::{CsRep, TouchingRep};

/// How a node's comparable touching representation is obtained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Recipe {
    Ktree {
        plan: KTreeBuildPlan,
    },
    /// The k-tree times a path on `path` vertices; vertex `(u, i)` has id
    /// `u * path + i`.
    KtreeGrid {
        plan: KTreeBuildPlan,
        path: usize,
    },
    /// A k-tree grid plus one apex per entry of `apices`, added in order;
    /// each entry lists the neighbors of the new vertex.
    ExtendedKtreeGrid {
        plan: KTreeBuildPlan,
        path: usize,
        apices: Vec<Vec<usize>>,
    },
    FromRep {
        rep: TouchingRep,
    },
}

impl Recipe {
    pub fn realize(&self) -> Result<TouchingRep, ConstructError> {
        match self {
            Recipe::Ktree { plan } => Ok(ktree_cs_rep(plan)?.base),
            Recipe::KtreeGrid { plan, path } => grid(plan, *path),
            Recipe::ExtendedKtreeGrid { plan, path, apices } => {
                if apices.len() > plan.k {
                    return Err(ConstructError::Mismatch(format!(
                        "{} apices exceed k = {}",
                        apices.len(),
                        plan.k
                    )));
                }
                let mut r = grid(plan, *path)?;
                for nb in apices {
                    r = apex_add(&r, &nb.iter().copied().collect())?;
                }
                Ok(r)
            }
            Recipe::FromRep { rep } => {
                require_touching(rep)?;
                Ok(rep.clone())
            }
        }
    }
}

fn grid(plan: &KTreeBuildPlan, path: usize) -> Result<TouchingRep, ConstructError> {
    if path == 0 {
        return Err(ConstructError::Mismatch(
            "the path needs at least one vertex".into(),
        ));
    }
    strong_product(&ProductPlan::new(
        ktree_cs_rep(plan)?.base,
        unit_rep_path(path),
    )?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NodeSource {
    Certificate(CsRep),
    Recipe(Recipe),
}

/// A graph with root clique `root`; unless it is the tree's root, it is
/// glued onto its parent by identifying `glue[i]` (a parent vertex) with
/// `root[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliqueSumNode {
    pub source: NodeSource,
    #[serde(default)]
    pub root: Vec<usize>,
    #[serde(default)]
    pub parent: Option<usize>,
    #[serde(default)]
    pub glue: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliqueSumTree {
    pub nodes: Vec<CliqueSumNode>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineOutput {
    pub rep: TouchingRep,
    /// The folded certificate; absent when the tree is a single recipe node.
    #[serde(skip)]
    pub certificate: Option<CsRep>,
    /// `labels[v] = (node, vertex)`: where output vertex `v` comes from.
    pub labels: Vec<(usize, usize)>,
    /// Largest dimension of a node's input representation.
    pub leaf_dim: usize,
    /// Largest color count or root size over the nodes.
    pub colors: usize,
    pub clique_sum_dim: usize,
    /// `leaf_dim + 2 * colors`.
    pub dim_bound: usize,
    /// Colors of the star coloring used by the final subgraph step.
    pub star_colors: Option<usize>,
}

struct NodeCert {
    cert: CsRep,
    /// `to_cert[v]` is the certificate id of node vertex `v`.
    to_cert: Vec<usize>,
    leaf_dim: usize,
    colors: usize,
}

impl CliqueSumTree {
    /// The root node, after checking that parents form a tree and that glue
    /// cliques and root cliques have matching sizes.
    pub fn validate(&self) -> Result<usize, ConstructError> {
        let bad = |m: String| Err(ConstructError::Mismatch(m));
        let roots: Vec<usize> = (0..self.nodes.len())
            .filter(|&i| self.nodes[i].parent.is_none())
            .collect();
        if roots.len() != 1 {
            return bad(format!("expected one root node, found {}", roots.len()));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if let Some(p) = node.parent {
                if p >= self.nodes.len() || p == i {
                    return bad(format!("node {i} has invalid parent {p}"));
                }
                if node.glue.len() != node.root.len() {
                    return bad(format!(
                        "node {i} glues {} vertices onto a root of size {}",
                        node.glue.len(),
                        node.root.len()
                    ));
                }
            } else if !node.glue.is_empty() {
                return bad("the root node cannot have a glue clique".into());
            }
        }
        if self.bfs(roots[0]).len() != self.nodes.len() {
            return bad("parent links do not form a tree".into());
        }
        Ok(roots[0])
    }

    fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            if let Some(p) = node.parent {
                ch[p].push(i);
            }
        }
        ch
    }

    fn bfs(&self, root: usize) -> Vec<usize> {
        let ch = self.children();
        let mut order = vec![root];
        let mut queue = VecDeque::from([root]);
        let mut seen = vec![false; self.nodes.len()];
        seen[root] = true;
        while let Some(x) = queue.pop_front() {
            for &c in &ch[x] {
                if !seen[c] {
                    seen[c] = true;
                    order.push(c);
                    queue.push_back(c);
                }
            }
        }
        order
    }
}

fn node_cert(node: &CliqueSumNode) -> Result<NodeCert, ConstructError> {
    match &node.source {
        NodeSource::Certificate(c) => {
            require_cs(c)?;
            if Clique::new(node.root.clone()) != c.root {
                return Err(ConstructError::Mismatch(format!(
                    "declared root {:?} differs from the certificate root {:?}",
                    node.root, c.root
                )));
            }
            Ok(NodeCert {
                to_cert: (0..c.base.n()).collect(),
                leaf_dim: c.dim(),
                colors: 0,
                cert: c.clone(),
            })
        }
        NodeSource::Recipe(recipe) => {
            let rep = recipe.realize()?;
            let root: BTreeSet<usize> = node.root.iter().copied().collect();
            if root.len() != node.root.len()
                || root.iter().any(|&v| v >= rep.n())
                || !rep.graph.is_clique(&node.root)
            {
                return Err(ConstructError::Mismatch(format!(
                    "root {:?} is not a clique",
                    node.root
                )));
            }
            let keep: Vec<usize> = (0..rep.n()).filter(|v| !root.contains(v)).collect();
            let sub = restrict(&rep, &keep);
            let coloring = greedy_proper_coloring(&sub.graph, &sub.volume_order())?;
            let ext = make_cs_extendable(&sub, &coloring)?;
            let mut to_cert = vec![0; rep.n()];
            for (i, &v) in keep.iter().enumerate() {
                to_cert[v] = i;
            }
            let neighbors: Vec<BTreeSet<usize>> = node
                .root
                .iter()
                .map(|&r| {
                    rep.graph
                        .neighbors(r)
                        .iter()
                        .filter(|w| !root.contains(w))
                        .map(|&w| to_cert[w])
                        .collect()
                })
                .collect();
            for (i, &r) in node.root.iter().enumerate() {
                to_cert[r] = keep.len() + i;
            }
            let cert = promote_root(&ext, &neighbors)?;
            Ok(NodeCert {
                cert,
                to_cert,
                leaf_dim: rep.dim,
                colors: coloring.color_count().max(node.root.len()),
            })
        }
    }
}

/// Builds every node's certificate (in parallel), then folds clique-sums
/// from the leaves up. Every intermediate certificate is verified.
pub fn pipeline_clique_sums(t: &CliqueSumTree) -> Result<PipelineOutput, ConstructError> {
    let root = t.validate()?;
    if t.nodes.len() == 1 {
        if let NodeSource::Recipe(recipe) = &t.nodes[0].source {
            let rep = recipe.realize()?;
            let colors = greedy_proper_coloring(&rep.graph, &rep.volume_order())?.color_count();
            return Ok(PipelineOutput {
                labels: (0..rep.n()).map(|v| (0, v)).collect(),
                leaf_dim: rep.dim,
                colors,
                clique_sum_dim: rep.dim,
                dim_bound: rep.dim + 2 * colors,
                star_colors: None,
                certificate: None,
                rep,
            });
        }
    }
    let certs: Vec<NodeCert> = t
        .nodes
        .par_iter()
        .map(node_cert)
        .collect::<Result<_, _>>()?;
    let leaf_dim = certs.iter().map(|c| c.leaf_dim).max().unwrap_or(0);
    let colors = certs.iter().map(|c| c.colors).max().unwrap_or(0);

    let children = t.children();
    let order = t.bfs(root);
    let mut folded: BTreeMap<usize, (CsRep, Vec<(usize, usize)>)> = BTreeMap::new();
    let mut certs: Vec<Option<NodeCert>> = certs.into_iter().map(Some).collect();
    for &x in order.iter().rev() {
        let nc = certs[x].take().expect("each node is folded once");
        let mut labels = vec![(x, usize::MAX); nc.cert.base.n()];
        for (v, &c) in nc.to_cert.iter().enumerate() {
            labels[c] = (x, v);
        }
        let mut rep = nc.cert;
        for &child in &children[x] {
            let (child_rep, child_labels) =
                folded.remove(&child).expect("children are folded first");
            let node = &t.nodes[child];
            let child_to_cert = |v: usize| {
                child_labels
                    .iter()
                    .position(|&l| l == (child, v))
                    .expect("root vertex")
            };
            let glue_vertices: Vec<usize> = node
                .glue
                .iter()
                .map(|&v| {
                    nc.to_cert
                        .get(v)
                        .copied()
                        .ok_or_else(|| ConstructError::Mismatch(format!("glue vertex {v}")))
                })
                .collect::<Result<_, _>>()?;
            let matching: BTreeMap<usize, usize> = glue_vertices
                .iter()
                .copied()
                .zip(node.root.iter().map(|&r| child_to_cert(r)))
                .collect();
            let glue = Clique::new(glue_vertices);
            let res = clique_sum(&rep, &glue, &child_rep, &matching)?;
            labels.resize(res.rep.base.n(), (usize::MAX, usize::MAX));
            for (cv, &nv) in res.vertex_map.iter().enumerate() {
                if !child_rep.is_root(cv) {
                    labels[nv] = child_labels[cv];
                }
            }
            rep = res.rep;
        }
        folded.insert(x, (rep, labels));
    }
    let (cert, labels) = folded.remove(&root).expect("root is folded last");
    let clique_sum_dim = cert.dim();
    Ok(PipelineOutput {
        rep: check_touching(cert.base.clone())?,
        certificate: Some(cert),
        labels,
        leaf_dim,
        colors,
        clique_sum_dim,
        dim_bound: leaf_dim + 2 * colors,
        star_colors: None,
    })
}

/// The clique-sum pipeline followed by restriction to the spanning subgraph
/// `target` (on the output's vertex ids), using a greedy star coloring in
/// volume order.
pub fn pipeline_minor(t: &CliqueSumTree, target: &Graph) -> Result<PipelineOutput, ConstructError> {
    let mut out = pipeline_clique_sums(t)?;
    let star = greedy_star_coloring(&out.rep.graph, &out.rep.volume_order(), StarRule::AsWritten)?;
    out.rep = subgraph_extend(&out.rep, target, &star)?;
    out.star_colors = Some(star.color_count());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::unit_rep_clique;
    use crate::graph::Graph;

    fn triangle(root: Vec<usize>, parent: Option<usize>, glue: Vec<usize>) -> CliqueSumNode {
        CliqueSumNode {
            source: NodeSource::Recipe(Recipe::FromRep {
                rep: unit_rep_clique(3),
            }),
            root,
            parent,
            glue,
        }
    }

    #[test]
    fn bowtie_from_two_triangles() {
        let t = CliqueSumTree {
            nodes: vec![
                triangle(vec![], None, vec![]),
                triangle(vec![0], Some(0), vec![2]),
            ],
        };
        let out = pipeline_clique_sums(&t).unwrap();
        let bowtie =
            Graph::from_edges(5, [(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)]).unwrap();
        assert!(out.rep.graph.is_isomorphic_small(&bowtie));
        assert!(out.clique_sum_dim <= out.dim_bound);
        assert_eq!(out.labels.len(), 5);
    }

    #[test]
    fn single_grid_leaf() {
        let leaf = CliqueSumNode {
            source: NodeSource::Recipe(Recipe::KtreeGrid {
                plan: KTreeBuildPlan::base(2),
                path: 3,
            }),
            root: vec![],
            parent: None,
            glue: vec![],
        };
        let out = pipeline_clique_sums(&CliqueSumTree { nodes: vec![leaf] }).unwrap();
        assert_eq!(out.rep.dim, 4);
        assert_eq!(
            out.rep.graph,
            Graph::complete(3).strong_product(&Graph::path(3))
        );
    }

    #[test]
    fn rejects_two_roots() {
        let t = CliqueSumTree {
            nodes: vec![
                triangle(vec![], None, vec![]),
                triangle(vec![], None, vec![]),
            ],
        };
        assert!(pipeline_clique_sums(&t).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let t = CliqueSumTree {
            nodes: vec![
                triangle(vec![], None, vec![]),
                triangle(vec![0, 1], Some(0), vec![1, 2]),
            ],
        };
        let text = serde_json::to_string(&t).unwrap();
        let back: CliqueSumTree = serde_json::from_str(&text).unwrap();
        assert_eq!(back, t);
    }
}
