use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Graph, GraphError, TreeDecomp};

/// Attach `vertex` (which must be the next free id) to the k-clique `clique`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttachStep {
    pub clique: Vec<usize>,
    pub vertex: usize,
}

/// A k-tree described as the clique on `0..=k` followed by attachment steps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KTreeBuildPlan {
    pub k: usize,
    pub steps: Vec<AttachStep>,
}

impl KTreeBuildPlan {
    /// Just the base clique `K_{k+1}`.
    pub fn base(k: usize) -> Self {
        KTreeBuildPlan {
            k,
            steps: Vec::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.k + 1 + self.steps.len()
    }

    /// Appends a step attaching the next vertex to `clique`.
    pub fn attach(&mut self, clique: Vec<usize>) -> usize {
        let vertex = self.vertex_count();
        self.steps.push(AttachStep { clique, vertex });
        vertex
    }

    /// The path `0 - 1 - ... - (n-1)` as a 1-tree.
    pub fn path(n: usize) -> Self {
        assert!(n >= 2);
        let mut plan = KTreeBuildPlan::base(1);
        for v in 2..n {
            plan.attach(vec![v - 1]);
        }
        plan
    }

    /// A uniformly chosen sequence of attachments: each step picks a random
    /// existing (k+1)-clique and drops one of its vertices at random.
    pub fn random<R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> Self {
        assert!(n > k, "a k-tree needs at least k+1 vertices");
        let mut plan = KTreeBuildPlan::base(k);
        let mut big: Vec<Vec<usize>> = vec![(0..=k).collect()];
        while plan.vertex_count() < n {
            let m = &big[rng.gen_range(0..big.len())];
            let drop = rng.gen_range(0..=k);
            let clique: Vec<usize> = m
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != drop)
                .map(|(_, &v)| v)
                .collect();
            let v = plan.attach(clique.clone());
            let mut grown = clique;
            grown.push(v);
            big.push(grown);
        }
        plan
    }

    /// Width-k decomposition with one bag per (k+1)-clique created: the base
    /// clique at the root, and each step's bag hanging below a bag that
    /// holds its attachment clique. Assumes the plan realizes.
    pub fn decomposition(&self) -> TreeDecomp {
        fn add(
            td: &mut TreeDecomp,
            holder: &mut HashMap<Vec<usize>, usize>,
            parent: Option<usize>,
            bag: Vec<usize>,
        ) {
            let id = td.add_node(parent, bag);
            let bag = td.bag(id).to_vec();
            for drop in 0..bag.len() {
                let mut face = bag.clone();
                face.remove(drop);
                holder.entry(face).or_insert(id);
            }
        }
        let mut td = TreeDecomp::new();
        let mut holder = HashMap::new();
        add(&mut td, &mut holder, None, (0..=self.k).collect());
        for step in &self.steps {
            let mut face = step.clique.clone();
            face.sort_unstable();
            let parent = holder
                .get(&face)
                .copied()
                .expect("attachment clique was created earlier");
            let mut bag = face;
            bag.push(step.vertex);
            add(&mut td, &mut holder, Some(parent), bag);
        }
        td
    }
}

/// Replays `plan`, checking every attachment set is a k-clique of the graph
/// built so far.
pub fn ktree_realize(plan: &KTreeBuildPlan) -> Result<Graph, GraphError> {
    let k = plan.k;
    let mut g = Graph::complete(k + 1);
    for (i, step) in plan.steps.iter().enumerate() {
        let bad = |why: &str| GraphError::InvalidPlan(format!("step {i}: {why}"));
        if step.vertex != g.n() {
            return Err(bad(&format!(
                "vertex must be {}, found {}",
                g.n(),
                step.vertex
            )));
        }
        let mut sorted = step.clique.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != k || step.clique.len() != k {
            return Err(bad(&format!(
                "attachment set must have {k} distinct vertices"
            )));
        }
        if !g.is_clique(&sorted) {
            return Err(bad("attachment set is not a clique"));
        }
        let v = g.add_vertex();
        for &u in &sorted {
            g.add_edge(u, v).expect("fresh vertex");
        }
    }
    Ok(g)
}

/// A k-tree containing a graph: `vertex_map[v]` is the k-tree id of graph
/// vertex `v`, and `root` lists the k extra vertices forming the root clique,
/// none of which are images of graph vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KTreeEmbedding {
    pub plan: KTreeBuildPlan,
    pub vertex_map: Vec<usize>,
    pub root: Vec<usize>,
}

/// Completes `g` to a k-tree `T` (k = width of `td`) with a root clique of k
/// fresh vertices, so that `g` is a subgraph of `T` minus the root clique.
///
/// Nodes are visited breadth-first; each bag's unplaced vertices are attached
/// one at a time to a k-subset of the running (k+1)-clique that keeps every
/// already placed vertex of the bag.
pub fn ktree_embed(g: &Graph, td: &TreeDecomp) -> Result<KTreeEmbedding, GraphError> {
    let report = super::verify_tree_decomposition(g, td);
    if !report.is_valid() {
        return Err(GraphError::InvalidDecomposition(format!(
            "{:?}",
            report.violations
        )));
    }
    if g.n() == 0 {
        return Err(GraphError::InvalidDecomposition("empty graph".into()));
    }
    let k = td.width();
    let order = td.bfs_order().expect("verified tree");
    let mut plan = KTreeBuildPlan::base(k);
    let mut vertex_map = vec![usize::MAX; g.n()];
    let mut running: Vec<Option<Vec<usize>>> = vec![None; td.len()];
    let mut placed_any = false;

    for &node in &order {
        let mut m: Vec<usize> = match td.parent(node) {
            Some(p) => running[p].clone().expect("parents are visited first"),
            None => (0..k).collect(),
        };
        for &v in td.bag(node) {
            if vertex_map[v] != usize::MAX {
                continue;
            }
            if !placed_any {
                // The first vertex completes the base clique 0..=k.
                vertex_map[v] = k;
                m.push(k);
                placed_any = true;
                continue;
            }
            let keep: Vec<usize> = td
                .bag(node)
                .iter()
                .filter(|&&w| vertex_map[w] != usize::MAX)
                .map(|&w| vertex_map[w])
                .collect();
            let drop = m
                .iter()
                .copied()
                .filter(|x| !keep.contains(x))
                .min()
                .expect("running clique has a vertex outside the bag");
            let clique: Vec<usize> = m.iter().copied().filter(|&x| x != drop).collect();
            let id = plan.attach(clique.clone());
            vertex_map[v] = id;
            m = clique;
            m.push(id);
        }
        running[node] = Some(m);
    }
    Ok(KTreeEmbedding {
        plan,
        vertex_map,
        root: (0..k).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{exact_treewidth, max_clique_size};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn plan_decomposition_has_width_k() {
        let plan = KTreeBuildPlan::random(3, 25, &mut ChaCha8Rng::seed_from_u64(2));
        let g = ktree_realize(&plan).unwrap();
        let td = plan.decomposition();
        assert!(crate::graph::verify_tree_decomposition(&g, &td).is_valid());
        assert_eq!(td.width(), 3);
        assert_eq!(td.len(), 25 - 3);
    }

    #[test]
    fn triangle_with_ears() {
        let mut plan = KTreeBuildPlan::base(2);
        plan.attach(vec![0, 1]);
        plan.attach(vec![1, 2]);
        let g = ktree_realize(&plan).unwrap();
        assert_eq!(g.n(), 5);
        assert_eq!(g.edge_count(), 3 + 2 + 2);
        assert_eq!(exact_treewidth(&g).unwrap(), 2);
    }

    #[test]
    fn rejects_non_clique_attachment() {
        let mut plan = KTreeBuildPlan::base(2);
        plan.attach(vec![0, 1]);
        plan.attach(vec![2, 3]);
        assert!(matches!(
            ktree_realize(&plan),
            Err(GraphError::InvalidPlan(_))
        ));
        let bad_id = KTreeBuildPlan {
            k: 1,
            steps: vec![AttachStep {
                clique: vec![0],
                vertex: 5,
            }],
        };
        assert!(ktree_realize(&bad_id).is_err());
    }

    #[test]
    fn random_ktrees_have_exact_width() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 1..=3 {
            for n in k + 1..=10 {
                let g = ktree_realize(&KTreeBuildPlan::random(k, n, &mut rng)).unwrap();
                assert_eq!(exact_treewidth(&g).unwrap(), k);
                assert_eq!(max_clique_size(&g).unwrap(), k + 1);
                assert_eq!(g.edge_count(), k * (k + 1) / 2 + (n - k - 1) * k);
            }
        }
    }

    fn contains_graph(t: &Graph, g: &Graph, map: &[usize]) -> bool {
        g.edges().all(|(u, v)| t.has_edge(map[u], map[v]))
    }

    #[test]
    fn embed_path_from_path_decomposition() {
        let g = Graph::path(4);
        let mut td = TreeDecomp::new();
        let mut prev = td.add_node(None, vec![0, 1]);
        for i in 1..3 {
            prev = td.add_node(Some(prev), vec![i, i + 1]);
        }
        let emb = ktree_embed(&g, &td).unwrap();
        assert_eq!(emb.plan.k, 1);
        let t = ktree_realize(&emb.plan).unwrap();
        assert_eq!(t.n(), 5);
        assert!(contains_graph(&t, &g, &emb.vertex_map));
        assert!(emb.vertex_map.iter().all(|x| !emb.root.contains(x)));
        // A path plus its root: the root hangs off the first vertex.
        assert_eq!(t.edge_count(), 4);
    }

    #[test]
    fn embed_c4_adds_a_chord() {
        let g = Graph::cycle(4);
        let mut td = TreeDecomp::new();
        let a = td.add_node(None, vec![0, 1, 2]);
        td.add_node(Some(a), vec![0, 2, 3]);
        let emb = ktree_embed(&g, &td).unwrap();
        let t = ktree_realize(&emb.plan).unwrap();
        assert_eq!(t.n(), 6);
        assert!(contains_graph(&t, &g, &emb.vertex_map));
        assert!(t.has_edge(emb.vertex_map[0], emb.vertex_map[2]));
        assert_eq!(exact_treewidth(&t).unwrap(), 2);
        assert!(t.is_clique(&emb.root));
    }
}
