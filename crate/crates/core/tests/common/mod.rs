#![allow(dead_code)]

use std::collections::BTreeSet;

use boxdim::construct::{
    strong_product, unit_rep_clique, unit_rep_path, CliqueSumNode, CliqueSumTree, NodeSource,
    ProductPlan, Recipe,
};
use boxdim::graph::{ktree_realize, Graph, KTreeBuildPlan, TreeDecomp};
use boxdim::representation::TouchingRep;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `K_{2^d}` as the `2^d` orthants of the unit cube around the origin.
pub fn corner_rep(d: usize) -> TouchingRep {
    unit_rep_clique(1 << d)
}

/// The `a x b` king graph.
pub fn king_rep(a: usize, b: usize) -> TouchingRep {
    strong_product(&ProductPlan::new(unit_rep_path(a), unit_rep_path(b)).unwrap()).unwrap()
}

/// A random k-tree on `n` vertices with each edge kept with probability
/// `keep`, together with the width-k decomposition of the k-tree.
pub fn partial_ktree<R: Rng>(rng: &mut R, k: usize, n: usize, keep: f64) -> (Graph, TreeDecomp) {
    let plan = KTreeBuildPlan::random(k, n, rng);
    let full = ktree_realize(&plan).unwrap();
    let edges: Vec<(usize, usize)> = full.edges().filter(|_| rng.gen_bool(keep)).collect();
    (Graph::from_edges(n, edges).unwrap(), plan.decomposition())
}

pub fn random_subset<R: Rng>(rng: &mut R, n: usize, p: f64) -> BTreeSet<usize> {
    (0..n).filter(|_| rng.gen_bool(p)).collect()
}

/// Two extended 2-tree grids glued along the triangle `{0, 2, 4}`, which is
/// `{(0,0), (1,0), (2,0)}` in both grids.
pub fn two_grid_tree() -> CliqueSumTree {
    let leaf = |seed: u64, root: Vec<usize>, parent: Option<usize>, glue: Vec<usize>| {
        let plan = KTreeBuildPlan::random(2, 6, &mut rng(seed));
        let grid_n = 6 * 2;
        let apices = vec![(0..grid_n).step_by(3).collect(), vec![0, 1, grid_n]];
        CliqueSumNode {
            source: NodeSource::Recipe(Recipe::ExtendedKtreeGrid {
                plan,
                path: 2,
                apices,
            }),
            root,
            parent,
            glue,
        }
    };
    CliqueSumTree {
        nodes: vec![
            leaf(1, vec![], None, vec![]),
            leaf(2, vec![0, 2, 4], Some(0), vec![0, 2, 4]),
        ],
    }
}
