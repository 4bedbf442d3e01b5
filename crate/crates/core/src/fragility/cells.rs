use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use super::frame::Frame;
use super::{DeletionSample, FragilityError};
use crate::geometry::Rational;
use crate::graph::TreeDecomp;
use crate::representation::EnvelopeRep;

/// An open grid cell that contains the outer box of a surviving vertex at
/// that vertex's own level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    /// Largest level whose grid has this cell as a cell.
    pub max_level: usize,
    /// Integer coordinates: the cell is `prod_j (x_j + m_j l_j, x_j + (m_j+1) l_j)`.
    pub index: Vec<BigInt>,
    pub lo: Vec<Rational>,
    pub hi: Vec<Rational>,
    /// Smallest other cell of the tree that contains this one.
    pub parent: Option<usize>,
    /// Surviving vertices of level at most `max_level` whose inner set meets
    /// the cell, sorted.
    pub bag: Vec<usize>,
}

/// Cells ordered so that every parent precedes its children.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellTree {
    pub cells: Vec<Cell>,
    /// Own cell of every vertex; `None` for deleted vertices.
    pub home: Vec<Option<usize>>,
}

impl CellTree {
    pub fn roots(&self) -> Vec<usize> {
        (0..self.cells.len())
            .filter(|&i| self.cells[i].parent.is_none())
            .collect()
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.cells.len()];
        for (i, c) in self.cells.iter().enumerate() {
            if let Some(p) = c.parent {
                ch[p].push(i);
            }
        }
        ch
    }

    pub fn max_bag_size(&self) -> usize {
        self.cells.iter().map(|c| c.bag.len()).max().unwrap_or(0)
    }
}

/// Runs of consecutive levels with identical spacings. Cells of one run are
/// the same sets; cells of a later run refine those of an earlier run.
struct LevelRuns {
    run_of: Vec<usize>,
    last: Vec<usize>,
    /// `ratio[r][j]`: spacing of run `r - 1` over spacing of run `r`.
    ratio: Vec<Vec<BigInt>>,
}

fn level_runs(lengths: &[Vec<BigInt>]) -> LevelRuns {
    let mut run_of = Vec::with_capacity(lengths.len());
    let mut last: Vec<usize> = Vec::new();
    let mut ratio: Vec<Vec<BigInt>> = Vec::new();
    for (i, row) in lengths.iter().enumerate() {
        if i == 0 || *row != lengths[i - 1] {
            if i > 0 {
                let prev = &lengths[i - 1];
                ratio.push(
                    prev.iter()
                        .zip(row)
                        .map(|(p, l)| {
                            let (q, r) = p.div_rem(l);
                            assert!(r.is_zero(), "spacings must divide");
                            q
                        })
                        .collect(),
                );
            } else {
                ratio.push(Vec::new());
            }
            last.push(i);
        }
        *last.last_mut().unwrap() = i;
        run_of.push(last.len() - 1);
    }
    LevelRuns {
        run_of,
        last,
        ratio,
    }
}

/// Builds the containment tree of the cells owned by surviving vertices and
/// fills their bags.
///
/// A vertex's bag cells are exactly the descendants of its own cell that its
/// inner set meets, so bags are filled by a search down from the own cell.
pub fn build_cell_tree(
    e: &EnvelopeRep,
    sample: &DeletionSample,
) -> Result<CellTree, FragilityError> {
    let sch = &sample.schedule;
    let frame = Frame::new(e, &sch.lengths, &sch.offsets);
    let x: Vec<BigInt> = sch
        .offsets
        .iter()
        .enumerate()
        .map(|(j, x)| frame.scaled(j, x))
        .collect();
    cell_tree_in_frame(e, &frame, sample, &x)
}

pub(crate) fn cell_tree_in_frame(
    e: &EnvelopeRep,
    frame: &Frame,
    sample: &DeletionSample,
    x: &[BigInt],
) -> Result<CellTree, FragilityError> {
    let sch = &sample.schedule;
    let runs = level_runs(&frame.lengths);
    let removed = sample.removed_flags(e.n());
    let d = sch.dim;

    let mut cells: Vec<Cell> = Vec::new();
    // Scaled `(lo, hi)` per cell and dimension.
    let mut bounds: Vec<Vec<(BigInt, BigInt)>> = Vec::new();
    let mut by_key: HashMap<(usize, Vec<BigInt>), usize> = HashMap::new();
    let mut home = vec![None; e.n()];
    for (a, &v) in sch.order.iter().enumerate() {
        if removed[v] {
            continue;
        }
        let run = runs.run_of[a];
        let mut index = Vec::with_capacity(d);
        for (((lo, hi), l), xj) in frame.outer[v].iter().zip(&frame.lengths[a]).zip(x) {
            let m = (lo - xj).div_floor(l);
            let start = xj + l * &m;
            if !(&start < lo && *hi < &start + l) {
                return Err(FragilityError::Inconsistent(v));
            }
            index.push(m);
        }
        let key = (run, index);
        let id = match by_key.get(&key) {
            Some(&id) => id,
            None => {
                let level = runs.last[run];
                let b: Vec<(BigInt, BigInt)> = (0..d)
                    .map(|j| {
                        let l = &frame.lengths[level][j];
                        let lo = &x[j] + l * &key.1[j];
                        let hi = &lo + l;
                        (lo, hi)
                    })
                    .collect();
                let lo = b
                    .iter()
                    .enumerate()
                    .map(|(j, (lo, _))| frame.unscaled(j, lo))
                    .collect();
                let hi = b
                    .iter()
                    .enumerate()
                    .map(|(j, (_, hi))| frame.unscaled(j, hi))
                    .collect();
                cells.push(Cell {
                    max_level: level,
                    index: key.1.clone(),
                    lo,
                    hi,
                    parent: None,
                    bag: Vec::new(),
                });
                bounds.push(b);
                by_key.insert(key, cells.len() - 1);
                cells.len() - 1
            }
        };
        home[v] = Some(id);
    }

    // Nearest tree cell containing a cell given by run and index, memoized
    // over the coarser cells visited on the way up.
    let mut nearest: HashMap<(usize, Vec<BigInt>), Option<usize>> = HashMap::new();
    for cell in &mut cells {
        let run = runs.run_of[cell.max_level];
        let mut path = Vec::new();
        let mut cur = (run, cell.index.clone());
        let found = loop {
            if cur.0 == 0 {
                break None;
            }
            let up: Vec<BigInt> = cur
                .1
                .iter()
                .zip(&runs.ratio[cur.0])
                .map(|(m, q)| m.div_floor(q))
                .collect();
            let key = (cur.0 - 1, up);
            if let Some(&hit) = by_key.get(&key) {
                break Some(hit);
            }
            if let Some(&hit) = nearest.get(&key) {
                break hit;
            }
            path.push(key.clone());
            cur = key;
        };
        for key in path {
            nearest.insert(key, found);
        }
        cell.parent = found;
    }

    let tree = CellTree { cells, home };
    let children = tree.children();
    let mut bags: Vec<Vec<usize>> = vec![Vec::new(); tree.cells.len()];
    for (v, h) in tree.home.iter().enumerate() {
        let Some(h) = *h else { continue };
        let meets = |c: usize| match &frame.inner[v] {
            Some(ib) => ib
                .iter()
                .zip(&bounds[c])
                .all(|((a, b), (lo, hi))| a < hi && b > lo),
            None => e.inner[v].meets_open_box(&tree.cells[c].lo, &tree.cells[c].hi),
        };
        let mut stack = vec![h];
        while let Some(c) = stack.pop() {
            bags[c].push(v);
            for &ch in &children[c] {
                if meets(ch) {
                    stack.push(ch);
                }
            }
        }
    }
    let mut tree = tree;
    for (cell, mut bag) in tree.cells.iter_mut().zip(bags) {
        bag.sort_unstable();
        cell.bag = bag;
    }
    Ok(tree)
}

/// The tree decomposition of the surviving graph given by the cell tree.
/// Several maximal cells hang below an extra root with an empty bag.
pub fn build_decomposition(ct: &CellTree) -> TreeDecomp {
    let mut td = TreeDecomp::new();
    let roots = ct.roots();
    let shift = usize::from(roots.len() > 1);
    if shift == 1 {
        td.add_node(None, Vec::new());
    }
    for c in &ct.cells {
        let parent = match c.parent {
            Some(p) => Some(p + shift),
            None if shift == 1 => Some(0),
            None => None,
        };
        td.add_node(parent, c.bag.clone());
    }
    td
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fragility::{build_schedule, sample_deletion};
    use crate::geometry::{rat, BoxNd};
    use crate::graph::{verify_tree_decomposition_excluding, Graph};
    use crate::representation::{envelope_from_boxes, TouchingRep};

    fn unit_path(n: usize) -> EnvelopeRep {
        let boxes = (0..n)
            .map(|i| BoxNd::cube(1, rat(i as i64, 1), rat(i as i64 + 1, 1)).unwrap())
            .collect();
        envelope_from_boxes(&TouchingRep::new(Graph::path(n), 1, boxes).unwrap()).unwrap()
    }

    #[test]
    fn single_vertex_gives_one_bag() {
        let boxes = vec![BoxNd::cube(2, rat(0, 1), rat(1, 1)).unwrap()];
        let e = envelope_from_boxes(&TouchingRep::new(Graph::empty(1), 2, boxes).unwrap()).unwrap();
        for seed in 0..20 {
            let s = sample_deletion(&e, &build_schedule(&e, 2, seed).unwrap());
            let ct = build_cell_tree(&e, &s).unwrap();
            let td = build_decomposition(&ct);
            if s.deleted.is_empty() {
                assert_eq!(td.len(), 1);
                assert_eq!(td.bag(0), &[0]);
                assert_eq!(td.width(), 0);
            } else {
                assert!(td.is_empty());
            }
        }
    }

    #[test]
    fn path_decompositions_verify() {
        let e = unit_path(3);
        for seed in 0..100 {
            let s = sample_deletion(&e, &build_schedule(&e, 2, seed).unwrap());
            let ct = build_cell_tree(&e, &s).unwrap();
            let td = build_decomposition(&ct);
            let report = verify_tree_decomposition_excluding(&e.graph, &td, &s.removed_flags(3));
            assert!(report.is_valid(), "seed {seed}: {:?}", report.violations);
        }
    }

    #[test]
    fn own_cell_contains_outer_box() {
        let e = unit_path(6);
        let s = sample_deletion(&e, &build_schedule(&e, 4, 3).unwrap());
        let ct = build_cell_tree(&e, &s).unwrap();
        for (v, h) in ct.home.iter().enumerate() {
            if let Some(h) = h {
                let c = &ct.cells[*h];
                let side = e.outer[v].side(0);
                assert!(c.lo[0] < *side.lo() && side.hi() < &c.hi[0]);
                assert!(c.bag.contains(&v));
            }
        }
    }

    #[test]
    fn runs_group_equal_spacings() {
        let l: Vec<Vec<BigInt>> = [8, 8, 2, 1, 1]
            .iter()
            .map(|&v| vec![BigInt::from(v)])
            .collect();
        let runs = level_runs(&l);
        assert_eq!(runs.run_of, vec![0, 0, 1, 2, 2]);
        assert_eq!(runs.last, vec![1, 2, 4]);
        assert_eq!(runs.ratio[1], vec![BigInt::from(4)]);
        assert_eq!(runs.ratio[2], vec![BigInt::from(2)]);
    }
}
