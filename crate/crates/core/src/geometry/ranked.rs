//! Order-only views of box families.
//!
//! Touching, intersection and comparability depend only on how endpoints
//! (and side lengths) compare within each dimension, so a family of boxes can
//! be replaced by integer ranks after one sort per dimension.

use super::{BoxNd, BoxRelation, Comparability, Rational};

/// Sorted distinct coordinate values, one list per dimension.
#[derive(Clone, Debug, Default)]
pub struct CoordTable {
    values: Vec<Vec<Rational>>,
}

impl CoordTable {
    pub fn builder(dim: usize) -> CoordTableBuilder {
        CoordTableBuilder {
            values: vec![Vec::new(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Rank of `x` in dimension `j`; `x` must have been inserted.
    pub fn rank(&self, j: usize, x: &Rational) -> u32 {
        self.values[j]
            .binary_search(x)
            .unwrap_or_else(|_| panic!("coordinate {x} missing from rank table")) as u32
    }

    pub fn value(&self, j: usize, r: u32) -> &Rational {
        &self.values[j][r as usize]
    }

    pub fn distinct(&self, j: usize) -> usize {
        self.values[j].len()
    }
}

pub struct CoordTableBuilder {
    values: Vec<Vec<Rational>>,
}

impl CoordTableBuilder {
    pub fn push(&mut self, j: usize, x: Rational) {
        self.values[j].push(x);
    }

    pub fn push_box(&mut self, b: &BoxNd) {
        for (j, s) in b.sides().iter().enumerate() {
            self.values[j].push(s.lo().clone());
            self.values[j].push(s.hi().clone());
        }
    }

    pub fn finish(mut self) -> CoordTable {
        for v in &mut self.values {
            v.sort_unstable();
            v.dedup();
        }
        CoordTable {
            values: self.values,
        }
    }
}

/// Endpoint and side-length ranks of a box family sharing a dimension.
#[derive(Clone, Debug)]
pub struct RankedBoxes {
    dim: usize,
    lo: Vec<u32>,
    hi: Vec<u32>,
    len: Vec<u32>,
}

impl RankedBoxes {
    /// Ranks `boxes`; all of them must have dimension `dim`.
    pub fn new(dim: usize, boxes: &[BoxNd]) -> Self {
        let mut tb = CoordTable::builder(dim);
        for b in boxes {
            tb.push_box(b);
        }
        Self::with_table(dim, boxes, &tb.finish())
    }

    /// Ranks `boxes` against a table that contains all of their endpoints.
    pub fn with_table(dim: usize, boxes: &[BoxNd], table: &CoordTable) -> Self {
        let mut lens = CoordTable::builder(dim);
        for b in boxes {
            for (j, s) in b.sides().iter().enumerate() {
                lens.push(j, s.len());
            }
        }
        let lens = lens.finish();
        let mut lo = Vec::with_capacity(boxes.len() * dim);
        let mut hi = Vec::with_capacity(boxes.len() * dim);
        let mut len = Vec::with_capacity(boxes.len() * dim);
        for b in boxes {
            assert_eq!(b.dim(), dim, "box of wrong dimension");
            for (j, s) in b.sides().iter().enumerate() {
                lo.push(table.rank(j, s.lo()));
                hi.push(table.rank(j, s.hi()));
                len.push(lens.rank(j, &s.len()));
            }
        }
        RankedBoxes { dim, lo, hi, len }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.lo.len() / self.dim.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_empty()
    }

    pub fn lo(&self, v: usize, j: usize) -> u32 {
        self.lo[v * self.dim + j]
    }

    pub fn hi(&self, v: usize, j: usize) -> u32 {
        self.hi[v * self.dim + j]
    }

    pub fn relation(&self, a: usize, b: usize) -> BoxRelation {
        let mut touch = false;
        for j in 0..self.dim {
            let (la, ha, lb, hb) = (self.lo(a, j), self.hi(a, j), self.lo(b, j), self.hi(b, j));
            if ha < lb || hb < la {
                return BoxRelation::Disjoint;
            }
            if ha == lb || hb == la {
                touch = true;
            }
        }
        if touch {
            BoxRelation::Touch
        } else {
            BoxRelation::InteriorOverlap
        }
    }

    /// Number of dimensions in which the two boxes meet in a single point.
    pub fn touch_dims(&self, a: usize, b: usize) -> usize {
        (0..self.dim)
            .filter(|&j| self.hi(a, j) == self.lo(b, j) || self.hi(b, j) == self.lo(a, j))
            .count()
    }

    pub fn intersects(&self, a: usize, b: usize) -> bool {
        (0..self.dim).all(|j| self.hi(a, j) >= self.lo(b, j) && self.hi(b, j) >= self.lo(a, j))
    }

    pub fn comparable(&self, a: usize, b: usize) -> Comparability {
        let (mut a_le, mut b_le) = (true, true);
        for j in 0..self.dim {
            let (x, y) = (self.len[a * self.dim + j], self.len[b * self.dim + j]);
            a_le &= x <= y;
            b_le &= y <= x;
        }
        match (a_le, b_le) {
            (true, true) => Comparability::Both,
            (true, false) => Comparability::ALeB,
            (false, true) => Comparability::BLeA,
            (false, false) => Comparability::Incomparable,
        }
    }
}
