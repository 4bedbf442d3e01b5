use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{verify_touching_rep, TouchingRep, TouchingReport, Witnesses};
use crate::geometry::{BoxNd, CoordTable, Interval, Rational};
use crate::graph::{enumerate_cliques, Clique, Graph};

/// A touching representation extendable by clique-sums: root boxes occupy
/// `[-1,0]` in their private dimension and `[0,1]` elsewhere, all other boxes
/// lie in `[0,1)^d`, and every clique `C` owns a point `p(C)` whose small cube
/// `[p, p + epsilon]^d` meets exactly the boxes of `C`, each along a facet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsRep {
    pub base: TouchingRep,
    pub root: Clique,
    pub root_dims: BTreeMap<usize, usize>,
    pub clique_points: BTreeMap<Clique, Vec<Rational>>,
    pub epsilon: Rational,
}

impl CsRep {
    pub fn dim(&self) -> usize {
        self.base.dim
    }

    pub fn graph(&self) -> &Graph {
        &self.base.graph
    }

    pub fn point(&self, c: &Clique) -> Option<&[Rational]> {
        self.clique_points.get(c).map(Vec::as_slice)
    }

    /// The cube `[p(C), p(C) + eps]^d`.
    pub fn clique_box(&self, c: &Clique, eps: &Rational) -> Option<BoxNd> {
        let p = self.point(c)?;
        BoxNd::new(p.iter().map(|x| Interval::of(x.clone(), x + eps)).collect()).ok()
    }

    /// The dimension in which `h(v)` ends exactly at `p(C)`, if unique.
    pub fn facet_dim(&self, c: &Clique, v: usize) -> Option<usize> {
        let p = self.point(c)?;
        let b = &self.base.boxes[v];
        let mut hits = (0..self.dim()).filter(|&j| b.side(j).hi() == &p[j]);
        let i = hits.next()?;
        hits.next().is_none().then_some(i)
    }

    pub fn is_root(&self, v: usize) -> bool {
        self.root.contains(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CsViolation {
    NonPositiveEpsilon,
    RootNotClique,
    CliqueEnumeration(String),
    MissingCliquePoint(Clique),
    NotAClique(Clique),
    PointDimension(Clique),
    /// (v0): root dimensions missing, extra, out of range or repeated.
    RootDims(String),
    /// (v1): the root box has the wrong shape.
    RootBox(usize),
    /// (v2): a non-root box leaves `[0,1)^d`.
    OutsideUnitCube(usize),
    PointOutsideUnitCube(Clique),
    PointOutsideBox {
        clique: Clique,
        vertex: usize,
    },
    /// (c1): two clique cubes meet.
    CliqueBoxesMeet {
        a: Clique,
        b: Clique,
        epsilon: Rational,
    },
    /// (c2): a vertex outside the clique meets its cube.
    ForeignBoxMeets {
        clique: Clique,
        vertex: usize,
        epsilon: Rational,
    },
    /// (c2): a clique vertex does not meet the cube along a facet at `p(C)`.
    NotAFacet {
        clique: Clique,
        vertex: usize,
        epsilon: Rational,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CsReport {
    pub touching: TouchingReport,
    pub epsilon: Rational,
    pub cliques: usize,
    pub violations: Witnesses<CsViolation>,
}

impl CsReport {
    pub fn is_valid(&self) -> bool {
        self.touching.is_valid() && self.violations.is_empty()
    }
}

/// Reasons why no positive epsilon can make a certificate valid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuralFailure {
    pub reasons: Vec<CsViolation>,
}

impl fmt::Display for StructuralFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "no valid epsilon exists: ")?;
        for (i, r) in self.reasons.iter().take(5).enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{r:?}")?;
        }
        if self.reasons.len() > 5 {
            write!(f, "; and {} more", self.reasons.len() - 5)?;
        }
        Ok(())
    }
}

impl std::error::Error for StructuralFailure {}

/// Full check of a clique-sum extendable certificate with comparable boxes.
pub fn verify_cs_rep(c: &CsRep) -> CsReport {
    verify_cs_rep_with(c, true)
}

/// Checks the touching representation, the root conditions (v0)-(v2), the
/// clique conditions (c1)-(c2) at `epsilon` and at `epsilon / 2`, and that
/// each `p(C)` lies in `[0,1)^d` and in every box of `C`.
pub fn verify_cs_rep_with(c: &CsRep, require_comparable: bool) -> CsReport {
    let touching = verify_touching_rep(&c.base, require_comparable);
    let mut violations = Witnesses::default();
    let cliques = c.clique_points.len();
    let report = |violations| CsReport {
        touching: touching.clone(),
        epsilon: c.epsilon.clone(),
        cliques,
        violations,
    };
    if !touching.shape_errors.is_empty() {
        return report(violations);
    }
    if !c.epsilon.is_positive() {
        violations.push(CsViolation::NonPositiveEpsilon);
        return report(violations);
    }
    let shape = shape_violations(c);
    let points_ok = !shape
        .iter()
        .any(|v| matches!(v, CsViolation::PointDimension(_)));
    for v in shape {
        violations.push(v);
    }
    if !points_ok {
        return report(violations);
    }
    let half = &c.epsilon * &Rational::pow2_inv(1);
    let ctx = PointContext::new(c, &[c.epsilon.clone(), half.clone()]);
    ctx.membership(&mut violations);
    for (e, eps) in [&c.epsilon, &half].into_iter().enumerate() {
        ctx.facet_conditions(e, eps, &mut violations);
        ctx.cube_disjointness(e, eps, &mut violations);
    }
    report(violations)
}

/// Root, unit-cube and clique-key conditions, which do not involve epsilon.
fn shape_violations(c: &CsRep) -> Vec<CsViolation> {
    let d = c.dim();
    let n = c.base.n();
    let mut out = Vec::new();
    if c.root.vertices().iter().any(|&v| v >= n) || !c.graph().is_clique(c.root.vertices()) {
        out.push(CsViolation::RootNotClique);
    }
    let keys: BTreeSet<usize> = c.root_dims.keys().copied().collect();
    let roots: BTreeSet<usize> = c.root.vertices().iter().copied().collect();
    if keys != roots {
        out.push(CsViolation::RootDims(format!(
            "root dimensions given for {keys:?}, root is {roots:?}"
        )));
    }
    let mut used = BTreeMap::new();
    for (&u, &du) in &c.root_dims {
        if du >= d {
            out.push(CsViolation::RootDims(format!(
                "dimension {du} of vertex {u} out of range"
            )));
        } else if let Some(prev) = used.insert(du, u) {
            out.push(CsViolation::RootDims(format!(
                "vertices {prev} and {u} share dimension {du}"
            )));
        }
    }
    let zero = Rational::zero();
    let one = Rational::one();
    let minus_one = -Rational::one();
    for v in 0..n {
        let b = &c.base.boxes[v];
        if let Some(&du) = c.root_dims.get(&v).filter(|_| roots.contains(&v)) {
            let ok = (0..d).all(|j| {
                let s = b.side(j);
                if j == du {
                    s.lo() == &minus_one && s.hi() == &zero
                } else {
                    s.lo() == &zero && s.hi() == &one
                }
            });
            if !ok {
                out.push(CsViolation::RootBox(v));
            }
        } else if !roots.contains(&v) && !b.sides().iter().all(|s| s.lo() >= &zero && s.hi() < &one)
        {
            out.push(CsViolation::OutsideUnitCube(v));
        }
    }
    match enumerate_cliques(c.graph()) {
        Err(e) => out.push(CsViolation::CliqueEnumeration(e.to_string())),
        Ok(all) => {
            let all: BTreeSet<Clique> = all.into_iter().collect();
            for k in &all {
                if !c.clique_points.contains_key(k) {
                    out.push(CsViolation::MissingCliquePoint(k.clone()));
                }
            }
            for k in c.clique_points.keys() {
                if !all.contains(k) {
                    out.push(CsViolation::NotAClique(k.clone()));
                }
            }
        }
    }
    for (k, p) in &c.clique_points {
        if p.len() != d {
            out.push(CsViolation::PointDimension(k.clone()));
        }
    }
    out
}

/// Rank tables over box endpoints, 0, 1, the clique points and the points
/// shifted by each requested epsilon.
struct PointContext<'a> {
    c: &'a CsRep,
    d: usize,
    cliques: Vec<&'a Clique>,
    table: CoordTable,
    lo: Vec<u32>,
    hi: Vec<u32>,
    p: Vec<u32>,
    shifted: Vec<Vec<u32>>,
    zero: Vec<u32>,
    one: Vec<u32>,
}

impl<'a> PointContext<'a> {
    fn new(c: &'a CsRep, shifts: &[Rational]) -> Self {
        let d = c.dim();
        let cliques: Vec<&Clique> = c.clique_points.keys().collect();
        let mut tb = CoordTable::builder(d);
        for b in &c.base.boxes {
            tb.push_box(b);
        }
        for j in 0..d {
            tb.push(j, Rational::zero());
            tb.push(j, Rational::one());
        }
        let shifted_vals: Vec<Vec<Vec<Rational>>> = shifts
            .iter()
            .map(|e| {
                cliques
                    .iter()
                    .map(|k| c.clique_points[*k].iter().map(|x| x + e).collect())
                    .collect()
            })
            .collect();
        for k in &cliques {
            for (j, x) in c.clique_points[*k].iter().enumerate() {
                tb.push(j, x.clone());
            }
        }
        for per_shift in &shifted_vals {
            for pt in per_shift {
                for (j, x) in pt.iter().enumerate() {
                    tb.push(j, x.clone());
                }
            }
        }
        let table = tb.finish();
        let mut lo = Vec::with_capacity(c.base.n() * d);
        let mut hi = Vec::with_capacity(c.base.n() * d);
        for b in &c.base.boxes {
            for (j, s) in b.sides().iter().enumerate() {
                lo.push(table.rank(j, s.lo()));
                hi.push(table.rank(j, s.hi()));
            }
        }
        let p = cliques
            .iter()
            .flat_map(|k| {
                c.clique_points[*k]
                    .iter()
                    .enumerate()
                    .map(|(j, x)| table.rank(j, x))
                    .collect::<Vec<_>>()
            })
            .collect();
        let shifted = shifted_vals
            .iter()
            .map(|per| {
                per.iter()
                    .flat_map(|pt| {
                        pt.iter()
                            .enumerate()
                            .map(|(j, x)| table.rank(j, x))
                            .collect::<Vec<_>>()
                    })
                    .collect()
            })
            .collect();
        let zero = (0..d).map(|j| table.rank(j, &Rational::zero())).collect();
        let one = (0..d).map(|j| table.rank(j, &Rational::one())).collect();
        PointContext {
            c,
            d,
            cliques,
            table,
            lo,
            hi,
            p,
            shifted,
            zero,
            one,
        }
    }

    fn lo(&self, v: usize, j: usize) -> u32 {
        self.lo[v * self.d + j]
    }

    fn hi(&self, v: usize, j: usize) -> u32 {
        self.hi[v * self.d + j]
    }

    fn p(&self, ci: usize, j: usize) -> u32 {
        self.p[ci * self.d + j]
    }

    fn pe(&self, e: usize, ci: usize, j: usize) -> u32 {
        self.shifted[e][ci * self.d + j]
    }

    fn membership(&self, out: &mut Witnesses<CsViolation>) {
        for (ci, k) in self.cliques.iter().enumerate() {
            if !(0..self.d).all(|j| self.p(ci, j) >= self.zero[j] && self.p(ci, j) < self.one[j]) {
                out.push(CsViolation::PointOutsideUnitCube((*k).clone()));
            }
            for &v in k.vertices() {
                if !(0..self.d)
                    .all(|j| self.lo(v, j) <= self.p(ci, j) && self.p(ci, j) <= self.hi(v, j))
                {
                    out.push(CsViolation::PointOutsideBox {
                        clique: (*k).clone(),
                        vertex: v,
                    });
                }
            }
        }
    }

    /// Condition (c2) for shift index `e`.
    fn facet_conditions(&self, e: usize, eps: &Rational, out: &mut Witnesses<CsViolation>) {
        let n = self.c.base.n();
        for (ci, k) in self.cliques.iter().enumerate() {
            for v in 0..n {
                if k.contains(v) {
                    let mut touching = 0;
                    let mut ok = true;
                    for j in 0..self.d {
                        if self.hi(v, j) == self.p(ci, j) {
                            touching += 1;
                        } else if !(self.lo(v, j) <= self.p(ci, j)
                            && self.pe(e, ci, j) <= self.hi(v, j))
                        {
                            ok = false;
                        }
                    }
                    if !ok || touching != 1 {
                        out.push(CsViolation::NotAFacet {
                            clique: (*k).clone(),
                            vertex: v,
                            epsilon: eps.clone(),
                        });
                    }
                } else {
                    let meets = (0..self.d).all(|j| {
                        self.lo(v, j) <= self.pe(e, ci, j) && self.p(ci, j) <= self.hi(v, j)
                    });
                    if meets {
                        out.push(CsViolation::ForeignBoxMeets {
                            clique: (*k).clone(),
                            vertex: v,
                            epsilon: eps.clone(),
                        });
                    }
                }
            }
        }
    }

    /// Dimension with the most distinct clique-point coordinates.
    fn sweep_dim(&self) -> usize {
        (0..self.d)
            .max_by_key(|&j| {
                let mut vals: Vec<u32> = (0..self.cliques.len()).map(|ci| self.p(ci, j)).collect();
                vals.sort_unstable();
                vals.dedup();
                (vals.len(), std::cmp::Reverse(j))
            })
            .unwrap_or(0)
    }

    /// Condition (c1) for shift index `e`, by a sweep along one dimension.
    fn cube_disjointness(&self, e: usize, eps: &Rational, out: &mut Witnesses<CsViolation>) {
        let s = self.sweep_dim();
        let mut order: Vec<usize> = (0..self.cliques.len()).collect();
        order.sort_by_key(|&ci| self.p(ci, s));
        for (pos, &a) in order.iter().enumerate() {
            for &b in &order[pos + 1..] {
                if self.p(b, s) > self.pe(e, a, s) {
                    break;
                }
                let meets = (0..self.d)
                    .all(|j| self.p(b, j) <= self.pe(e, a, j) && self.p(a, j) <= self.pe(e, b, j));
                if meets {
                    let (x, y) = (self.cliques[a].clone(), self.cliques[b].clone());
                    let (x, y) = if x <= y { (x, y) } else { (y, x) };
                    out.push(CsViolation::CliqueBoxesMeet {
                        a: x,
                        b: y,
                        epsilon: eps.clone(),
                    });
                }
            }
        }
    }

    fn value(&self, j: usize, r: u32) -> &Rational {
        self.table.value(j, r)
    }
}

/// Largest safe epsilon for the given boxes and clique points, found from
/// per-constraint budgets: for `v` in `C` the room `hi - p` left in every
/// non-facet dimension, for `v` outside `C` the largest separating gap
/// `lo - p`, and for clique pairs their Chebyshev distance. The result is the
/// minimum budget halved and rounded down to a power of two; the certificate
/// then verifies at it and at every smaller power of two.
pub fn max_valid_epsilon(c: &CsRep) -> Result<Rational, StructuralFailure> {
    let mut reasons = Vec::new();
    let touching = verify_touching_rep(&c.base, false);
    if !touching.shape_errors.is_empty() {
        return Err(StructuralFailure {
            reasons: touching
                .shape_errors
                .into_iter()
                .map(CsViolation::RootDims)
                .collect(),
        });
    }
    reasons.extend(shape_violations(c));
    if !reasons.is_empty() {
        return Err(StructuralFailure { reasons });
    }
    let ctx = PointContext::new(c, &[]);
    let mut members = Witnesses::default();
    ctx.membership(&mut members);
    if !members.is_empty() {
        return Err(StructuralFailure {
            reasons: members.items,
        });
    }
    let d = ctx.d;
    let n = c.base.n();
    let mut budget = Rational::one();

    // Clique members: one facet dimension, room above p elsewhere.
    for (ci, k) in ctx.cliques.iter().enumerate() {
        for &v in k.vertices() {
            let facets = (0..d).filter(|&j| ctx.hi(v, j) == ctx.p(ci, j)).count();
            if facets != 1 {
                reasons.push(CsViolation::NotAFacet {
                    clique: (*k).clone(),
                    vertex: v,
                    epsilon: Rational::zero(),
                });
                continue;
            }
            for j in 0..d {
                if ctx.hi(v, j) != ctx.p(ci, j) {
                    let room = ctx.value(j, ctx.hi(v, j)) - ctx.value(j, ctx.p(ci, j));
                    budget = budget.min(room);
                }
            }
        }
    }

    // Distinct clique points: Chebyshev distance, strict.
    match min_chebyshev(&ctx) {
        Err((a, b)) => reasons.push(CsViolation::CliqueBoxesMeet {
            a,
            b,
            epsilon: Rational::zero(),
        }),
        Ok(Some(dist)) => budget = budget.min(dist),
        Ok(None) => {}
    }
    if !reasons.is_empty() {
        return Err(StructuralFailure { reasons });
    }

    // Foreign vertices: only pairs not already separated beyond `budget`
    // need exact gaps.
    let pre = PointContext::new(c, std::slice::from_ref(&budget));
    for (ci, k) in pre.cliques.iter().enumerate() {
        for v in (0..n).filter(|&v| !k.contains(v)) {
            if (0..d).any(|j| pre.hi(v, j) < pre.p(ci, j) || pre.lo(v, j) > pre.pe(0, ci, j)) {
                continue;
            }
            let gap = (0..d)
                .filter(|&j| pre.lo(v, j) > pre.p(ci, j))
                .map(|j| pre.value(j, pre.lo(v, j)) - pre.value(j, pre.p(ci, j)))
                .max();
            match gap {
                Some(g) => budget = budget.min(g),
                None => reasons.push(CsViolation::ForeignBoxMeets {
                    clique: (*k).clone(),
                    vertex: v,
                    epsilon: Rational::zero(),
                }),
            }
        }
    }
    if !reasons.is_empty() {
        return Err(StructuralFailure { reasons });
    }
    Ok((budget * Rational::pow2_inv(1)).pow2_floor())
}

/// Smallest Chebyshev distance between clique points, or the first pair of
/// equal points.
fn min_chebyshev(ctx: &PointContext) -> Result<Option<Rational>, (Clique, Clique)> {
    let m = ctx.cliques.len();
    let s = ctx.sweep_dim();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&ci| ctx.p(ci, s));
    let val = |ci: usize, j: usize| ctx.value(j, ctx.p(ci, j));
    let mut best: Option<Rational> = None;
    for (pos, &a) in order.iter().enumerate() {
        for &b in &order[pos + 1..] {
            let ds = val(b, s) - val(a, s);
            if best.as_ref().is_some_and(|bst| &ds >= bst) {
                break;
            }
            if (0..ctx.d).all(|j| ctx.p(a, j) == ctx.p(b, j)) {
                return Err((ctx.cliques[a].clone(), ctx.cliques[b].clone()));
            }
            let dist = (0..ctx.d)
                .map(|j| (val(b, j) - val(a, j)).abs())
                .max()
                .expect("positive dimension");
            if best.as_ref().is_none_or(|bst| &dist < bst) {
                best = Some(dist);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rat;

    fn single_vertex(d: usize, p_empty: Rational, p_v: Rational, eps: Rational) -> CsRep {
        let b = BoxNd::cube(d, rat(0, 1), rat(1, 2)).unwrap();
        let base = TouchingRep::new(Graph::empty(1), d, vec![b]).unwrap();
        let mut pts = BTreeMap::new();
        pts.insert(Clique::empty(), vec![p_empty; d]);
        pts.insert(Clique::new(vec![0]), {
            let mut p = vec![rat(1, 4); d];
            p[0] = p_v;
            p
        });
        CsRep {
            base,
            root: Clique::empty(),
            root_dims: BTreeMap::new(),
            clique_points: pts,
            epsilon: eps,
        }
    }

    #[test]
    fn single_vertex_certificate() {
        let c = single_vertex(1, rat(3, 4), rat(1, 2), rat(1, 8));
        assert!(verify_cs_rep(&c).is_valid(), "{:?}", verify_cs_rep(&c));
        let c3 = single_vertex(3, rat(3, 4), rat(1, 2), rat(1, 8));
        assert!(verify_cs_rep(&c3).is_valid());
        let eps = max_valid_epsilon(&c).unwrap();
        assert!(eps.is_positive() && eps <= rat(1, 8));
        let mut c2 = c.clone();
        c2.epsilon = eps;
        assert!(verify_cs_rep(&c2).is_valid());
    }

    #[test]
    fn duplicate_points_break_c1() {
        let c = single_vertex(1, rat(1, 2), rat(1, 2), rat(1, 8));
        let r = verify_cs_rep(&c);
        assert!(r
            .violations
            .items
            .iter()
            .any(|v| matches!(v, CsViolation::CliqueBoxesMeet { .. })));
        assert!(max_valid_epsilon(&c).is_err());
    }

    #[test]
    fn too_large_epsilon_is_caught() {
        let c = single_vertex(1, rat(3, 4), rat(1, 2), rat(1, 2));
        assert!(!verify_cs_rep(&c).is_valid());
    }

    #[test]
    fn foreign_box_meeting_clique_cube() {
        // p(∅) inside the vertex box: the empty clique's cube meets h(v).
        let c = single_vertex(1, rat(1, 4), rat(1, 2), rat(1, 16));
        let r = verify_cs_rep(&c);
        assert!(r
            .violations
            .items
            .iter()
            .any(|v| matches!(v, CsViolation::ForeignBoxMeets { vertex: 0, .. })));
    }
}
