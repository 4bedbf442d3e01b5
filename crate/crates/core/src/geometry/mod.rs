//! Exact axis-aligned geometry: closed intervals of positive length and boxes
//! built from them, with the predicates needed for touching representations.
//!
//! Every predicate is decided in exact rational arithmetic. Boxes serialize as
//! arrays of `["lo", "hi"]` pairs.

mod ranked;
mod rational;

pub use ranked::{CoordTable, CoordTableBuilder, RankedBoxes};
pub use rational::{rat, ParseRationalError, Rational};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("degenerate interval [{lo}, {hi}]: intervals must have positive length")]
    Degenerate { lo: String, hi: String },
    #[error("boxes must have at least one dimension")]
    ZeroDimensional,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("scale factors must be positive")]
    NonPositiveScale,
    #[error("boxes do not touch")]
    NotTouching,
}

/// A closed interval `[lo, hi]` with `lo < hi`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IntervalRelation {
    Disjoint,
    TouchPoint(Rational),
    Overlap,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, GeometryError> {
        if lo >= hi {
            return Err(GeometryError::Degenerate {
                lo: lo.to_string(),
                hi: hi.to_string(),
            });
        }
        Ok(Interval { lo, hi })
    }

    /// Convenience constructor for small literal endpoints `[a/q, b/q]`.
    pub fn of(lo: Rational, hi: Rational) -> Self {
        Interval::new(lo, hi).expect("literal interval must be non-degenerate")
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn len(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains_point(&self, x: &Rational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn relation(&self, other: &Interval) -> IntervalRelation {
        interval_relation(self, other)
    }

    pub fn affine(&self, scale: &Rational, shift: &Rational) -> Result<Interval, GeometryError> {
        if !scale.is_positive() {
            return Err(GeometryError::NonPositiveScale);
        }
        Ok(Interval {
            lo: scale * &self.lo + shift,
            hi: scale * &self.hi + shift,
        })
    }

    pub fn translate(&self, shift: &Rational) -> Interval {
        Interval {
            lo: &self.lo + shift,
            hi: &self.hi + shift,
        }
    }
}

/// Classifies the intersection of two closed intervals.
pub fn interval_relation(a: &Interval, b: &Interval) -> IntervalRelation {
    if a.hi < b.lo || b.hi < a.lo {
        IntervalRelation::Disjoint
    } else if a.hi == b.lo {
        IntervalRelation::TouchPoint(a.hi.clone())
    } else if b.hi == a.lo {
        IntervalRelation::TouchPoint(b.hi.clone())
    } else {
        IntervalRelation::Overlap
    }
}

/// An axis-aligned box: the product of one interval per dimension.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BoxNd {
    sides: Vec<Interval>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxRelation {
    Disjoint,
    Touch,
    InteriorOverlap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparability {
    ALeB,
    BLeA,
    Both,
    Incomparable,
}

impl Comparability {
    pub fn is_comparable(self) -> bool {
        self != Comparability::Incomparable
    }
}

impl BoxNd {
    pub fn new(sides: Vec<Interval>) -> Result<Self, GeometryError> {
        if sides.is_empty() {
            return Err(GeometryError::ZeroDimensional);
        }
        Ok(BoxNd { sides })
    }

    /// Box from `(lo, hi)` pairs; fails on degenerate sides.
    pub fn from_bounds<I>(bounds: I) -> Result<Self, GeometryError>
    where
        I: IntoIterator<Item = (Rational, Rational)>,
    {
        let sides = bounds
            .into_iter()
            .map(|(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>, _>>()?;
        BoxNd::new(sides)
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: Rational, hi: Rational) -> Result<Self, GeometryError> {
        let side = Interval::new(lo, hi)?;
        BoxNd::new(vec![side; dim])
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[Interval] {
        &self.sides
    }

    pub fn side(&self, j: usize) -> &Interval {
        &self.sides[j]
    }

    pub fn into_sides(self) -> Vec<Interval> {
        self.sides
    }

    pub fn side_lengths(&self) -> Vec<Rational> {
        self.sides.iter().map(Interval::len).collect()
    }

    pub fn volume(&self) -> Rational {
        self.sides.iter().map(Interval::len).product()
    }

    pub fn lo_corner(&self) -> Vec<Rational> {
        self.sides.iter().map(|s| s.lo.clone()).collect()
    }

    pub fn contains_point(&self, p: &[Rational]) -> bool {
        p.len() == self.dim() && self.sides.iter().zip(p).all(|(s, x)| s.contains_point(x))
    }

    pub fn contains(&self, other: &BoxNd) -> bool {
        self.dim() == other.dim()
            && self
                .sides
                .iter()
                .zip(&other.sides)
                .all(|(a, b)| a.contains(b))
    }

    /// Closed-set intersection test.
    pub fn intersects(&self, other: &BoxNd) -> bool {
        self.dim() == other.dim()
            && self
                .sides
                .iter()
                .zip(&other.sides)
                .all(|(a, b)| a.lo <= b.hi && b.lo <= a.hi)
    }

    pub fn translate(&self, shift: &[Rational]) -> Result<BoxNd, GeometryError> {
        self.check_len(shift.len())?;
        Ok(BoxNd {
            sides: self
                .sides
                .iter()
                .zip(shift)
                .map(|(s, t)| s.translate(t))
                .collect(),
        })
    }

    /// Per-axis map `x -> scale[j] * x + shift[j]`.
    pub fn affine(&self, scale: &[Rational], shift: &[Rational]) -> Result<BoxNd, GeometryError> {
        self.check_len(scale.len())?;
        self.check_len(shift.len())?;
        let sides = self
            .sides
            .iter()
            .zip(scale.iter().zip(shift))
            .map(|(s, (a, b))| s.affine(a, b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BoxNd { sides })
    }

    /// `self x other`: `self` supplies the leading coordinates.
    pub fn cartesian_product(&self, other: &BoxNd) -> BoxNd {
        let mut sides = self.sides.clone();
        sides.extend(other.sides.iter().cloned());
        BoxNd { sides }
    }

    /// A translate of `self` contained in `outer`, when every side fits.
    pub fn translate_into(&self, outer: &BoxNd) -> Option<BoxNd> {
        if self.dim() != outer.dim() {
            return None;
        }
        let shift: Vec<Rational> = self
            .sides
            .iter()
            .zip(&outer.sides)
            .map(|(a, b)| &b.lo - &a.lo)
            .collect();
        let moved = self.translate(&shift).ok()?;
        outer.contains(&moved).then_some(moved)
    }

    fn check_len(&self, n: usize) -> Result<(), GeometryError> {
        if n != self.dim() {
            return Err(GeometryError::DimensionMismatch(self.dim(), n));
        }
        Ok(())
    }
}

fn check_dims(a: &BoxNd, b: &BoxNd) -> Result<(), GeometryError> {
    if a.dim() != b.dim() {
        return Err(GeometryError::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(())
}

/// Touch iff the boxes meet and their interiors are disjoint.
pub fn box_relation(a: &BoxNd, b: &BoxNd) -> Result<BoxRelation, GeometryError> {
    check_dims(a, b)?;
    let mut touch = false;
    for (x, y) in a.sides.iter().zip(&b.sides) {
        match interval_relation(x, y) {
            IntervalRelation::Disjoint => return Ok(BoxRelation::Disjoint),
            IntervalRelation::TouchPoint(_) => touch = true,
            IntervalRelation::Overlap => {}
        }
    }
    Ok(if touch {
        BoxRelation::Touch
    } else {
        BoxRelation::InteriorOverlap
    })
}

/// Decides `a ⊑ b` / `b ⊑ a` through side lengths; for boxes this is the
/// same as containment of a translate.
pub fn box_comparable(a: &BoxNd, b: &BoxNd) -> Result<Comparability, GeometryError> {
    check_dims(a, b)?;
    let mut a_le = true;
    let mut b_le = true;
    for (x, y) in a.sides.iter().zip(&b.sides) {
        let (lx, ly) = (x.len(), y.len());
        if lx > ly {
            a_le = false;
        }
        if ly > lx {
            b_le = false;
        }
    }
    Ok(match (a_le, b_le) {
        (true, true) => Comparability::Both,
        (true, false) => Comparability::ALeB,
        (false, true) => Comparability::BLeA,
        (false, false) => Comparability::Incomparable,
    })
}

/// `a ⊑_s b` for boxes: every anchor `x ∈ b` admits a translate of `a`
/// through `x` covering at least `vol(a)/s` of `b`. For boxes the best
/// overlap does not depend on the anchor and factors per axis as
/// `min(|a_j|, |b_j|)`.
pub fn box_sqsubseteq_s(a: &BoxNd, b: &BoxNd, s: u64) -> Result<bool, GeometryError> {
    check_dims(a, b)?;
    assert!(s >= 1, "s must be a positive integer");
    Ok(overlap_fraction(a, b) * Rational::from(s as i64) >= Rational::one())
}

/// `∏_j min(|a_j|, |b_j|) / |a_j|`.
pub fn overlap_fraction(a: &BoxNd, b: &BoxNd) -> Rational {
    a.sides
        .iter()
        .zip(&b.sides)
        .map(|(x, y)| {
            let (lx, ly) = (x.len(), y.len());
            if ly < lx {
                ly / lx
            } else {
                Rational::one()
            }
        })
        .product()
}

/// Touching boxes meeting in a `(d-1)`-dimensional piece.
pub fn box_fully_touching(a: &BoxNd, b: &BoxNd) -> Result<bool, GeometryError> {
    if box_relation(a, b)? != BoxRelation::Touch {
        return Err(GeometryError::NotTouching);
    }
    let touch_dims = a
        .sides
        .iter()
        .zip(&b.sides)
        .filter(|(x, y)| matches!(interval_relation(x, y), IntervalRelation::TouchPoint(_)))
        .count();
    Ok(touch_dims == 1)
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [&self.lo, &self.hi].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [lo, hi] = <[Rational; 2]>::deserialize(deserializer)?;
        Interval::new(lo, hi).map_err(serde::de::Error::custom)
    }
}

impl Serialize for BoxNd {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.sides.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BoxNd {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let sides = Vec::<Interval>::deserialize(deserializer)?;
        BoxNd::new(sides).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: i64, b: i64) -> Interval {
        Interval::of(rat(a, 1), rat(b, 1))
    }

    fn bx(bounds: &[(i64, i64)]) -> BoxNd {
        BoxNd::new(bounds.iter().map(|&(a, b)| iv(a, b)).collect()).unwrap()
    }

    #[test]
    fn interval_relations() {
        assert_eq!(
            interval_relation(&iv(0, 1), &iv(1, 2)),
            IntervalRelation::TouchPoint(rat(1, 1))
        );
        assert_eq!(
            interval_relation(&iv(0, 1), &iv(2, 3)),
            IntervalRelation::Disjoint
        );
        assert_eq!(
            interval_relation(&iv(0, 2), &iv(1, 3)),
            IntervalRelation::Overlap
        );
        assert_eq!(
            interval_relation(&iv(1, 2), &iv(0, 1)),
            IntervalRelation::TouchPoint(rat(1, 1))
        );
    }

    #[test]
    fn degenerate_rejected() {
        assert!(Interval::new(rat(1, 1), rat(1, 1)).is_err());
        assert!(Interval::new(rat(2, 1), rat(1, 1)).is_err());
        assert!(BoxNd::new(vec![]).is_err());
    }

    #[test]
    fn box_relations() {
        let unit = bx(&[(0, 1), (0, 1)]);
        assert_eq!(
            box_relation(&unit, &bx(&[(1, 2), (1, 2)])).unwrap(),
            BoxRelation::Touch
        );
        let shifted = BoxNd::new(vec![Interval::of(rat(1, 2), rat(3, 2)), iv(0, 1)]).unwrap();
        assert_eq!(
            box_relation(&unit, &shifted).unwrap(),
            BoxRelation::InteriorOverlap
        );
        assert_eq!(
            box_relation(&unit, &bx(&[(2, 3), (0, 1)])).unwrap(),
            BoxRelation::Disjoint
        );
        assert!(box_relation(&unit, &bx(&[(0, 1)])).is_err());
    }

    #[test]
    fn comparability() {
        assert_eq!(
            box_comparable(&bx(&[(0, 1), (0, 2)]), &bx(&[(0, 1), (0, 3)])).unwrap(),
            Comparability::ALeB
        );
        assert_eq!(
            box_comparable(&bx(&[(0, 2), (0, 1)]), &bx(&[(0, 1), (0, 3)])).unwrap(),
            Comparability::Incomparable
        );
        assert_eq!(
            box_comparable(&bx(&[(0, 1), (0, 1)]), &bx(&[(5, 6), (-3, -2)])).unwrap(),
            Comparability::Both
        );
    }

    #[test]
    fn sqsubseteq_s_examples() {
        assert!(box_sqsubseteq_s(&bx(&[(0, 1), (0, 1)]), &bx(&[(0, 2), (0, 2)]), 1).unwrap());
        assert!(box_sqsubseteq_s(&bx(&[(0, 2), (0, 1)]), &bx(&[(0, 1), (0, 1)]), 2).unwrap());
        assert!(!box_sqsubseteq_s(&bx(&[(0, 2), (0, 2)]), &bx(&[(0, 1), (0, 1)]), 2).unwrap());
        assert!(box_sqsubseteq_s(&bx(&[(0, 2), (0, 2)]), &bx(&[(0, 1), (0, 1)]), 4).unwrap());
    }

    #[test]
    fn fully_touching() {
        let unit = bx(&[(0, 1), (0, 1)]);
        assert!(box_fully_touching(&unit, &bx(&[(1, 2), (0, 1)])).unwrap());
        assert!(!box_fully_touching(&unit, &bx(&[(1, 2), (1, 2)])).unwrap());
        let cube = bx(&[(0, 1), (0, 1), (0, 1)]);
        assert!(!box_fully_touching(&cube, &bx(&[(1, 2), (0, 1), (1, 2)])).unwrap());
        assert_eq!(
            box_fully_touching(&unit, &bx(&[(3, 4), (0, 1)])),
            Err(GeometryError::NotTouching)
        );
    }

    #[test]
    fn affine_volume_product() {
        let unit = bx(&[(0, 1), (0, 1)]);
        let two = [rat(2, 1), rat(2, 1)];
        let one = [rat(1, 1), rat(1, 1)];
        assert_eq!(unit.affine(&two, &one).unwrap(), bx(&[(1, 3), (1, 3)]));
        assert!(unit.affine(&[rat(0, 1), rat(1, 1)], &one).is_err());
        assert_eq!(bx(&[(0, 1), (0, 3)]).volume(), rat(3, 1));
        assert_eq!(
            bx(&[(0, 1)]).cartesian_product(&bx(&[(2, 3)])),
            bx(&[(0, 1), (2, 3)])
        );
    }

    #[test]
    fn serde_shape() {
        let b = BoxNd::new(vec![Interval::of(rat(-1, 2), rat(3, 1))]).unwrap();
        let s = serde_json::to_string(&b).unwrap();
        assert_eq!(s, r#"[["-1/2","3"]]"#);
        assert_eq!(serde_json::from_str::<BoxNd>(&s).unwrap(), b);
        assert!(serde_json::from_str::<BoxNd>(r#"[["1","1"]]"#).is_err());
    }
}
