//! Integer coordinates for the grid computations.
//!
//! Every coordinate, spacing and offset in dimension `j` is a multiple of
//! `1 / scale[j]`, so multiplying by `scale[j]` turns all grid tests into
//! integer floor divisions.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::schedule::OFFSET_BITS;
use crate::geometry::Rational;
use crate::representation::{EnvelopeRep, InnerSet};

pub(crate) struct Frame {
    pub scale: Vec<BigInt>,
    /// `outer[v][j] = (lo, hi)`.
    pub outer: Vec<Vec<(BigInt, BigInt)>>,
    /// Scaled inner boxes; `None` for declared balls.
    pub inner: Vec<Option<Vec<(BigInt, BigInt)>>>,
    /// `lengths[level][j]`.
    pub lengths: Vec<Vec<BigInt>>,
    /// Offset step `finest[j] / 2^32`, scaled.
    pub unit: Vec<BigInt>,
    /// Number of offset steps in the level-one spacing.
    pub steps: Vec<BigUint>,
}

fn to_scaled(x: &Rational, scale: &BigInt) -> BigInt {
    let (q, r) = (x.numer() * scale).div_rem(x.denom());
    debug_assert!(r.is_zero(), "scale must clear every denominator");
    q
}

impl Frame {
    /// `extra[j]` lists further values of dimension `j` (such as offsets)
    /// that must be integers in the frame.
    pub fn new(e: &EnvelopeRep, lengths: &[Vec<Rational>], extra: &[Rational]) -> Frame {
        let d = e.dim;
        let unit_r: Vec<Rational> = match lengths.last() {
            Some(finest) => finest
                .iter()
                .map(|l| l * &Rational::pow2(-(OFFSET_BITS as i64)))
                .collect(),
            None => vec![Rational::one(); d],
        };
        let mut scale = vec![BigInt::one(); d];
        let mut absorb = |j: usize, x: &Rational| {
            if !x.denom().is_one() {
                scale[j] = scale[j].lcm(x.denom());
            }
        };
        for j in 0..d {
            for b in &e.outer {
                absorb(j, b.side(j).lo());
                absorb(j, b.side(j).hi());
            }
            for i in &e.inner {
                if let InnerSet::Box(b) = i {
                    absorb(j, b.side(j).lo());
                    absorb(j, b.side(j).hi());
                }
            }
            for row in lengths {
                absorb(j, &row[j]);
            }
            absorb(j, &unit_r[j]);
            if let Some(x) = extra.get(j) {
                absorb(j, x);
            }
        }
        let pair = |b: &crate::geometry::BoxNd| -> Vec<(BigInt, BigInt)> {
            (0..d)
                .map(|j| {
                    (
                        to_scaled(b.side(j).lo(), &scale[j]),
                        to_scaled(b.side(j).hi(), &scale[j]),
                    )
                })
                .collect()
        };
        let outer = e.outer.iter().map(pair).collect();
        let inner = e.inner.iter().map(|i| i.as_box().map(pair)).collect();
        let scaled_lengths: Vec<Vec<BigInt>> = lengths
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(j, l)| to_scaled(l, &scale[j]))
                    .collect()
            })
            .collect();
        let unit: Vec<BigInt> = (0..d).map(|j| to_scaled(&unit_r[j], &scale[j])).collect();
        let steps = match scaled_lengths.first() {
            Some(first) => first
                .iter()
                .zip(&unit)
                .map(|(l, u)| (l / u).to_biguint().expect("positive spacing"))
                .collect(),
            None => vec![BigUint::one(); d],
        };
        Frame {
            scale,
            outer,
            inner,
            lengths: scaled_lengths,
            unit,
            steps,
        }
    }

    pub fn scaled(&self, j: usize, x: &Rational) -> BigInt {
        to_scaled(x, &self.scale[j])
    }

    pub fn unscaled(&self, j: usize, x: &BigInt) -> Rational {
        Rational::new(x.clone(), self.scale[j].clone())
    }
}

/// Offset step counts drawn for `seed`, each uniform below `steps[j]`.
pub(crate) fn offset_multipliers(steps: &[BigUint], seed: u64) -> Vec<BigUint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    steps.iter().map(|s| rng.gen_biguint_below(s)).collect()
}

/// Whether some `x + m*l` lies in `[lo, hi]`.
pub(crate) fn meets_grid(lo: &BigInt, hi: &BigInt, x: &BigInt, l: &BigInt) -> bool {
    (lo - x).div_ceil(l) <= (hi - x).div_floor(l)
}

/// Same predicate through the distance from `lo` to the next hyperplane.
pub(crate) fn meets_grid_by_residue(lo: &BigInt, hi: &BigInt, x: &BigInt, l: &BigInt) -> bool {
    let r = (lo - x).mod_floor(l);
    r.is_zero() || hi - lo >= l - r
}

/// Positions in `order` whose outer box meets its own level's grid.
pub(crate) fn deleted_levels(f: &Frame, order: &[usize], x: &[BigInt], residue: bool) -> Vec<bool> {
    let test = if residue {
        meets_grid_by_residue
    } else {
        meets_grid
    };
    order
        .iter()
        .enumerate()
        .map(|(a, &v)| {
            f.outer[v]
                .iter()
                .enumerate()
                .any(|(j, (lo, hi))| test(lo, hi, &x[j], &f.lengths[a][j]))
        })
        .collect()
}
