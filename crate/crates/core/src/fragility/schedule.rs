use num_bigint::{BigInt, BigUint};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::frame::{deleted_levels, offset_multipliers, Frame};
use super::FragilityError;
use crate::geometry::Rational;
use crate::representation::EnvelopeRep;

/// Offsets are multiples of `l / 2^OFFSET_BITS` for the finest spacing `l`
/// of their dimension.
pub const OFFSET_BITS: u32 = 32;

/// Nested grid spacings for every level and a random offset per dimension.
///
/// Level `i` is the position `i` in `order` (zero based). The hyperplanes of
/// level `i` in dimension `j` are `offsets[j] + m * lengths[i][j]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GridSchedule {
    pub k: u64,
    pub s: u64,
    pub t: u64,
    pub dim: usize,
    pub order: Vec<usize>,
    pub lengths: Vec<Vec<Rational>>,
    pub offsets: Vec<Rational>,
    pub seed: u64,
}

impl GridSchedule {
    pub fn levels(&self) -> usize {
        self.lengths.len()
    }

    /// SHA-256 of the parameters, the order and the spacing table. Offsets
    /// are excluded, so all samples of one experiment share the digest.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!(
            "k={} s={} t={} d={}\n",
            self.k, self.s, self.t, self.dim
        ));
        for (v, row) in self.order.iter().zip(&self.lengths) {
            let cols: Vec<String> = row.iter().map(Rational::to_string).collect();
            h.update(format!("{v}:{}\n", cols.join(",")));
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// `k * s * d` as a rational.
pub(crate) fn ksd(e: &EnvelopeRep, k: u64) -> Rational {
    Rational::from_integer(BigInt::from(k) * BigInt::from(e.s) * BigInt::from(e.dim as u64))
}

/// The spacing table: level one gets `ksd * |outer[j]|`, and each later
/// level keeps the previous spacing if it is already below its own target
/// `ksd * |outer[j]|`, else divides it by the largest integer keeping it at
/// or above the target.
pub fn grid_lengths(e: &EnvelopeRep, k: u64) -> Result<Vec<Vec<Rational>>, FragilityError> {
    if k < 2 {
        return Err(FragilityError::SmallK(k));
    }
    let c = ksd(e, k);
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(e.order.len());
    for &v in &e.order {
        let b = &e.outer[v];
        let mut row = Vec::with_capacity(e.dim);
        for j in 0..e.dim {
            let len = b.side(j).len();
            if !len.is_positive() {
                return Err(FragilityError::DegenerateBox(v));
            }
            let target = &c * &len;
            let l = match rows.last() {
                None => target,
                Some(prev) => {
                    let p = &prev[j];
                    if *p < target {
                        p.clone()
                    } else {
                        p / &Rational::from_integer((p / &target).floor())
                    }
                }
            };
            row.push(l);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Per-dimension offsets `m * finest[j] / 2^32` with `m` uniform below
/// `(first[j] / finest[j]) * 2^32`, so every offset lies in `[0, first[j])`.
///
/// Every spacing is a multiple of the finest one, hence the offset modulo
/// any level's spacing is uniform on at least `2^32` equally spaced points.
pub fn sample_offsets(first: &[Rational], finest: &[Rational], seed: u64) -> Vec<Rational> {
    let unit = Rational::pow2(-(OFFSET_BITS as i64));
    let steps: Vec<BigUint> = first
        .iter()
        .zip(finest)
        .map(|(l, f)| (l / f).numer().to_biguint().expect("positive spacings") << OFFSET_BITS)
        .collect();
    offset_multipliers(&steps, seed)
        .into_iter()
        .zip(finest)
        .map(|(m, f)| f * &unit * Rational::from_integer(BigInt::from(m)))
        .collect()
}

/// Seed of sample `index` of an experiment with master seed `master`: the
/// first word of stream `index` of the master generator.
pub fn sample_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

pub fn build_schedule(e: &EnvelopeRep, k: u64, seed: u64) -> Result<GridSchedule, FragilityError> {
    let lengths = grid_lengths(e, k)?;
    Ok(schedule_from(e, k, lengths, seed))
}

pub(crate) fn schedule_from(
    e: &EnvelopeRep,
    k: u64,
    lengths: Vec<Vec<Rational>>,
    seed: u64,
) -> GridSchedule {
    let offsets = match (lengths.first(), lengths.last()) {
        (Some(first), Some(finest)) => sample_offsets(first, finest, seed),
        _ => vec![Rational::zero(); e.dim],
    };
    GridSchedule {
        k,
        s: e.s,
        t: e.t,
        dim: e.dim,
        order: e.order.clone(),
        lengths,
        offsets,
        seed,
    }
}

/// The vertices removed by one draw of the grid offsets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeletionSample {
    pub schedule: GridSchedule,
    /// Sorted vertex ids.
    pub deleted: Vec<usize>,
    pub seed: u64,
}

impl DeletionSample {
    pub fn removed_flags(&self, n: usize) -> Vec<bool> {
        let mut flags = vec![false; n];
        for &v in &self.deleted {
            flags[v] = true;
        }
        flags
    }
}

pub fn sample_deletion(e: &EnvelopeRep, schedule: &GridSchedule) -> DeletionSample {
    let frame = Frame::new(e, &schedule.lengths, &schedule.offsets);
    let x: Vec<BigInt> = schedule
        .offsets
        .iter()
        .enumerate()
        .map(|(j, x)| frame.scaled(j, x))
        .collect();
    let hit = deleted_levels(&frame, &schedule.order, &x, false);
    sample_from_flags(schedule.clone(), &hit)
}

pub(crate) fn sample_from_flags(schedule: GridSchedule, hit: &[bool]) -> DeletionSample {
    let mut deleted: Vec<usize> = schedule
        .order
        .iter()
        .zip(hit)
        .filter(|(_, &h)| h)
        .map(|(&v, _)| v)
        .collect();
    deleted.sort_unstable();
    let seed = schedule.seed;
    DeletionSample {
        schedule,
        deleted,
        seed,
    }
}

/// Recomputes the deletion set with the residue test and returns every
/// vertex on which the two computations disagree.
pub fn recheck_deletion(e: &EnvelopeRep, sample: &DeletionSample) -> Vec<usize> {
    let sch = &sample.schedule;
    let frame = Frame::new(e, &sch.lengths, &sch.offsets);
    let x: Vec<BigInt> = sch
        .offsets
        .iter()
        .enumerate()
        .map(|(j, x)| frame.scaled(j, x))
        .collect();
    disagreements(&frame, sample, &x)
}

pub(crate) fn disagreements(frame: &Frame, sample: &DeletionSample, x: &[BigInt]) -> Vec<usize> {
    let removed = sample.removed_flags(frame.outer.len());
    let hit = deleted_levels(frame, &sample.schedule.order, x, true);
    sample
        .schedule
        .order
        .iter()
        .zip(hit)
        .filter(|(&v, h)| *h != removed[v])
        .map(|(&v, _)| v)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rat, BoxNd};
    use crate::graph::Graph;
    use crate::representation::InnerSet;

    fn intervals(lens: &[Rational]) -> EnvelopeRep {
        let mut lo = Rational::zero();
        let mut boxes = Vec::new();
        for l in lens {
            let hi = &lo + l;
            boxes.push(BoxNd::cube(1, lo.clone(), hi.clone()).unwrap());
            lo = &hi + &rat(1, 1);
        }
        EnvelopeRep {
            graph: Graph::empty(lens.len()),
            dim: 1,
            order: (0..lens.len()).collect(),
            inner: boxes.iter().cloned().map(InnerSet::Box).collect(),
            outer: boxes,
            s: 1,
            t: 1,
        }
    }

    #[test]
    fn spacing_recurrence_by_hand() {
        let e = intervals(&[rat(1, 1), rat(1, 1), rat(1, 4)]);
        let l = grid_lengths(&e, 2).unwrap();
        assert_eq!(l, vec![vec![rat(2, 1)], vec![rat(2, 1)], vec![rat(1, 2)]]);
    }

    #[test]
    fn spacing_stays_when_below_target() {
        // Target 3 exceeds the current spacing 2, so it is kept.
        let e = intervals(&[rat(1, 1), rat(3, 2)]);
        assert_eq!(grid_lengths(&e, 2).unwrap()[1], vec![rat(2, 1)]);
        // Target 3/5 of spacing 2: the largest divisor keeping it above is 3.
        let e = intervals(&[rat(1, 1), rat(3, 10)]);
        assert_eq!(grid_lengths(&e, 2).unwrap()[1], vec![rat(2, 3)]);
    }

    #[test]
    fn small_k_is_rejected() {
        assert!(matches!(
            grid_lengths(&intervals(&[rat(1, 1)]), 1),
            Err(FragilityError::SmallK(1))
        ));
    }

    /// Direct oracle: scan the hyperplanes near the interval.
    fn oracle_hits(lo: &Rational, hi: &Rational, x: &Rational, l: &Rational) -> bool {
        let first: BigInt = ((lo - x) / l).floor() - 1;
        (0..4).any(|i| {
            let p = x + &(l * &Rational::from_integer(first.clone() + i));
            lo <= &p && &p <= hi
        })
    }

    #[test]
    fn deletion_by_hand() {
        // [0, 1/2] with spacing 2 and offset 1 is not hit.
        let e = intervals(&[rat(1, 2)]);
        let mut sch = build_schedule(&e, 2, 0).unwrap();
        assert_eq!(sch.lengths, vec![vec![rat(1, 1)]]);
        sch.lengths = vec![vec![rat(2, 1)]];
        sch.offsets = vec![rat(1, 1)];
        assert!(sample_deletion(&e, &sch).deleted.is_empty());
        assert!(!oracle_hits(&rat(0, 1), &rat(1, 2), &rat(1, 1), &rat(2, 1)));
        sch.offsets = vec![rat(1, 2)];
        assert_eq!(sample_deletion(&e, &sch).deleted, vec![0]);
    }

    #[test]
    fn full_period_is_always_hit() {
        let e = intervals(&[rat(1, 1)]);
        let mut sch = build_schedule(&e, 2, 0).unwrap();
        sch.lengths = vec![vec![rat(1, 1)]];
        for x in [rat(0, 1), rat(1, 3), rat(7, 5)] {
            sch.offsets = vec![x];
            assert_eq!(sample_deletion(&e, &sch).deleted, vec![0]);
        }
    }

    #[test]
    fn deletion_matches_oracle() {
        let e = intervals(&[rat(1, 1), rat(1, 3), rat(1, 5), rat(1, 9), rat(2, 7)]);
        for seed in 0..60 {
            let sch = build_schedule(&e, 2 + seed % 3, seed).unwrap();
            let sample = sample_deletion(&e, &sch);
            for (a, &v) in sch.order.iter().enumerate() {
                let side = e.outer[v].side(0);
                let hit = oracle_hits(side.lo(), side.hi(), &sch.offsets[0], &sch.lengths[a][0]);
                assert_eq!(hit, sample.deleted.contains(&v), "seed {seed} vertex {v}");
            }
        }
    }

    #[test]
    fn offsets_are_dyadic_and_in_range() {
        let first = vec![rat(2, 1), rat(3, 7)];
        let finest = vec![rat(1, 1 << 40), rat(3, 7)];
        let x = sample_offsets(&first, &finest, 9);
        assert_eq!(x, sample_offsets(&first, &finest, 9));
        for ((xj, l), f) in x.iter().zip(&first).zip(&finest) {
            assert!(!xj.is_negative() && xj < l);
            let m = xj / f * Rational::pow2(OFFSET_BITS as i64);
            assert!(m.denom() == &BigInt::from(1));
        }
    }

    #[test]
    fn deep_levels_stay_uniform() {
        // Spacing 2^-40 at the last level: the residue of the offset must
        // still spread over the whole period, not sit on a few points.
        let first = vec![rat(1, 1)];
        let finest = vec![rat(1, 1 << 40)];
        let mut below_half = 0;
        for seed in 0..400 {
            let x = &sample_offsets(&first, &finest, seed)[0];
            let r = x.rem_euclid(&finest[0]) / &finest[0];
            if r < rat(1, 2) {
                below_half += 1;
            }
        }
        assert!((150..=250).contains(&below_half), "{below_half}");
    }

    #[test]
    fn sample_seeds_differ_by_stream() {
        assert_ne!(sample_seed(1, 0), sample_seed(1, 1));
        assert_eq!(sample_seed(1, 5), sample_seed(1, 5));
    }

    #[test]
    fn deletion_agrees_with_residue_pass() {
        let e = intervals(&[rat(1, 1), rat(1, 3), rat(1, 5), rat(1, 9)]);
        for seed in 0..50 {
            let sch = build_schedule(&e, 3, seed).unwrap();
            let sample = sample_deletion(&e, &sch);
            assert!(recheck_deletion(&e, &sample).is_empty());
        }
    }
}
