use std::collections::BTreeMap;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use super::cells::{build_decomposition, cell_tree_in_frame};
use super::frame::{deleted_levels, offset_multipliers, Frame};
use super::schedule::{
    disagreements, grid_lengths, sample_from_flags, sample_seed, schedule_from, GridSchedule,
    OFFSET_BITS,
};
use super::{DeletionSample, FragilityError};
use crate::geometry::Rational;
use crate::graph::{verify_tree_decomposition_excluding, TreeDecomp};
use crate::representation::{verify_envelope_rep, EnvelopeRep};

/// `f(k) = (2ksd + 2)^d * s * t`.
pub fn width_bound(k: u64, s: u64, t: u64, d: usize) -> BigInt {
    let base =
        BigInt::from(2u64) * BigInt::from(k) * BigInt::from(s) * BigInt::from(d as u64) + 2u32;
    num_traits::pow(base, d) * BigInt::from(s) * BigInt::from(t)
}

/// `1/k + 4 sqrt((1/k)(1 - 1/k)/N) + 2^-30`.
pub fn frequency_tolerance(k: u64, samples: usize) -> f64 {
    let p = 1.0 / k as f64;
    p + 4.0 * (p * (1.0 - p) / samples as f64).sqrt() + 2f64.powi(-30)
}

pub(crate) fn require_valid(e: &EnvelopeRep) -> Result<(), FragilityError> {
    let report = verify_envelope_rep(e);
    if report.is_valid() {
        Ok(())
    } else {
        let shown: Vec<String> = report
            .violations
            .items
            .iter()
            .take(3)
            .map(|v| format!("{v:?}"))
            .collect();
        Err(FragilityError::InvalidEnvelope(shown.join("; ")))
    }
}

/// One draw: the deletion set, the decomposition of what survives, and
/// every check that failed on it.
#[derive(Clone, Debug, Serialize)]
pub struct SampleOutcome {
    pub sample: DeletionSample,
    pub decomposition: TreeDecomp,
    pub width: usize,
    pub max_bag: usize,
    pub violations: Vec<String>,
}

/// One deletion draw with all grid arithmetic in `frame`; also returns the
/// scaled offsets.
pub(crate) fn draw_in_frame(
    e: &EnvelopeRep,
    k: u64,
    lengths: &[Vec<Rational>],
    frame: &Frame,
    seed: u64,
) -> (DeletionSample, Vec<BigInt>) {
    let x: Vec<BigInt> = offset_multipliers(&frame.steps, seed)
        .into_iter()
        .zip(&frame.unit)
        .map(|(m, u)| BigInt::from(m) * u)
        .collect();
    let offsets = x
        .iter()
        .enumerate()
        .map(|(j, x)| frame.unscaled(j, x))
        .collect();
    let schedule = GridSchedule {
        k,
        s: e.s,
        t: e.t,
        dim: e.dim,
        order: e.order.clone(),
        lengths: lengths.to_vec(),
        offsets,
        seed,
    };
    let sample = sample_from_flags(schedule, &deleted_levels(frame, &e.order, &x, false));
    (sample, x)
}

pub(crate) fn run_sample(
    e: &EnvelopeRep,
    k: u64,
    lengths: &[Vec<Rational>],
    frame: &Frame,
    seed: u64,
    bag_cap: &BigInt,
) -> Result<SampleOutcome, FragilityError> {
    let (sample, x) = draw_in_frame(e, k, lengths, frame, seed);
    let mut violations = Vec::new();
    let disagree = disagreements(frame, &sample, &x);
    if !disagree.is_empty() {
        violations.push(format!("deletion recheck disagrees on {disagree:?}"));
    }
    let ct = cell_tree_in_frame(e, frame, &sample, &x)?;
    let td = build_decomposition(&ct);
    let report = verify_tree_decomposition_excluding(&e.graph, &td, &sample.removed_flags(e.n()));
    if !report.is_valid() {
        violations.push(format!(
            "decomposition: {:?}",
            &report.violations[..report.violations.len().min(3)]
        ));
    }
    let max_bag = td.max_bag_size();
    if BigInt::from(max_bag) > *bag_cap {
        violations.push(format!("bag of size {max_bag} exceeds {bag_cap}"));
    }
    Ok(SampleOutcome {
        width: td.width(),
        max_bag,
        sample,
        decomposition: td,
        violations,
    })
}

/// A single verified draw with the given seed.
pub fn fragility_sample(
    e: &EnvelopeRep,
    k: u64,
    seed: u64,
) -> Result<SampleOutcome, FragilityError> {
    require_valid(e)?;
    let lengths = grid_lengths(e, k)?;
    let cap = width_bound(k, e.s, e.t, e.dim) + 1u32;
    let frame = Frame::new(e, &lengths, &[]);
    run_sample(e, k, &lengths, &frame, seed, &cap)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleViolation {
    pub sample: usize,
    pub seed: u64,
    pub detail: String,
}

/// Summary of `samples` independent draws. Everything but `wall_clock_ms`
/// is a function of the envelope, `k` and `seed`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FragilityReport {
    pub k: u64,
    pub samples: usize,
    pub seed: u64,
    pub n: usize,
    pub dim: usize,
    pub s: u64,
    pub t: u64,
    /// Decimal value of `(2ksd + 2)^d * s * t`.
    pub width_bound: String,
    pub schedule_digest: String,
    pub offset_resolution_bits: u32,
    pub deletion_counts: Vec<u64>,
    pub deletion_frequencies: Vec<f64>,
    pub frequency_tolerance: f64,
    pub vertices_over_tolerance: Vec<usize>,
    pub max_deleted: usize,
    pub mean_deleted: f64,
    pub max_width: usize,
    pub max_bag: usize,
    /// Decomposition width to number of samples.
    pub width_histogram: BTreeMap<usize, u64>,
    pub violations: Vec<SampleViolation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<u64>,
}

impl FragilityReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Draws `samples` deletion sets in parallel, each from its own seed derived
/// from `seed`, and checks every decomposition and bag size.
pub fn fragility_experiment(
    e: &EnvelopeRep,
    k: u64,
    samples: usize,
    seed: u64,
) -> Result<FragilityReport, FragilityError> {
    if samples == 0 {
        return Err(FragilityError::NoSamples);
    }
    require_valid(e)?;
    let lengths = grid_lengths(e, k)?;
    let bound = width_bound(k, e.s, e.t, e.dim);
    let cap = &bound + 1u32;
    let digest = schedule_from(e, k, lengths.clone(), seed).digest();
    let frame = Frame::new(e, &lengths, &[]);

    let outcomes: Vec<(u64, Result<SampleOutcome, FragilityError>)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let s = sample_seed(seed, i as u64);
            (s, run_sample(e, k, &lengths, &frame, s, &cap))
        })
        .collect();

    let n = e.n();
    let mut counts = vec![0u64; n];
    let mut histogram = BTreeMap::new();
    let mut violations = Vec::new();
    let (mut max_width, mut max_bag, mut max_deleted, mut total_deleted) = (0, 0, 0, 0usize);
    for (i, (s, outcome)) in outcomes.into_iter().enumerate() {
        let o = outcome?;
        for &v in &o.sample.deleted {
            counts[v] += 1;
        }
        max_deleted = max_deleted.max(o.sample.deleted.len());
        total_deleted += o.sample.deleted.len();
        max_width = max_width.max(o.width);
        max_bag = max_bag.max(o.max_bag);
        *histogram.entry(o.width).or_insert(0) += 1;
        violations.extend(o.violations.into_iter().map(|detail| SampleViolation {
            sample: i,
            seed: s,
            detail,
        }));
    }
    let frequencies: Vec<f64> = counts.iter().map(|&c| c as f64 / samples as f64).collect();
    let tolerance = frequency_tolerance(k, samples);
    Ok(FragilityReport {
        k,
        samples,
        seed,
        n,
        dim: e.dim,
        s: e.s,
        t: e.t,
        width_bound: bound.to_string(),
        schedule_digest: digest,
        offset_resolution_bits: OFFSET_BITS,
        vertices_over_tolerance: (0..n).filter(|&v| frequencies[v] > tolerance).collect(),
        deletion_counts: counts,
        deletion_frequencies: frequencies,
        frequency_tolerance: tolerance,
        max_deleted,
        mean_deleted: total_deleted as f64 / samples as f64,
        max_width,
        max_bag,
        width_histogram: histogram,
        violations,
        wall_clock_ms: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rat, BoxNd, Interval};
    use crate::graph::Graph;
    use crate::representation::{envelope_from_boxes, TouchingRep};

    fn corner(d: usize) -> EnvelopeRep {
        let boxes = (0..1usize << d)
            .map(|m| {
                BoxNd::new(
                    (0..d)
                        .map(|j| {
                            if m >> j & 1 == 1 {
                                Interval::of(rat(0, 1), rat(1, 1))
                            } else {
                                Interval::of(rat(-1, 1), rat(0, 1))
                            }
                        })
                        .collect(),
                )
                .unwrap()
            })
            .collect();
        envelope_from_boxes(&TouchingRep::new(Graph::complete(1 << d), d, boxes).unwrap()).unwrap()
    }

    #[test]
    fn width_bound_by_hand() {
        // (2*2*1*3 + 2)^3 * 1 * 8 = 14^3 * 8.
        assert_eq!(width_bound(2, 1, 8, 3), BigInt::from(14 * 14 * 14 * 8));
        assert_eq!(width_bound(4, 1, 1, 1), BigInt::from(10));
    }

    #[test]
    fn corner_cube_bags_respect_bound() {
        let e = corner(3);
        let r = fragility_experiment(&e, 2, 100, 1).unwrap();
        assert!(r.is_clean(), "{:?}", r.violations);
        assert!(r.max_bag <= 8);
    }

    #[test]
    fn same_seed_same_report() {
        let e = corner(2);
        let a = fragility_experiment(&e, 3, 20, 42).unwrap();
        let b = fragility_experiment(&e, 3, 20, 42).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let c = fragility_experiment(&e, 3, 20, 43).unwrap();
        assert_eq!(a.schedule_digest, c.schedule_digest);
    }

    #[test]
    fn shared_frame_matches_standalone_sampling() {
        let e = corner(2);
        for seed in 0..10 {
            let o = fragility_sample(&e, 3, seed).unwrap();
            let sch = super::super::build_schedule(&e, 3, seed).unwrap();
            assert_eq!(o.sample.schedule, sch);
            assert_eq!(o.sample, super::super::sample_deletion(&e, &sch));
        }
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(matches!(
            fragility_experiment(&corner(1), 2, 0, 0),
            Err(FragilityError::NoSamples)
        ));
    }
}
