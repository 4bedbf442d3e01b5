//! Random nested grids over an envelope representation.
//!
//! Each draw deletes the vertices whose outer box meets the grid of its own
//! level. The surviving graph gets a tree decomposition whose nodes are grid
//! cells, with bag sizes at most `(2ksd + 2)^d * s * t + 1`, while every
//! vertex is deleted with probability at most `1/k`.

mod cells;
mod experiment;
mod frame;
mod schedule;
mod separator;

pub use cells::{build_cell_tree, build_decomposition, Cell, CellTree};
pub use experiment::{
    fragility_experiment, fragility_sample, frequency_tolerance, width_bound, FragilityReport,
    SampleOutcome, SampleViolation,
};
pub use schedule::{
    build_schedule, grid_lengths, recheck_deletion, sample_deletion, sample_offsets, sample_seed,
    DeletionSample, GridSchedule, OFFSET_BITS,
};
pub use separator::{balanced_separator, centroid_bag, Separator, SEPARATOR_DRAW_CAP};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FragilityError {
    #[error("k must be at least 2, got {0}")]
    SmallK(u64),
    #[error("envelope does not verify: {0}")]
    InvalidEnvelope(String),
    #[error("outer box of vertex {0} has a side of length zero")]
    DegenerateBox(usize),
    #[error("vertex {0} survived but its outer box leaves its own cell")]
    Inconsistent(usize),
    #[error("at least one sample is required")]
    NoSamples,
}
