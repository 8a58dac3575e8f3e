//! Exponential sums over the dilated boxes, major and minor arcs of the
//! unit cube, and exact frequency-space oracles.

pub mod arcs;
pub mod expsum;
pub mod ortho;
pub mod scan;

pub use arcs::{arc_measure, classify_arc, verify_major, Approximant, ArcLabel, ArcParams, ArcPoint};
pub use expsum::{eval_exp_sum, ExpSumValue, Frequencies, SumIndex, PHASE_ERROR_PER_TERM};
pub use ortho::{
    mean_value_check, orthogonality_check, orthogonality_count, MeanValueReport, MeanValueRow, OrthogonalityReport,
};
pub use scan::{minor_arc_scan, sample_points, ArcSample, MinorArcScan, ScanMaximum, ScanOptions};
