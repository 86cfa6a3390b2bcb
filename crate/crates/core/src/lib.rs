//! Gaze-directed lane-change prediction correction for a highway ego planner.

// Negated comparisons reject NaN parameters on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gaze;
pub mod harness;
pub mod intervention;
pub mod planner;
pub mod prediction;
pub mod sim;
pub mod world;
