//! File formats, timing, the command-line frontend and the experiment
//! harness around `taskshield-core`.
//!
//! - [`pddl`] parses and grounds a STRIPS subset of PDDL and writes tasks
//!   back as grounded PDDL.
//! - [`json`] is the lossless JSON task format.
//! - [`report`] renders shielding reports and edit lists.
//! - [`experiment`] runs instance/variant grids into CSV.

pub mod cli;
pub mod clock;
pub mod experiment;
pub mod json;
pub mod pddl;
pub mod report;

pub use clock::Deadline;
pub use json::{emit_task_json, parse_task_json, TaskJsonError};
pub use taskshield_core as core;
