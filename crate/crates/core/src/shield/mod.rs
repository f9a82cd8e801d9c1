//! Minimal edits that make a task unsolvable.
//!
//! Every simple plan is closed with an artificial action requiring the goal,
//! and the 0-1 program built by [`build_shield_model`] asks for the fewest
//! edits under which each of those plans hits an inapplicable step.
//!
//! Edits only shrink actions, so every plan of the edited task solves the
//! original task too. It need not be simple there, though: an added delete
//! effect can turn a sequence that revisits a state into one that does not.
//! Blocking every simple plan therefore does not always make the task
//! unsolvable, which is why the pipeline verifies the result. With
//! [`ShieldConfig::refine`] set, each surviving plan is added to the plan
//! set and the program is solved again until verification succeeds; the
//! final edit set is then a smallest one making the task unsolvable.

mod model;
mod mods;
mod pipeline;

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::enumerate::EnumerateError;
use crate::ilp::SolveError;
use crate::strips::StripsError;

pub use model::{
    append_goal_action, build_shield_model, edit_var, extract_modifications, AugmentedTask,
    VarIndexMap,
};
pub use mods::{
    apply_modifications, edit_in_range, possible_edits, Edit, EditKind, ModificationError,
    ModificationSet,
};
pub use pipeline::{shield, shield_with, ShieldConfig, ShieldReport, Timings};

/// Pipeline stage at which a failure happened.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Validate,
    Enumerate,
    Model,
    Solve,
    Apply,
    Verify,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ShieldError {
    #[error("invalid task: {}", .0.join("; "))]
    InvalidTask(Vec<String>),
    #[error("enum: {0}")]
    Enumeration(EnumerateError),
    #[error("model: no plans to block")]
    EmptyPlanSet,
    #[error("unshieldable: empty plan solves task")]
    Unshieldable,
    #[error("ilp: {0}")]
    Solver(SolveError),
    #[error("ilp: no set of edits blocks every plan")]
    Infeasible,
    #[error("apply: {0}")]
    Modification(ModificationError),
    #[error("verify: {0}")]
    Verification(StripsError),
}

impl ShieldError {
    pub fn stage(&self) -> Stage {
        match self {
            ShieldError::InvalidTask(_) => Stage::Validate,
            ShieldError::Enumeration(_) => Stage::Enumerate,
            ShieldError::EmptyPlanSet | ShieldError::Unshieldable => Stage::Model,
            ShieldError::Solver(_) | ShieldError::Infeasible => Stage::Solve,
            ShieldError::Modification(_) => Stage::Apply,
            ShieldError::Verification(_) => Stage::Verify,
        }
    }
}
