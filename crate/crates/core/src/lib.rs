//! Shielding of STRIPS planning tasks.
//!
//! Given a grounded task whose goal encodes a flawed state, this crate finds
//! the smallest set of action edits (added preconditions, removed add effects,
//! added delete effects) after which the goal is unreachable:
//!
//! 1. [`enumerate`] collects every simple (loopless) solution plan;
//! 2. [`shield`] encodes "block every plan" as a 0-1 integer program;
//! 3. [`ilp`] solves that program exactly;
//! 4. [`strips::goal_reachable`] checks that the edited task is unsolvable.
//!    Blocking the simple plans does not always suffice; see [`shield`].
//!
//! [`benchgen`] builds synthetic graph-shaped tasks with a known plan count.
//!
//! The crate is `no_std` and only needs `alloc`. Parsing, file formats, timing
//! and the command-line frontend live in the `taskshield` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod benchgen;
pub mod budget;
pub mod enumerate;
pub mod ilp;
pub mod shield;
pub mod strips;

pub use budget::{Clock, Interrupt, NoClock};
pub use enumerate::{enumerate_simple_plans, verify_plan, EnumerationConfig, PlanLimit, PlanSet};
pub use shield::{shield, ModificationSet, ShieldConfig, ShieldError, ShieldReport};
pub use strips::{
    Fluent, FluentId, FluentSet, GroundAction, Plan, PlanningTask, SimulationOutcome, State,
    StripsError, TaskBuilder,
};
