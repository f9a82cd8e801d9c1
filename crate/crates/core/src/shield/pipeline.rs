use alloc::string::String;

use crate::budget::{Clock, Interrupt, NoClock};
use crate::enumerate::{enumerate_simple_plans_with, EnumerationConfig, PlanSet};
use crate::ilp::{BinarySolver, CoreGuidedSolver, SolveResult, SolveStats, SolverLimits};
use crate::strips::{shortest_plan_with, validate_task, Plan, PlanningTask, ReachLimits};

use super::model::{append_goal_action, build_shield_model, extract_modifications};
use super::mods::{apply_modifications, ModificationSet};
use super::ShieldError;

#[derive(Clone, Copy, Debug, Default)]
pub struct ShieldConfig {
    pub enumeration: EnumerationConfig,
    pub solver: SolverLimits,
    pub reach: ReachLimits,
    /// Keep adding plans of the edited task and solving again until the
    /// edits make the task unsolvable.
    pub refine: bool,
}

impl ShieldConfig {
    pub fn with_enumeration(enumeration: EnumerationConfig) -> Self {
        ShieldConfig {
            enumeration,
            ..ShieldConfig::default()
        }
    }
}

/// Seconds spent per stage, as reported by the clock.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Timings {
    pub enumerate_s: f64,
    pub ilp_s: f64,
    pub verify_s: f64,
}

impl Timings {
    pub fn total_s(&self) -> f64 {
        self.enumerate_s + self.ilp_s + self.verify_s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShieldReport {
    /// The enumerated plans, followed by any plans added by refinement.
    pub plans: PlanSet,
    pub enumeration_complete: bool,
    pub modifications: ModificationSet,
    /// The task with `modifications` applied.
    pub modified: PlanningTask,
    pub solver: Option<SolveStats>,
    pub model_vars: usize,
    pub model_constraints: usize,
    pub verified_unsolvable: bool,
    /// Equal to `verified_unsolvable`.
    pub success: bool,
    pub timings: Timings,
    pub note: Option<String>,
    /// Number of plans added by refinement.
    pub refinements: usize,
}

impl ShieldReport {
    pub fn num_mods(&self) -> usize {
        self.modifications.cardinality()
    }
}

/// Runs the whole pipeline with the default solver and no time limit.
pub fn shield(task: &PlanningTask, config: &ShieldConfig) -> Result<ShieldReport, ShieldError> {
    let solver = CoreGuidedSolver {
        limits: config.solver,
    };
    shield_with(task, config, &solver, &NoClock)
}

/// Enumerates plans, blocks them all with as few edits as possible, applies
/// the edits and checks that the goal is no longer reachable. Every stage
/// stops when `clock` reports an interrupt.
pub fn shield_with(
    task: &PlanningTask,
    config: &ShieldConfig,
    solver: &dyn BinarySolver,
    clock: &dyn Clock,
) -> Result<ShieldReport, ShieldError> {
    let violations = validate_task(task);
    if !violations.is_empty() {
        return Err(ShieldError::InvalidTask(violations));
    }
    let interrupt: &dyn Interrupt = &clock;
    let mut timings = Timings::default();

    let t0 = clock.seconds();
    let mut plans = enumerate_simple_plans_with(task, &config.enumeration, interrupt)
        .map_err(ShieldError::Enumeration)?;
    let mut t = clock.seconds();
    timings.enumerate_s = t - t0;
    let enumeration_complete = plans.complete;

    let witness = |modified: &PlanningTask| {
        shortest_plan_with(modified, config.reach, interrupt).map_err(ShieldError::Verification)
    };

    if plans.is_empty() {
        let reachable = witness(task)?.is_some();
        timings.verify_s = clock.seconds() - t;
        return Ok(ShieldReport {
            enumeration_complete,
            plans,
            modifications: ModificationSet::new(),
            modified: task.clone(),
            solver: None,
            model_vars: 0,
            model_constraints: 0,
            verified_unsolvable: !reachable,
            success: !reachable,
            timings,
            note: Some(String::from("no plans found")),
            refinements: 0,
        });
    }

    let mut refinements = 0;
    loop {
        let aug = append_goal_action(task, &plans);
        let (model, map) = build_shield_model(&aug)?;
        let result = solver
            .solve(&model, interrupt)
            .map_err(ShieldError::Solver)?;
        let t_ilp = clock.seconds();
        timings.ilp_s += t_ilp - t;

        let SolveResult::Optimal {
            assignment, stats, ..
        } = result
        else {
            return Err(ShieldError::Infeasible);
        };
        let modifications = extract_modifications(&map, &assignment);
        let modified =
            apply_modifications(task, &modifications).map_err(ShieldError::Modification)?;
        let surviving = witness(&modified)?;
        t = clock.seconds();
        timings.verify_s += t - t_ilp;

        match surviving {
            Some(plan) if config.refine => {
                // Edits only shrink actions, so a plan of the edited task
                // also solves the original one.
                debug_assert!(!plans.plans.iter().any(|p| p.steps == plan.steps));
                let mut all = plans.plans;
                all.push(Plan::new(&task.actions, plan.steps));
                plans = PlanSet::new(all, plans.complete);
                refinements += 1;
            }
            surviving => {
                let unsolvable = surviving.is_none();
                return Ok(ShieldReport {
                    enumeration_complete,
                    plans,
                    modifications,
                    modified,
                    solver: Some(stats),
                    model_vars: model.num_vars(),
                    model_constraints: model.constraints.len(),
                    verified_unsolvable: unsolvable,
                    success: unsolvable,
                    timings,
                    note: None,
                    refinements,
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strips::{workflow, TaskBuilder};

    #[test]
    fn workflow_is_shielded_with_one_edit() {
        let report = shield(&workflow(), &ShieldConfig::default()).unwrap();
        assert_eq!(report.plans.len(), 2);
        assert!(report.enumeration_complete);
        assert_eq!(report.num_mods(), 1);
        assert!(report.success && report.verified_unsolvable);
    }

    #[test]
    fn unsolvable_task_needs_nothing() {
        let task = TaskBuilder::new()
            .action("a", &["p"], &["q"], &[])
            .goal(&["q"])
            .build();
        let report = shield(&task, &ShieldConfig::default()).unwrap();
        assert!(report.modifications.is_empty());
        assert!(report.success);
        assert_eq!(report.note.as_deref(), Some("no plans found"));
    }

    #[test]
    fn goal_in_init_is_unshieldable() {
        let task = TaskBuilder::new().init(&["p"]).goal(&["p"]).build();
        assert_eq!(
            shield(&task, &ShieldConfig::default()).unwrap_err(),
            ShieldError::Unshieldable
        );
    }

    /// The only simple plan is `(a1)`. Adding a delete of `f1` to `a1`
    /// blocks it, yet `(a1, a0)` still reaches the goal; in the original
    /// task that sequence revisits its second state.
    fn looping_witness() -> PlanningTask {
        let mut b = TaskBuilder::new();
        b.fluent("f0");
        b.fluent("f1");
        b.action("a0", &["f0"], &["f0", "f1"], &[])
            .action("a1", &[], &["f0"], &[])
            .action("a2", &["f0"], &["f0"], &[])
            .init(&["f1"])
            .goal(&["f0", "f1"])
            .build()
    }

    #[test]
    fn blocking_simple_plans_can_leave_task_solvable() {
        let task = looping_witness();
        let report = shield(&task, &ShieldConfig::default()).unwrap();
        assert!(report.enumeration_complete);
        assert_eq!(report.plans.len(), 1);
        assert_eq!(report.num_mods(), 1);
        assert!(!report.success);

        let config = ShieldConfig {
            refine: true,
            ..ShieldConfig::default()
        };
        let refined = shield(&task, &config).unwrap();
        assert!(refined.success);
        assert_eq!(refined.refinements, 1);
        assert_eq!(refined.plans.len(), 2);
        assert_eq!(refined.num_mods(), 1);
    }

    #[test]
    fn refinement_changes_nothing_when_first_answer_holds() {
        let config = ShieldConfig {
            refine: true,
            ..ShieldConfig::default()
        };
        let report = shield(&workflow(), &config).unwrap();
        assert_eq!(report.refinements, 0);
        assert_eq!(
            report,
            shield(&workflow(), &ShieldConfig::default()).unwrap()
        );
    }

    #[test]
    fn invalid_task_is_rejected() {
        let task = TaskBuilder::new()
            .action("bad", &[], &["p"], &["p"])
            .goal(&["p"])
            .build();
        assert!(matches!(
            shield(&task, &ShieldConfig::default()),
            Err(ShieldError::InvalidTask(_))
        ));
    }
}
