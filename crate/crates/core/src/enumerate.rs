//! Enumeration of simple (loopless) solution plans.
//!
//! A depth-first search from the initial state keeps the states of the
//! current path in a set and refuses to step into any of them again. Every
//! path whose last state satisfies the goal is recorded, including paths that
//! pass through earlier goal states. Recorded plans are then sorted by
//! (cost, length, action names) and optionally truncated to the first `k`.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::num::NonZeroUsize;

use hashbrown::HashSet;
use thiserror::Error;

use crate::budget::{Interrupt, POLL_INTERVAL};
use crate::strips::{applicable, simulate_plan, successor, Plan, PlanningTask, State};
use crate::NoClock;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanLimit {
    All,
    TopK(NonZeroUsize),
}

impl PlanLimit {
    /// `TopK(k)`, or `None` when `k == 0`.
    pub fn top(k: usize) -> Option<Self> {
        NonZeroUsize::new(k).map(PlanLimit::TopK)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EnumerationConfig {
    pub limit: PlanLimit,
    /// Maximum number of generated search nodes.
    pub node_budget: u64,
}

impl EnumerationConfig {
    pub fn all() -> Self {
        EnumerationConfig {
            limit: PlanLimit::All,
            node_budget: 10_000_000,
        }
    }

    pub fn top_k(k: NonZeroUsize) -> Self {
        EnumerationConfig {
            limit: PlanLimit::TopK(k),
            ..Self::all()
        }
    }
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        Self::all()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanSet {
    pub plans: Vec<Plan>,
    /// True iff the search space was exhausted and nothing was truncated.
    pub complete: bool,
    /// Indices of the actions used by at least one plan.
    pub action_support: BTreeSet<usize>,
}

impl PlanSet {
    pub fn new(plans: Vec<Plan>, complete: bool) -> Self {
        let action_support = plans.iter().flat_map(|p| p.steps.iter().copied()).collect();
        PlanSet {
            plans,
            complete,
            action_support,
        }
    }

    pub fn len(&self) -> usize {
        self.plans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plans.is_empty()
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EnumerateError {
    #[error("plan enumeration exceeded its node budget after {} plans", partial.len())]
    BudgetExceeded { partial: PlanSet },
    #[error("plan enumeration interrupted after {} plans", partial.len())]
    Interrupted { partial: PlanSet },
}

impl EnumerateError {
    pub fn partial(&self) -> &PlanSet {
        match self {
            EnumerateError::BudgetExceeded { partial }
            | EnumerateError::Interrupted { partial } => partial,
        }
    }
}

/// Total order on plans: cost, then length, then action names.
pub fn plan_order(task: &PlanningTask, a: &Plan, b: &Plan) -> Ordering {
    a.cost
        .total_cmp(&b.cost)
        .then(a.len().cmp(&b.len()))
        .then_with(|| {
            let na = a.steps.iter().map(|&i| task.actions[i].name.as_str());
            let nb = b.steps.iter().map(|&i| task.actions[i].name.as_str());
            na.cmp(nb)
        })
}

pub fn enumerate_simple_plans(
    task: &PlanningTask,
    config: &EnumerationConfig,
) -> Result<PlanSet, EnumerateError> {
    enumerate_simple_plans_with(task, config, &NoClock)
}

struct Frame {
    state: State,
    next_action: usize,
}

pub fn enumerate_simple_plans_with(
    task: &PlanningTask,
    config: &EnumerationConfig,
    interrupt: &dyn Interrupt,
) -> Result<PlanSet, EnumerateError> {
    let mut plans: Vec<Plan> = Vec::new();
    let mut on_path: HashSet<State> = HashSet::new();
    let mut stack: Vec<Frame> = Vec::new();
    let mut steps: Vec<usize> = Vec::new();
    let mut nodes: u64 = 1;

    if task.goal.is_subset(&task.init) {
        plans.push(Plan::empty());
    }
    on_path.insert(task.init.clone());
    stack.push(Frame {
        state: task.init.clone(),
        next_action: 0,
    });

    let finish = |mut plans: Vec<Plan>, exhausted: bool| {
        plans.sort_by(|a, b| plan_order(task, a, b));
        let mut complete = exhausted;
        if let PlanLimit::TopK(k) = config.limit {
            if plans.len() > k.get() {
                plans.truncate(k.get());
                complete = false;
            }
        }
        PlanSet::new(plans, complete)
    };

    while let Some(frame) = stack.last_mut() {
        let Some(offset) = task.actions[frame.next_action..]
            .iter()
            .position(|a| applicable(&frame.state, a))
        else {
            let done = stack.pop().expect("non-empty stack");
            on_path.remove(&done.state);
            steps.pop();
            continue;
        };
        let index = frame.next_action + offset;
        frame.next_action = index + 1;
        let action = &task.actions[index];
        let next = successor(&frame.state, action);
        if on_path.contains(&next) {
            continue;
        }
        nodes += 1;
        if nodes > config.node_budget {
            return Err(EnumerateError::BudgetExceeded {
                partial: finish(plans, false),
            });
        }
        if nodes.is_multiple_of(POLL_INTERVAL) && interrupt.interrupted() {
            return Err(EnumerateError::Interrupted {
                partial: finish(plans, false),
            });
        }
        steps.push(index);
        if task.goal.is_subset(&next) {
            plans.push(Plan::new(&task.actions, steps.clone()));
        }
        on_path.insert(next.clone());
        stack.push(Frame {
            state: next,
            next_action: 0,
        });
    }
    Ok(finish(plans, true))
}

/// True iff `plan` is executable, reaches the goal, and never revisits a state.
pub fn verify_plan(task: &PlanningTask, plan: &Plan) -> bool {
    let Ok(outcome) = simulate_plan(task, plan, None) else {
        return false;
    };
    let crate::strips::SimulationOutcome::Valid { trace } = outcome else {
        return false;
    };
    let last = trace.last().expect("trace is never empty");
    if !task.goal.is_subset(last) {
        return false;
    }
    let mut seen: HashSet<&State> = HashSet::new();
    trace.iter().all(|s| seen.insert(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strips::{workflow, TaskBuilder};
    use alloc::vec;

    #[test]
    fn workflow_has_two_plans() {
        let t = workflow();
        let set = enumerate_simple_plans(&t, &EnumerationConfig::all()).unwrap();
        assert!(set.complete);
        let names: Vec<_> = set.plans.iter().map(|p| p.names(&t)).collect();
        assert_eq!(
            names,
            vec![
                vec!["submit_application", "direct_approval", "escalation"],
                vec!["submit_application", "escalation", "direct_approval"],
            ]
        );
        assert!(set.plans.iter().all(|p| verify_plan(&t, p)));
        assert_eq!(set.action_support.len(), 3);
    }

    #[test]
    fn top_one_is_first_in_order() {
        let t = workflow();
        let cfg = EnumerationConfig::top_k(NonZeroUsize::new(1).unwrap());
        let set = enumerate_simple_plans(&t, &cfg).unwrap();
        assert!(!set.complete);
        assert_eq!(set.plans.len(), 1);
        assert_eq!(
            set.plans[0].names(&t),
            vec!["submit_application", "direct_approval", "escalation"]
        );
        let cfg = EnumerationConfig::top_k(NonZeroUsize::new(5).unwrap());
        assert!(enumerate_simple_plans(&t, &cfg).unwrap().complete);
    }

    #[test]
    fn goal_in_init_yields_empty_plan() {
        let mut b = TaskBuilder::new();
        b.action("flip", &["a"], &["b"], &["a"])
            .init(&["a"])
            .goal(&["a"]);
        let set = enumerate_simple_plans(&b.build(), &EnumerationConfig::all()).unwrap();
        assert_eq!(set.plans, vec![Plan::empty()]);
    }

    #[test]
    fn verify_rejects_inapplicable_and_looping_plans() {
        let t = workflow();
        let esc = t.action_index("escalation").unwrap();
        assert!(!verify_plan(&t, &Plan::new(&t.actions, vec![esc])));

        let mut b = TaskBuilder::new();
        b.action("go", &["a"], &["b"], &["a"])
            .action("back", &["b"], &["a"], &["b"])
            .action("finish", &["b"], &["g"], &[])
            .init(&["a"])
            .goal(&["g"]);
        let t = b.build();
        assert!(verify_plan(&t, &Plan::new(&t.actions, vec![0, 2])));
        assert!(!verify_plan(&t, &Plan::new(&t.actions, vec![0, 1, 0, 2])));
    }

    #[test]
    fn plans_through_goal_states_are_kept() {
        let mut b = TaskBuilder::new();
        b.action("reach", &[], &["g"], &[])
            .action("extra", &["g"], &["x"], &[])
            .goal(&["g"]);
        let t = b.build();
        let set = enumerate_simple_plans(&t, &EnumerationConfig::all()).unwrap();
        let names: Vec<_> = set.plans.iter().map(|p| p.names(&t)).collect();
        assert_eq!(names, vec![vec!["reach"], vec!["reach", "extra"]]);
    }

    #[test]
    fn budget_exceeded_returns_partial() {
        let t = workflow();
        let cfg = EnumerationConfig {
            limit: PlanLimit::All,
            node_budget: 3,
        };
        let err = enumerate_simple_plans(&t, &cfg).unwrap_err();
        assert!(matches!(err, EnumerateError::BudgetExceeded { .. }));
        assert!(!err.partial().complete);
    }
}
