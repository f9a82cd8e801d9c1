//! Grounded STRIPS tasks and their transition semantics.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::hash::{Hash, Hasher};

use fixedbitset::FixedBitSet;
use hashbrown::{HashMap, HashSet};
use thiserror::Error;

use crate::budget::{Interrupt, POLL_INTERVAL};
use crate::NoClock;

/// Dense index of a fluent within its task, `0..task.fluents.len()`.
pub type FluentId = usize;

/// A set of fluent ids backed by a bitset.
///
/// Equality and hashing only look at the members, so sets built with
/// different capacities compare equal when they hold the same ids.
#[derive(Clone, Default)]
pub struct FluentSet(FixedBitSet);

impl FluentSet {
    /// An empty set with room for `universe` ids.
    pub fn with_universe(universe: usize) -> Self {
        FluentSet(FixedBitSet::with_capacity(universe))
    }

    pub fn from_ids<I: IntoIterator<Item = FluentId>>(universe: usize, ids: I) -> Self {
        let mut set = Self::with_universe(universe);
        for id in ids {
            set.insert(id);
        }
        set
    }

    pub fn insert(&mut self, id: FluentId) {
        self.0.grow_and_insert(id);
    }

    pub fn remove(&mut self, id: FluentId) {
        if id < self.0.len() {
            self.0.set(id, false);
        }
    }

    pub fn contains(&self, id: FluentId) -> bool {
        self.0.contains(id)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn is_subset(&self, other: &FluentSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &FluentSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn union_with(&mut self, other: &FluentSet) {
        self.0.union_with(&other.0);
    }

    pub fn difference_with(&mut self, other: &FluentSet) {
        self.0.difference_with(&other.0);
    }

    /// Members of `self` that are not in `other`.
    pub fn difference(&self, other: &FluentSet) -> FluentSet {
        let mut out = self.clone();
        out.difference_with(other);
        out
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = FluentId> + '_ {
        self.0.ones()
    }

    pub fn to_vec(&self) -> Vec<FluentId> {
        self.iter().collect()
    }

    /// Largest member, if any.
    pub fn max_id(&self) -> Option<FluentId> {
        self.0.maximum()
    }

    fn blocks(&self) -> &[usize] {
        let blocks = self.0.as_slice();
        let used = blocks.iter().rposition(|b| *b != 0).map_or(0, |i| i + 1);
        &blocks[..used]
    }
}

impl PartialEq for FluentSet {
    fn eq(&self, other: &Self) -> bool {
        self.blocks() == other.blocks()
    }
}

impl Eq for FluentSet {}

impl Hash for FluentSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.blocks().hash(state);
    }
}

impl fmt::Debug for FluentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<FluentId> for FluentSet {
    fn from_iter<I: IntoIterator<Item = FluentId>>(iter: I) -> Self {
        Self::from_ids(0, iter)
    }
}

/// A state is the set of fluents that currently hold.
pub type State = FluentSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fluent {
    pub id: FluentId,
    pub name: String,
}

/// A ground action. `add` and `del` are expected to be disjoint; use
/// [`GroundAction::new`] to have that checked.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundAction {
    pub name: String,
    pub pre: FluentSet,
    pub add: FluentSet,
    pub del: FluentSet,
    /// Non-negative; only used to order enumerated plans.
    pub cost: f64,
}

impl GroundAction {
    pub fn new(
        name: impl Into<String>,
        pre: FluentSet,
        add: FluentSet,
        del: FluentSet,
        cost: f64,
    ) -> Result<Self, StripsError> {
        let name = name.into();
        if !add.is_disjoint(&del) {
            return Err(StripsError::AddDeleteOverlap { action: name });
        }
        if !(cost.is_finite() && cost >= 0.0) {
            return Err(StripsError::InvalidCost { action: name });
        }
        Ok(GroundAction {
            name,
            pre,
            add,
            del,
            cost,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanningTask {
    pub fluents: Vec<Fluent>,
    pub actions: Vec<GroundAction>,
    pub init: State,
    pub goal: FluentSet,
}

impl PlanningTask {
    pub fn num_fluents(&self) -> usize {
        self.fluents.len()
    }

    pub fn fluent_id(&self, name: &str) -> Option<FluentId> {
        self.fluents.iter().find(|f| f.name == name).map(|f| f.id)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.name == name)
    }

    pub fn fluent_name(&self, id: FluentId) -> &str {
        &self.fluents[id].name
    }

    /// Names of the fluents in `set`, in id order.
    pub fn fluent_names(&self, set: &FluentSet) -> Vec<&str> {
        set.iter().map(|id| self.fluent_name(id)).collect()
    }
}

/// Builds a task by fluent name. Fluents are interned in first-use order.
#[derive(Clone, Debug, Default)]
pub struct TaskBuilder {
    names: Vec<String>,
    ids: HashMap<String, FluentId>,
    actions: Vec<GroundAction>,
    init: Vec<FluentId>,
    goal: Vec<FluentId>,
}

impl TaskBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns `name`, returning its id.
    pub fn fluent(&mut self, name: &str) -> FluentId {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    fn set(&mut self, names: &[&str]) -> FluentSet {
        let ids: Vec<_> = names.iter().map(|n| self.fluent(n)).collect();
        FluentSet::from_ids(0, ids)
    }

    pub fn action(&mut self, name: &str, pre: &[&str], add: &[&str], del: &[&str]) -> &mut Self {
        self.action_with_cost(name, pre, add, del, 1.0)
    }

    /// Adds an action without checking add/delete disjointness, so invalid
    /// tasks can be built for [`validate_task`].
    pub fn action_with_cost(
        &mut self,
        name: &str,
        pre: &[&str],
        add: &[&str],
        del: &[&str],
        cost: f64,
    ) -> &mut Self {
        let action = GroundAction {
            name: name.to_string(),
            pre: self.set(pre),
            add: self.set(add),
            del: self.set(del),
            cost,
        };
        self.actions.push(action);
        self
    }

    pub fn init(&mut self, names: &[&str]) -> &mut Self {
        for n in names {
            let id = self.fluent(n);
            self.init.push(id);
        }
        self
    }

    pub fn goal(&mut self, names: &[&str]) -> &mut Self {
        for n in names {
            let id = self.fluent(n);
            self.goal.push(id);
        }
        self
    }

    pub fn build(&self) -> PlanningTask {
        let n = self.names.len();
        let resize = |s: &FluentSet| FluentSet::from_ids(n, s.iter());
        PlanningTask {
            fluents: self
                .names
                .iter()
                .enumerate()
                .map(|(id, name)| Fluent {
                    id,
                    name: name.clone(),
                })
                .collect(),
            actions: self
                .actions
                .iter()
                .map(|a| GroundAction {
                    name: a.name.clone(),
                    pre: resize(&a.pre),
                    add: resize(&a.add),
                    del: resize(&a.del),
                    cost: a.cost,
                })
                .collect(),
            init: FluentSet::from_ids(n, self.init.iter().copied()),
            goal: FluentSet::from_ids(n, self.goal.iter().copied()),
        }
    }
}

/// An ordered sequence of action indices with its total cost.
#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub steps: Vec<usize>,
    pub cost: f64,
}

impl Plan {
    /// Builds a plan, summing costs from `actions`. Out-of-range indices
    /// contribute nothing; [`simulate_plan`] reports them.
    pub fn new(actions: &[GroundAction], steps: Vec<usize>) -> Self {
        let cost = steps
            .iter()
            .filter_map(|&i| actions.get(i))
            .map(|a| a.cost)
            .sum();
        Plan { steps, cost }
    }

    pub fn empty() -> Self {
        Plan {
            steps: Vec::new(),
            cost: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn names<'a>(&self, task: &'a PlanningTask) -> Vec<&'a str> {
        self.steps
            .iter()
            .map(|&i| task.actions[i].name.as_str())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimulationOutcome {
    /// `trace[0]` is the initial state and `trace[i]` the state after step `i`.
    Valid { trace: Vec<State> },
    /// Zero-based position of the first inapplicable step and the
    /// preconditions it was missing.
    BlockedAt { step: usize, missing: FluentSet },
}

impl SimulationOutcome {
    pub fn is_valid(&self) -> bool {
        matches!(self, SimulationOutcome::Valid { .. })
    }

    pub fn final_state(&self) -> Option<&State> {
        match self {
            SimulationOutcome::Valid { trace } => trace.last(),
            SimulationOutcome::BlockedAt { .. } => None,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum StripsError {
    #[error("action {action} is not applicable: missing {missing:?}")]
    Inapplicable { action: String, missing: FluentSet },
    #[error("action index {index} out of range ({len} actions)")]
    ActionOutOfRange { index: usize, len: usize },
    #[error("action {action} adds and deletes the same fluent")]
    AddDeleteOverlap { action: String },
    #[error("action {action} has a negative or non-finite cost")]
    InvalidCost { action: String },
    #[error("state limit of {cap} explored states exceeded; solvability unknown")]
    StateLimit { cap: usize },
    #[error("reachability check interrupted after {explored} states")]
    Interrupted { explored: usize },
}

/// Lists every broken task invariant. An empty list means the task is valid.
pub fn validate_task(task: &PlanningTask) -> Vec<String> {
    let mut violations = Vec::new();
    let n = task.fluents.len();
    let mut seen_fluents: HashSet<&str> = HashSet::new();
    for (i, f) in task.fluents.iter().enumerate() {
        if f.id != i {
            violations.push(format!(
                "fluent {} has id {} at position {}",
                f.name, f.id, i
            ));
        }
        if !seen_fluents.insert(f.name.as_str()) {
            violations.push(format!("duplicate fluent name {}", f.name));
        }
    }
    let out_of_range = |s: &FluentSet| s.max_id().is_some_and(|m| m >= n);
    let mut seen_actions: HashSet<&str> = HashSet::new();
    for a in &task.actions {
        if !seen_actions.insert(a.name.as_str()) {
            violations.push(format!("duplicate action name {}", a.name));
        }
        if !a.add.is_disjoint(&a.del) {
            violations.push(format!(
                "action {} adds and deletes the same fluent",
                a.name
            ));
        }
        for (label, set) in [
            ("precondition", &a.pre),
            ("add", &a.add),
            ("delete", &a.del),
        ] {
            if out_of_range(set) {
                violations.push(format!(
                    "action {}: {} fluent out of universe",
                    a.name, label
                ));
            }
        }
        if !(a.cost.is_finite() && a.cost >= 0.0) {
            violations.push(format!("action {} has invalid cost {}", a.name, a.cost));
        }
    }
    if out_of_range(&task.init) {
        violations.push("init fluent out of universe".to_string());
    }
    if out_of_range(&task.goal) {
        violations.push("goal fluent out of universe".to_string());
    }
    violations
}

pub fn applicable(state: &State, action: &GroundAction) -> bool {
    action.pre.is_subset(state)
}

/// `(state \ del) ∪ add`, without checking preconditions.
pub fn successor(state: &State, action: &GroundAction) -> State {
    let mut next = state.clone();
    next.difference_with(&action.del);
    next.union_with(&action.add);
    next
}

pub fn apply(state: &State, action: &GroundAction) -> Result<State, StripsError> {
    if !applicable(state, action) {
        return Err(StripsError::Inapplicable {
            action: action.name.clone(),
            missing: action.pre.difference(state),
        });
    }
    Ok(successor(state, action))
}

/// Replays `plan` from the initial state. With `actions_override`, step
/// indices refer to that list instead of `task.actions`.
pub fn simulate_plan(
    task: &PlanningTask,
    plan: &Plan,
    actions_override: Option<&[GroundAction]>,
) -> Result<SimulationOutcome, StripsError> {
    let actions = actions_override.unwrap_or(&task.actions);
    if let Some(&index) = plan.steps.iter().find(|&&i| i >= actions.len()) {
        return Err(StripsError::ActionOutOfRange {
            index,
            len: actions.len(),
        });
    }
    let mut trace = Vec::with_capacity(plan.len() + 1);
    trace.push(task.init.clone());
    for (step, &i) in plan.steps.iter().enumerate() {
        let action = &actions[i];
        let current = trace.last().expect("trace starts with init");
        if !applicable(current, action) {
            return Ok(SimulationOutcome::BlockedAt {
                step,
                missing: action.pre.difference(current),
            });
        }
        let next = successor(current, action);
        trace.push(next);
    }
    Ok(SimulationOutcome::Valid { trace })
}

/// Limits for [`goal_reachable_with`].
#[derive(Clone, Copy, Debug)]
pub struct ReachLimits {
    pub max_states: usize,
}

impl Default for ReachLimits {
    fn default() -> Self {
        ReachLimits {
            max_states: 10_000_000,
        }
    }
}

/// Whether some goal state is reachable from the initial state, with the
/// default state cap.
pub fn goal_reachable(task: &PlanningTask) -> Result<bool, StripsError> {
    goal_reachable_with(task, ReachLimits::default(), &NoClock)
}

/// Exhaustive breadth-first reachability. Errors instead of answering when
/// the state cap is hit or `interrupt` fires.
pub fn goal_reachable_with(
    task: &PlanningTask,
    limits: ReachLimits,
    interrupt: &dyn Interrupt,
) -> Result<bool, StripsError> {
    shortest_plan_with(task, limits, interrupt).map(|plan| plan.is_some())
}

/// A shortest plan found by breadth-first search, or `None` when the task
/// is unsolvable. Shortest plans never repeat a state.
pub fn shortest_plan_with(
    task: &PlanningTask,
    limits: ReachLimits,
    interrupt: &dyn Interrupt,
) -> Result<Option<Plan>, StripsError> {
    if task.goal.is_subset(&task.init) {
        return Ok(Some(Plan::empty()));
    }
    // Discovered states with their parent node and the action leading there.
    let mut nodes: Vec<(State, usize, usize)> = vec![(task.init.clone(), usize::MAX, usize::MAX)];
    let mut visited: HashSet<State> = HashSet::new();
    visited.insert(task.init.clone());
    let mut head = 0;
    while head < nodes.len() {
        if (head as u64 + 1).is_multiple_of(POLL_INTERVAL) && interrupt.interrupted() {
            return Err(StripsError::Interrupted {
                explored: visited.len(),
            });
        }
        let state = nodes[head].0.clone();
        for (i, action) in task.actions.iter().enumerate() {
            if !applicable(&state, action) {
                continue;
            }
            let next = successor(&state, action);
            if task.goal.is_subset(&next) {
                let mut steps = vec![i];
                let mut at = head;
                while at != 0 {
                    steps.push(nodes[at].2);
                    at = nodes[at].1;
                }
                steps.reverse();
                return Ok(Some(Plan::new(&task.actions, steps)));
            }
            if visited.contains(&next) {
                continue;
            }
            if visited.len() >= limits.max_states {
                return Err(StripsError::StateLimit {
                    cap: limits.max_states,
                });
            }
            visited.insert(next.clone());
            nodes.push((next, head, i));
        }
        head += 1;
    }
    Ok(None)
}

#[cfg(test)]
pub(crate) use tests::workflow;
