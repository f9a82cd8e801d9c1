//! Reference implementations used as test oracles. They work on `u128`
//! bitmask states and share no code with the crate under test beyond the
//! task data types.
#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use rand::Rng;
use taskshield_core::ilp::{IlpModel, Relation};
use taskshield_core::{Fluent, FluentSet, GroundAction, PlanningTask};

pub type Mask = u128;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MaskAction {
    pub pre: Mask,
    pub add: Mask,
    pub del: Mask,
}

#[derive(Clone, Debug)]
pub struct MaskTask {
    pub actions: Vec<MaskAction>,
    pub init: Mask,
    pub goal: Mask,
}

pub fn mask(set: &FluentSet) -> Mask {
    set.iter().fold(0, |m, f| {
        assert!(f < 128, "oracle supports at most 128 fluents");
        m | (1 << f)
    })
}

impl MaskTask {
    pub fn new(task: &PlanningTask) -> Self {
        MaskTask {
            actions: task
                .actions
                .iter()
                .map(|a| MaskAction {
                    pre: mask(&a.pre),
                    add: mask(&a.add),
                    del: mask(&a.del),
                })
                .collect(),
            init: mask(&task.init),
            goal: mask(&task.goal),
        }
    }
}

pub fn step(s: Mask, a: &MaskAction) -> Option<Mask> {
    (s & a.pre == a.pre).then_some((s & !a.del) | a.add)
}

/// Every step applicable and the goal holds at the end.
pub fn reaches_goal(task: &MaskTask, plan: &[usize]) -> bool {
    let mut s = task.init;
    for &i in plan {
        match step(s, &task.actions[i]) {
            Some(next) => s = next,
            None => return false,
        }
    }
    s & task.goal == task.goal
}

pub fn reachable_states(task: &MaskTask) -> HashSet<Mask> {
    let mut seen = HashSet::from([task.init]);
    let mut queue = VecDeque::from([task.init]);
    while let Some(s) = queue.pop_front() {
        for a in &task.actions {
            if let Some(t) = step(s, a) {
                if seen.insert(t) {
                    queue.push_back(t);
                }
            }
        }
    }
    seen
}

pub fn solvable(task: &MaskTask) -> bool {
    reachable_states(task)
        .iter()
        .any(|&s| s & task.goal == task.goal)
}

/// All simple goal-reaching action sequences, generated level by level up
/// to the number of reachable states. Sorted.
pub fn brute_force_plans(task: &MaskTask) -> Vec<Vec<usize>> {
    let bound = reachable_states(task).len();
    let mut plans = Vec::new();
    let mut level: Vec<(Vec<usize>, Vec<Mask>)> = vec![(Vec::new(), vec![task.init])];
    for _ in 0..bound {
        let mut next = Vec::new();
        for (seq, trace) in level {
            let last = *trace.last().unwrap();
            if last & task.goal == task.goal {
                plans.push(seq.clone());
            }
            for (i, a) in task.actions.iter().enumerate() {
                if let Some(t) = step(last, a) {
                    if !trace.contains(&t) {
                        let mut seq = seq.clone();
                        seq.push(i);
                        let mut trace = trace.clone();
                        trace.push(t);
                        next.push((seq, trace));
                    }
                }
            }
        }
        level = next;
        if level.is_empty() {
            break;
        }
    }
    plans.sort();
    plans
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    Pre,
    AddRemove,
    DelAdd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleEdit {
    pub kind: Kind,
    pub action: usize,
    pub fluent: usize,
}

/// Every single shrinking edit of the listed actions.
pub fn edit_space(task: &MaskTask, n: usize, actions: &[usize]) -> Vec<OracleEdit> {
    let mut out = Vec::new();
    for &a in actions {
        let act = task.actions[a];
        for f in 0..n {
            let bit = 1 << f;
            let mut push = |kind| {
                out.push(OracleEdit {
                    kind,
                    action: a,
                    fluent: f,
                })
            };
            if act.pre & bit == 0 {
                push(Kind::Pre);
            }
            if act.add & bit != 0 {
                push(Kind::AddRemove);
            }
            if (act.add | act.del) & bit == 0 {
                push(Kind::DelAdd);
            }
        }
    }
    out
}

pub fn with_edits(task: &MaskTask, edits: &[OracleEdit]) -> MaskTask {
    let mut out = task.clone();
    for e in edits {
        let a = &mut out.actions[e.action];
        let bit: Mask = 1 << e.fluent;
        match e.kind {
            Kind::Pre => a.pre |= bit,
            Kind::AddRemove => a.add &= !bit,
            Kind::DelAdd => a.del |= bit,
        }
    }
    out
}

/// Smallest edit set (by size, at most `max_k`) satisfying `accept`.
pub fn smallest_edit_set(
    space: &[OracleEdit],
    max_k: usize,
    mut accept: impl FnMut(&[OracleEdit]) -> bool,
) -> Option<Vec<OracleEdit>> {
    fn choose(
        space: &[OracleEdit],
        from: usize,
        k: usize,
        chosen: &mut Vec<OracleEdit>,
        accept: &mut dyn FnMut(&[OracleEdit]) -> bool,
    ) -> bool {
        if k == 0 {
            return accept(chosen);
        }
        for i in from..space.len() {
            if space.len() - i < k {
                break;
            }
            chosen.push(space[i]);
            if choose(space, i + 1, k - 1, chosen, accept) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    for k in 0..=max_k.min(space.len()) {
        let mut chosen = Vec::with_capacity(k);
        if choose(space, 0, k, &mut chosen, &mut accept) {
            return Some(chosen);
        }
    }
    None
}

/// Random task over fluents `f0..` and actions `a0..`; the goal is one or
/// two fluents.
pub fn random_task(rng: &mut impl Rng, n_fluents: usize, n_actions: usize) -> PlanningTask {
    let fluents = (0..n_fluents)
        .map(|id| Fluent {
            id,
            name: format!("f{id}"),
        })
        .collect();
    let subset = |rng: &mut dyn FnMut() -> bool| -> FluentSet {
        FluentSet::from_ids(n_fluents, (0..n_fluents).filter(|_| rng()))
    };
    let actions = (0..n_actions)
        .map(|i| {
            let pre = subset(&mut || rng.gen_bool(0.25));
            let mut add = subset(&mut || rng.gen_bool(0.3));
            if add.is_empty() {
                add.insert(rng.gen_range(0..n_fluents));
            }
            let mut del = subset(&mut || rng.gen_bool(0.2));
            del.difference_with(&add);
            GroundAction {
                name: format!("a{i}"),
                pre,
                add,
                del,
                cost: 1.0,
            }
        })
        .collect();
    let init = subset(&mut || rng.gen_bool(0.4));
    let mut goal = FluentSet::with_universe(n_fluents);
    for _ in 0..rng.gen_range(1..=2) {
        goal.insert(rng.gen_range(0..n_fluents));
    }
    PlanningTask {
        fluents,
        actions,
        init,
        goal,
    }
}

pub fn random_model(rng: &mut impl Rng, max_vars: usize, max_constraints: usize) -> IlpModel {
    let mut model = IlpModel::new();
    let n = rng.gen_range(1..=max_vars);
    for i in 0..n {
        model.add_var(format!("x{i}"));
    }
    for i in 0..n {
        let c = rng.gen_range(0..=3);
        if c > 0 {
            model.add_objective_term(c, i);
        }
    }
    for c in 0..rng.gen_range(0..=max_constraints) {
        let mut vars: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.35)).collect();
        if vars.is_empty() {
            vars.push(rng.gen_range(0..n));
        }
        let terms: Vec<(i64, usize)> = vars
            .into_iter()
            .map(|v| {
                let mut k = rng.gen_range(-3..=3);
                if k == 0 {
                    k = 1;
                }
                (k, v)
            })
            .collect();
        let relation = match rng.gen_range(0..5) {
            0 | 1 => Relation::Ge,
            2 | 3 => Relation::Le,
            _ => Relation::Eq,
        };
        let bound = rng.gen_range(-2..=3);
        model.add_constraint(format!("c{c}"), terms, relation, bound);
    }
    model
}

fn holds(model: &IlpModel, x: &[bool]) -> bool {
    model.constraints.iter().all(|c| {
        let lhs: i64 = c.terms.iter().filter(|t| x[t.1]).map(|t| t.0).sum();
        match c.relation {
            Relation::Le => lhs <= c.bound,
            Relation::Ge => lhs >= c.bound,
            Relation::Eq => lhs == c.bound,
        }
    })
}

/// Exhaustive optimum: the first optimal assignment when assignments are
/// visited in lexicographic order (variable 0 most significant, 0 < 1).
pub fn exhaustive_optimum(model: &IlpModel) -> Option<(i64, Vec<bool>)> {
    let n = model.vars.len();
    assert!(n <= 20);
    let mut best: Option<(i64, Vec<bool>)> = None;
    for bits in 0u32..(1 << n) {
        let x: Vec<bool> = (0..n).map(|i| bits >> (n - 1 - i) & 1 == 1).collect();
        if !holds(model, &x) {
            continue;
        }
        let z: i64 = model.objective.iter().filter(|t| x[t.1]).map(|t| t.0).sum();
        if best.as_ref().is_none_or(|b| z < b.0) {
            best = Some((z, x));
        }
    }
    best
}

pub fn assignment_holds(model: &IlpModel, x: &[bool]) -> bool {
    holds(model, x)
}
