use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::enumerate::PlanSet;
use crate::ilp::{IlpModel, Relation, VarId};
use crate::strips::{FluentId, FluentSet, GroundAction, Plan, PlanningTask};

use super::mods::{EditKind, ModificationSet};
use super::ShieldError;

/// A task with the artificial goal action appended, and the plans with a
/// final step invoking it.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedTask {
    pub task: PlanningTask,
    pub plans: Vec<Plan>,
    /// Index of the goal action in `task.actions`.
    pub goal_action: usize,
}

impl AugmentedTask {
    /// Actions of the original task occurring in some plan.
    pub fn support(&self) -> Vec<usize> {
        let mut used: Vec<usize> = self
            .plans
            .iter()
            .flat_map(|p| p.steps.iter().copied())
            .filter(|&a| a != self.goal_action)
            .collect();
        used.sort_unstable();
        used.dedup();
        used
    }
}

/// Appends an action whose precondition is the goal, with no effects and
/// zero cost, and ends every plan with it. Reaching the goal thereby becomes
/// the applicability of the last step.
pub fn append_goal_action(task: &PlanningTask, plans: &PlanSet) -> AugmentedTask {
    let mut name = String::from("__goal__");
    while task.action_index(&name).is_some() {
        name.push('_');
    }
    let n = task.num_fluents();
    let mut out = task.clone();
    let goal_action = out.actions.len();
    out.actions.push(GroundAction {
        name,
        pre: task.goal.clone(),
        add: FluentSet::with_universe(n),
        del: FluentSet::with_universe(n),
        cost: 0.0,
    });
    let plans = plans
        .plans
        .iter()
        .map(|p| {
            let mut steps = p.steps.clone();
            steps.push(goal_action);
            Plan {
                steps,
                cost: p.cost,
            }
        })
        .collect();
    AugmentedTask {
        task: out,
        plans,
        goal_action,
    }
}

/// Where each decision variable of a shielding model lives.
///
/// Positions are 1-based: the action at position `i` of a plan reads state
/// layer `i - 1` and writes layer `i`; layer 0 is the initial state.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarIndexMap {
    /// Keyed by (action, fluent): the fluent becomes a precondition.
    pub pre: BTreeMap<(usize, FluentId), VarId>,
    /// Keyed by (action, fluent): the add effect is dropped.
    pub addrm: BTreeMap<(usize, FluentId), VarId>,
    /// Keyed by (action, fluent): the fluent becomes a delete effect.
    pub deladd: BTreeMap<(usize, FluentId), VarId>,
    /// `state[p][i][f]`: fluent `f` holds in layer `i` of plan `p`.
    pub state: Vec<Vec<Vec<VarId>>>,
    /// `enabled[p][i - 1]`: the action at position `i` of plan `p` is applicable.
    pub enabled: Vec<Vec<VarId>>,
    /// Keyed by (plan, position, fluent): that precondition is required
    /// and missing.
    pub pre_unsat: BTreeMap<(usize, usize, FluentId), VarId>,
}

impl VarIndexMap {
    pub fn num_modification_vars(&self) -> usize {
        self.pre.len() + self.addrm.len() + self.deladd.len()
    }

    /// Decodes state layer `i` of plan `p`.
    pub fn layer(&self, p: usize, i: usize, assignment: &[bool]) -> FluentSet {
        let vars = &self.state[p][i];
        FluentSet::from_ids(
            vars.len(),
            vars.iter()
                .enumerate()
                .filter(|(_, &v)| assignment[v])
                .map(|(f, _)| f),
        )
    }
}

/// The edits whose variables are set in `assignment`.
pub fn extract_modifications(map: &VarIndexMap, assignment: &[bool]) -> ModificationSet {
    let pick = |vars: &BTreeMap<(usize, FluentId), VarId>| {
        vars.iter()
            .filter(|(_, &v)| assignment[v])
            .map(|(&k, _)| k)
            .collect()
    };
    ModificationSet {
        pre_additions: pick(&map.pre),
        add_removals: pick(&map.addrm),
        del_additions: pick(&map.deladd),
    }
}

/// The variable encoding a single edit, if the model has one.
pub fn edit_var(
    map: &VarIndexMap,
    kind: EditKind,
    action: usize,
    fluent: FluentId,
) -> Option<VarId> {
    let vars = match kind {
        EditKind::AddPrecondition => &map.pre,
        EditKind::RemoveAdd => &map.addrm,
        EditKind::AddDelete => &map.deladd,
    };
    vars.get(&(action, fluent)).copied()
}

/// Encodes "every plan has a step that is not applicable after the edits"
/// as a 0-1 program minimizing the number of edits.
///
/// Edit variables exist only for actions used by some plan, never for the
/// goal action. Per plan, state layers follow the actions' effects under
/// the chosen edits:
///
/// * kept add effect: the fluent holds afterwards;
/// * dropped add effect: the fluent keeps its previous value;
/// * delete effect, original or added: the fluent is false afterwards;
/// * anything else: the fluent keeps its previous value.
///
/// A step counts as enabled unless one of its (possibly added)
/// preconditions is missing, and at least one step per plan must be
/// disabled.
pub fn build_shield_model(aug: &AugmentedTask) -> Result<(IlpModel, VarIndexMap), ShieldError> {
    if aug.plans.is_empty() {
        return Err(ShieldError::EmptyPlanSet);
    }
    if aug.plans.iter().any(|p| p.steps == [aug.goal_action]) {
        return Err(ShieldError::Unshieldable);
    }
    let task = &aug.task;
    let n = task.num_fluents();
    let mut model = IlpModel::new();
    let mut map = VarIndexMap::default();

    for a in aug.support() {
        let action = &task.actions[a];
        for f in (0..n).filter(|&f| !action.pre.contains(f)) {
            map.pre
                .insert((a, f), model.add_var(format!("pre_{a}_{f}")));
        }
        for f in action.add.iter() {
            map.addrm
                .insert((a, f), model.add_var(format!("addrm_{a}_{f}")));
        }
        for f in (0..n).filter(|&f| !action.add.contains(f) && !action.del.contains(f)) {
            map.deladd
                .insert((a, f), model.add_var(format!("deladd_{a}_{f}")));
        }
    }
    let mut edit_vars: Vec<VarId> = map
        .pre
        .values()
        .chain(map.addrm.values())
        .chain(map.deladd.values())
        .copied()
        .collect();
    edit_vars.sort_unstable();
    for v in edit_vars {
        model.add_objective_term(1, v);
    }

    for (p, plan) in aug.plans.iter().enumerate() {
        let len = plan.steps.len();
        let layers: Vec<Vec<VarId>> = (0..=len)
            .map(|i| {
                (0..n)
                    .map(|f| model.add_var(format!("s_{p}_{i}_{f}")))
                    .collect()
            })
            .collect();
        for (f, &s) in layers[0].iter().enumerate() {
            let holds = task.init.contains(f) as i64;
            model.add_constraint(format!("init_{p}_{f}"), vec![(1, s)], Relation::Eq, holds);
        }

        let mut enabled = Vec::with_capacity(len);
        for (k, &a) in plan.steps.iter().enumerate() {
            let i = k + 1;
            let action = &task.actions[a];
            let (before, after) = (&layers[i - 1], &layers[i]);

            let mut unsat = Vec::new();
            for (f, &s) in before.iter().enumerate() {
                if action.pre.contains(f) {
                    let u = model.add_var(format!("unsat_{p}_{i}_{f}"));
                    model.add_constraint(
                        format!("unsat_{p}_{i}_{f}"),
                        vec![(1, u), (1, s)],
                        Relation::Eq,
                        1,
                    );
                    map.pre_unsat.insert((p, i, f), u);
                    unsat.push(u);
                } else if let Some(&m) = map.pre.get(&(a, f)) {
                    let u = model.add_var(format!("unsat_{p}_{i}_{f}"));
                    model.add_constraint(
                        format!("unsat_lo_{p}_{i}_{f}"),
                        vec![(1, u), (-1, m), (1, s)],
                        Relation::Ge,
                        0,
                    );
                    model.add_constraint(
                        format!("unsat_pre_{p}_{i}_{f}"),
                        vec![(1, u), (-1, m)],
                        Relation::Le,
                        0,
                    );
                    model.add_constraint(
                        format!("unsat_state_{p}_{i}_{f}"),
                        vec![(1, u), (1, s)],
                        Relation::Le,
                        1,
                    );
                    map.pre_unsat.insert((p, i, f), u);
                    unsat.push(u);
                }
            }

            let e = model.add_var(format!("enabled_{p}_{i}"));
            let mut terms = vec![(1, e)];
            terms.extend(unsat.iter().map(|&u| (1, u)));
            model.add_constraint(format!("enabled_{p}_{i}"), terms, Relation::Ge, 1);
            enabled.push(e);

            for f in 0..n {
                let (s, t) = (before[f], after[f]);
                let name = |tag: &str| format!("eff_{tag}_{p}_{i}_{f}");
                if action.add.contains(f) {
                    if let Some(&r) = map.addrm.get(&(a, f)) {
                        model.add_constraint(name("add"), vec![(1, t), (1, r)], Relation::Ge, 1);
                        model.add_constraint(
                            name("addup"),
                            vec![(1, t), (-1, s), (1, r)],
                            Relation::Le,
                            1,
                        );
                        model.add_constraint(
                            name("adddown"),
                            vec![(-1, t), (1, s), (1, r)],
                            Relation::Le,
                            1,
                        );
                        continue;
                    }
                    model.add_constraint(name("add"), vec![(1, t)], Relation::Eq, 1);
                } else if action.del.contains(f) {
                    model.add_constraint(name("del"), vec![(1, t)], Relation::Eq, 0);
                } else if let Some(&d) = map.deladd.get(&(a, f)) {
                    model.add_constraint(name("deladd"), vec![(1, t), (1, d)], Relation::Le, 1);
                    model.add_constraint(
                        name("frameup"),
                        vec![(1, t), (-1, s), (-1, d)],
                        Relation::Le,
                        0,
                    );
                    model.add_constraint(
                        name("framedown"),
                        vec![(-1, t), (1, s), (-1, d)],
                        Relation::Le,
                        0,
                    );
                } else {
                    model.add_constraint(name("frame"), vec![(1, t), (-1, s)], Relation::Eq, 0);
                }
            }
        }
        model.add_constraint(
            format!("block_{p}"),
            enabled.iter().map(|&e| (1, e)).collect(),
            Relation::Le,
            len as i64 - 1,
        );
        map.state.push(layers);
        map.enabled.push(enabled);
    }
    Ok((model, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{enumerate_simple_plans, EnumerationConfig};
    use crate::ilp::solve;
    use crate::shield::mods::apply_modifications;
    use crate::strips::workflow;
    use crate::strips::{goal_reachable, simulate_plan, SimulationOutcome, TaskBuilder};

    fn augmented(task: &PlanningTask) -> AugmentedTask {
        let plans = enumerate_simple_plans(task, &EnumerationConfig::all()).unwrap();
        append_goal_action(task, &plans)
    }

    #[test]
    fn goal_action_closes_every_plan() {
        let task = workflow();
        let aug = augmented(&task);
        assert_eq!(aug.plans.len(), 2);
        for plan in &aug.plans {
            assert_eq!(plan.len(), 4);
            assert_eq!(*plan.steps.last().unwrap(), aug.goal_action);
            assert!(simulate_plan(&aug.task, plan, None).unwrap().is_valid());
        }
        let g = &aug.task.actions[aug.goal_action];
        assert_eq!(g.pre, task.goal);
        assert!(g.add.is_empty() && g.del.is_empty());
        assert_eq!(g.cost, 0.0);
    }

    #[test]
    fn empty_plan_becomes_goal_action_alone() {
        let task = TaskBuilder::new().init(&["p"]).goal(&["p"]).build();
        let aug = augmented(&task);
        assert_eq!(aug.plans.len(), 1);
        assert_eq!(aug.plans[0].steps, [aug.goal_action]);
        assert_eq!(
            build_shield_model(&aug).unwrap_err(),
            ShieldError::Unshieldable
        );
    }

    #[test]
    fn workflow_variable_counts() {
        let task = workflow();
        let (model, map) = build_shield_model(&augmented(&task)).unwrap();
        let layer_vars: usize = map.state.iter().map(|p| (p.len() - 1) * p[0].len()).sum();
        assert_eq!(layer_vars, 48);
        assert_eq!(map.enabled.iter().map(Vec::len).sum::<usize>(), 8);
        assert_eq!(map.pre.len(), 14);
        assert_eq!(map.addrm.len(), 3);
        assert_eq!(map.deladd.len(), 14);
        assert_eq!(model.objective.len(), 31);
        let goal = task.actions.len();
        assert!(map
            .pre
            .keys()
            .chain(map.deladd.keys())
            .all(|&(a, _)| a < goal));
        model.validate().unwrap();
    }

    #[test]
    fn workflow_optimum_is_one_edit() {
        let task = workflow();
        let aug = augmented(&task);
        let (model, map) = build_shield_model(&aug).unwrap();
        let result = solve(&model).unwrap();
        assert_eq!(result.objective(), Some(1));
        let mods = extract_modifications(&map, result.assignment().unwrap());
        assert_eq!(mods.cardinality(), 1);
        let shielded = apply_modifications(&task, &mods).unwrap();
        assert!(!goal_reachable(&shielded).unwrap());
    }

    #[test]
    fn single_action_plan_needs_one_edit() {
        let task = TaskBuilder::new()
            .action("a", &[], &["g"], &[])
            .goal(&["g"])
            .build();
        let (model, _) = build_shield_model(&augmented(&task)).unwrap();
        assert_eq!(solve(&model).unwrap().objective(), Some(1));
    }

    #[test]
    fn all_zero_assignment_extracts_nothing() {
        let (model, map) = build_shield_model(&augmented(&workflow())).unwrap();
        let zeros = vec![false; model.num_vars()];
        assert!(extract_modifications(&map, &zeros).is_empty());
    }

    #[test]
    fn decoded_layers_follow_simulation() {
        let task = workflow();
        let aug = augmented(&task);
        let (model, map) = build_shield_model(&aug).unwrap();
        let result = solve(&model).unwrap();
        let x = result.assignment().unwrap();
        let mods = extract_modifications(&map, x);
        let edited = apply_modifications(&aug.task, &mods).unwrap();
        for (p, plan) in aug.plans.iter().enumerate() {
            let trace = match simulate_plan(&edited, plan, None).unwrap() {
                SimulationOutcome::BlockedAt { step, .. } => {
                    let prefix = Plan::new(&edited.actions, plan.steps[..step].to_vec());
                    match simulate_plan(&edited, &prefix, None).unwrap() {
                        SimulationOutcome::Valid { trace } => trace,
                        other => panic!("prefix blocked: {other:?}"),
                    }
                }
                SimulationOutcome::Valid { .. } => panic!("plan {p} survived"),
            };
            for (i, state) in trace.iter().enumerate() {
                assert_eq!(&map.layer(p, i, x), state, "plan {p} layer {i}");
            }
        }
    }
}
