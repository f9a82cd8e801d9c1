mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use taskshield_core::benchgen::{generate, BenchConfig};
use taskshield_core::enumerate::{enumerate_simple_plans, EnumerationConfig, PlanLimit};
use taskshield_core::ilp::{solve, Relation, SolveResult};
use taskshield_core::shield::{
    append_goal_action, apply_modifications, build_shield_model, edit_var, extract_modifications,
    possible_edits, shield, AugmentedTask, ModificationSet, ShieldConfig, ShieldError,
};
use taskshield_core::strips::{goal_reachable, simulate_plan};
use taskshield_core::{PlanSet, PlanningTask, SimulationOutcome};

use common::{
    edit_space, random_task, reaches_goal, smallest_edit_set, solvable, with_edits, MaskTask,
};

/// Random tasks with between 1 and 6 simple plans and the goal not
/// initially true.
fn small_instances(seed: u64, count: usize) -> Vec<(PlanningTask, PlanSet)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let (n, m) = (rng.gen_range(2..=10), rng.gen_range(1..=6));
        let task = random_task(&mut rng, n, m);
        if task.goal.is_subset(&task.init) {
            continue;
        }
        let config = EnumerationConfig {
            limit: PlanLimit::All,
            node_budget: 100_000,
        };
        if let Ok(plans) = enumerate_simple_plans(&task, &config) {
            if (1..=6).contains(&plans.len()) {
                out.push((task, plans));
            }
        }
    }
    out
}

fn optimum(aug: &AugmentedTask) -> (i64, ModificationSet) {
    let (model, map) = build_shield_model(aug).unwrap();
    match solve(&model).unwrap() {
        SolveResult::Optimal {
            assignment,
            objective,
            ..
        } => {
            let mods = extract_modifications(&map, &assignment);
            assert_eq!(mods.cardinality() as i64, objective);
            (objective, mods)
        }
        SolveResult::Infeasible { .. } => panic!("shield model infeasible"),
    }
}

#[test]
fn model_optimum_equals_smallest_blocking_edit_set() {
    for (task, plans) in small_instances(21, 60) {
        let aug = append_goal_action(&task, &plans);
        let (objective, mods) = optimum(&aug);

        let oracle_task = MaskTask::new(&task);
        let support: Vec<usize> = plans.action_support.iter().copied().collect();
        let space = edit_space(&oracle_task, task.num_fluents(), &support);
        let steps: Vec<&[usize]> = plans.plans.iter().map(|p| &p.steps[..]).collect();
        let smallest = smallest_edit_set(&space, objective as usize, |edits| {
            let edited = with_edits(&oracle_task, edits);
            steps.iter().all(|p| !reaches_goal(&edited, p))
        })
        .expect("no blocking edit set within the model optimum");
        assert_eq!(smallest.len() as i64, objective);

        let edited = apply_modifications(&aug.task, &mods).unwrap();
        for plan in &aug.plans {
            let outcome = simulate_plan(&aug.task, plan, Some(&edited.actions)).unwrap();
            assert!(matches!(outcome, SimulationOutcome::BlockedAt { .. }));
        }
    }
}

fn smallest_unsolvable(task: &PlanningTask, max_k: usize) -> Option<usize> {
    let oracle_task = MaskTask::new(task);
    let all: Vec<usize> = (0..task.actions.len()).collect();
    let space = edit_space(&oracle_task, task.num_fluents(), &all);
    smallest_edit_set(&space, max_k, |edits| {
        !solvable(&with_edits(&oracle_task, edits))
    })
    .map(|s| s.len())
}

/// With refinement the pipeline always ends unsolvable, with as few edits
/// as any edit set making the task unsolvable.
#[test]
fn refined_pipeline_optimum_equals_smallest_unsolvable_edit_set() {
    let config = ShieldConfig {
        refine: true,
        ..ShieldConfig::default()
    };
    for (task, _) in small_instances(22, 40) {
        let report = shield(&task, &config).unwrap();
        assert!(report.success);
        assert!(!goal_reachable(&report.modified).unwrap());
        assert_eq!(
            smallest_unsolvable(&task, report.num_mods()),
            Some(report.num_mods())
        );
    }
}

/// Blocking the simple plans is a relaxation of unsolvability: it never
/// needs more edits, and when its answer verifies it is optimal.
#[test]
fn plain_pipeline_is_a_relaxation() {
    for (task, _) in small_instances(26, 40) {
        let report = shield(&task, &ShieldConfig::default()).unwrap();
        assert_eq!(report.success, !goal_reachable(&report.modified).unwrap());
        let oracle =
            smallest_unsolvable(&task, task.actions.len() * 2 * task.num_fluents()).unwrap();
        assert!(report.num_mods() <= oracle);
        if report.success {
            assert_eq!(report.num_mods(), oracle);
        }
    }
}

/// Fixing the edit variables to a random edit set, the model is feasible
/// exactly when the edits block every plan, and its state layers replay
/// each plan under the edits up to the first blocked step.
#[test]
fn state_layers_follow_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for (task, plans) in small_instances(24, 60) {
        let aug = append_goal_action(&task, &plans);
        let (mut model, map) = build_shield_model(&aug).unwrap();
        let edits = possible_edits(&aug.task, aug.support());
        let chosen: ModificationSet = (0..rng.gen_range(0..=3))
            .map(|_| edits[rng.gen_range(0..edits.len())])
            .collect();
        for e in &edits {
            let v = edit_var(&map, e.kind, e.action, e.fluent).unwrap();
            let value = i64::from(chosen.edits().contains(e));
            model.add_constraint(format!("fix_{v}"), vec![(1, v)], Relation::Eq, value);
        }
        let edited = apply_modifications(&aug.task, &chosen).unwrap();
        let outcomes: Vec<_> = aug
            .plans
            .iter()
            .map(|p| simulate_plan(&aug.task, p, Some(&edited.actions)).unwrap())
            .collect();
        let blocks_all = outcomes.iter().all(|o| !o.is_valid());
        match solve(&model).unwrap() {
            SolveResult::Infeasible { .. } => assert!(!blocks_all),
            SolveResult::Optimal { assignment, .. } => {
                assert!(blocks_all);
                assert_eq!(extract_modifications(&map, &assignment), chosen);
                for (p, (plan, outcome)) in aug.plans.iter().zip(&outcomes).enumerate() {
                    let SimulationOutcome::BlockedAt { step, .. } = outcome else {
                        unreachable!()
                    };
                    let prefix = simulate_plan(
                        &aug.task,
                        &taskshield_core::Plan::new(&edited.actions, plan.steps[..*step].to_vec()),
                        Some(&edited.actions),
                    )
                    .unwrap();
                    let SimulationOutcome::Valid { trace } = prefix else {
                        unreachable!()
                    };
                    for (i, state) in trace.iter().enumerate() {
                        assert_eq!(&map.layer(p, i, &assignment), state, "plan {p} layer {i}");
                    }
                }
            }
        }
    }
}

#[test]
fn benchgen_tasks_are_shielded() {
    for seed in 0..4 {
        let g = generate(&BenchConfig::new(8, 2, 4, seed)).unwrap();
        let report = shield(&g.task, &ShieldConfig::default()).unwrap();
        assert!(report.success);
        assert!((1..=8).contains(&report.num_mods()));
    }
}

#[test]
fn goal_in_init_is_unshieldable() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let mut task = random_task(&mut rng, 4, 2);
    task.init = task.goal.clone();
    assert_eq!(
        shield(&task, &ShieldConfig::default()).unwrap_err(),
        ShieldError::Unshieldable
    );
}
