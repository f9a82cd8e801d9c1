#[path = "../../core/tests/common/mod.rs"]
mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use taskshield::core::enumerate::{enumerate_simple_plans, EnumerationConfig};
use taskshield::core::{GroundAction, PlanningTask};
use taskshield::pddl::{self, emit_grounded_domain, emit_grounded_problem, emitted_action_names};
use taskshield::{emit_task_json, parse_task_json};

use common::random_task;

fn task_from(seed: u64, n: usize, m: usize) -> PlanningTask {
    random_task(&mut ChaCha8Rng::seed_from_u64(seed), n, m)
}

fn key(t: &PlanningTask, a: &GroundAction) -> (String, String) {
    let names = |s| {
        let mut v = t.fluent_names(s);
        v.sort_unstable();
        v.join(",")
    };
    (
        a.name.clone(),
        format!("{} / {} / {}", names(&a.pre), names(&a.add), names(&a.del)),
    )
}

fn reground(task: &PlanningTask) -> PlanningTask {
    pddl::load(
        &emit_grounded_domain(task),
        &emit_grounded_problem(task),
        pddl::DEFAULT_GROUND_ACTION_CAP,
    )
    .unwrap()
    .task
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_round_trip_is_identity(seed in any::<u64>(), n in 1usize..12, m in 0usize..6, cost in 0.0f64..100.0) {
        let mut task = task_from(seed, n, m);
        if let Some(a) = task.actions.first_mut() {
            a.cost = cost;
        }
        let text = emit_task_json(&task);
        prop_assert_eq!(parse_task_json(&text).unwrap(), task);
    }

    /// Re-grounding emitted PDDL gives the same task up to action names
    /// and costs, and the same plans in the same order.
    #[test]
    fn pddl_round_trip_preserves_plans(seed in any::<u64>(), n in 1usize..8, m in 1usize..5) {
        let task = task_from(seed, n, m);
        let back = reground(&task);
        let renamed: Vec<String> = emitted_action_names(&task);
        let mut expected = task.clone();
        for (a, name) in expected.actions.iter_mut().zip(&renamed) {
            a.name = name.clone();
        }
        expected.actions.sort_by(|a, b| a.name.cmp(&b.name));
        let lhs: Vec<_> = expected.actions.iter().map(|a| key(&expected, a)).collect();
        let rhs: Vec<_> = back.actions.iter().map(|a| key(&back, a)).collect();
        prop_assert_eq!(lhs, rhs);
        let names = |t: &PlanningTask| -> Vec<Vec<String>> {
            enumerate_simple_plans(t, &EnumerationConfig::all())
                .unwrap()
                .plans
                .iter()
                .map(|p| p.names(t).into_iter().map(str::to_string).collect())
                .collect()
        };
        let mut a = names(&expected);
        let mut b = names(&back);
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn arbitrary_names_survive_json_and_become_identifiers_in_pddl() {
    let mut task = task_from(7, 3, 2);
    task.fluents[0].name = "Door Open?".to_string();
    task.fluents[1].name = "at(room 1)".to_string();
    task.actions[0].name = "and".to_string();
    task.actions[1].name = "Go \"north\"".to_string();
    assert_eq!(parse_task_json(&emit_task_json(&task)).unwrap(), task);

    let domain = emit_grounded_domain(&task);
    assert!(domain.contains("(door_open)"));
    let back = reground(&task);
    assert_eq!(back.actions.len(), 2);
    let emitted = emitted_action_names(&task);
    assert!(
        emitted.iter().all(|n| back.action_index(n).is_some()),
        "{emitted:?}"
    );
}
