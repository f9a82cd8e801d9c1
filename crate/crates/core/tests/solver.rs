mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use taskshield_core::ilp::{
    export_lp, solve, BinarySolver, BranchAndBound, IlpModel, Relation, SolveError, SolveResult,
    SolverLimits,
};
use taskshield_core::NoClock;

use common::{assignment_holds, exhaustive_optimum, random_model};

fn check_against_exhaustive(model: &IlpModel) {
    let expected = exhaustive_optimum(model);
    let got = solve(model).unwrap();
    match (expected, &got) {
        (None, SolveResult::Infeasible { .. }) => {}
        (
            Some((z, x)),
            SolveResult::Optimal {
                assignment,
                objective,
                ..
            },
        ) => {
            assert_eq!(*objective, z);
            assert!(assignment_holds(model, assignment));
            assert_eq!(model.objective_value(assignment), z);
            assert_eq!(assignment, &x, "not the lexicographically smallest optimum");
        }
        (e, g) => panic!("exhaustive {e:?} vs solver {g:?}"),
    }
}

#[test]
fn matches_exhaustive_search_on_random_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        check_against_exhaustive(&random_model(&mut rng, 12, 16));
    }
}

#[test]
fn branch_and_bound_agrees_with_default_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let model = random_model(&mut rng, 10, 12);
        let a = solve(&model).unwrap();
        let b = BranchAndBound::default().solve(&model, &NoClock).unwrap();
        assert_eq!(a.objective(), b.objective());
        assert_eq!(a.assignment(), b.assignment());
    }
}

#[test]
fn node_limit_reports_incumbent() {
    let mut model = IlpModel::new();
    let vars: Vec<_> = (0..12).map(|i| model.add_var(format!("x{i}"))).collect();
    for &v in &vars {
        model.add_objective_term(1, v);
    }
    model.add_constraint(
        "cover",
        vars.iter().map(|&v| (1, v)).collect(),
        Relation::Ge,
        6,
    );
    let solver = BranchAndBound {
        limits: SolverLimits {
            node_limit: Some(3),
        },
    };
    match solver.solve(&model, &NoClock) {
        Err(SolveError::NodeLimit { .. }) => {}
        other => panic!("expected node limit, got {other:?}"),
    }
}

#[test]
fn lp_export_lists_every_variable_once_as_binary() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let model = random_model(&mut rng, 15, 20);
    let text = export_lp(&model);
    let binary = text.split("Binary\n").nth(1).unwrap();
    let listed: Vec<&str> = binary
        .lines()
        .take_while(|l| *l != "End")
        .map(str::trim)
        .collect();
    assert_eq!(listed.len(), model.num_vars());
    assert!(text.starts_with("Minimize\n"));
    assert!(text.trim_end().ends_with("End"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimum_is_feasible_and_deterministic(seed in any::<u64>()) {
        let model = random_model(&mut ChaCha8Rng::seed_from_u64(seed), 14, 18);
        let first = solve(&model).unwrap();
        if let SolveResult::Optimal { assignment, objective, .. } = &first {
            prop_assert!(assignment_holds(&model, assignment));
            prop_assert_eq!(*objective, model.objective_value(assignment));
        }
        for _ in 0..2 {
            let again = solve(&model).unwrap();
            prop_assert_eq!(again.assignment(), first.assignment());
        }
    }
}
