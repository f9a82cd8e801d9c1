//! JSON rendering of a [`ShieldReport`].
//!
//! ```json
//! {
//!   "success": true,
//!   "verified_unsolvable": true,
//!   "enumeration_complete": true,
//!   "num_plans": 2,
//!   "plans": [["submit_application", "escalation", "direct_approval"], ...],
//!   "num_mods": 1,
//!   "modifications": [{"kind": "+pre", "action": "escalation", "fluent": "safe_client"}],
//!   "diff": ["ACTION escalation: +pre safe_client"],
//!   "solver": {"nodes": 3, "cores": 2, "iterations": 3},
//!   "model": {"vars": 83, "constraints": 201},
//!   "timings": {"enumerate_s": 0.0, "ilp_s": 0.0, "verify_s": 0.0, "total_s": 0.0},
//!   "note": null,
//!   "refinements": 0
//! }
//! ```
//!
//! `solver` is null when no model was solved.

use serde::Serialize;

use taskshield_core::{PlanningTask, ShieldReport};

#[derive(Serialize)]
struct Edit<'a> {
    kind: String,
    action: &'a str,
    fluent: &'a str,
}

#[derive(Serialize)]
struct Solver {
    nodes: u64,
    cores: usize,
    iterations: u64,
}

#[derive(Serialize)]
struct Model {
    vars: usize,
    constraints: usize,
}

#[derive(Serialize)]
struct Timings {
    enumerate_s: f64,
    ilp_s: f64,
    verify_s: f64,
    total_s: f64,
}

#[derive(Serialize)]
struct ReportOut<'a> {
    success: bool,
    verified_unsolvable: bool,
    enumeration_complete: bool,
    num_plans: usize,
    plans: Vec<Vec<&'a str>>,
    num_mods: usize,
    modifications: Vec<Edit<'a>>,
    diff: Vec<String>,
    solver: Option<Solver>,
    model: Model,
    timings: Timings,
    note: Option<&'a str>,
    refinements: usize,
}

/// `task` is the unmodified task the report was computed for.
pub fn report_json(task: &PlanningTask, report: &ShieldReport) -> String {
    let out = ReportOut {
        success: report.success,
        verified_unsolvable: report.verified_unsolvable,
        enumeration_complete: report.enumeration_complete,
        num_plans: report.plans.len(),
        plans: report.plans.plans.iter().map(|p| p.names(task)).collect(),
        num_mods: report.num_mods(),
        modifications: report
            .modifications
            .edits()
            .into_iter()
            .map(|e| Edit {
                kind: e.kind.to_string(),
                action: &task.actions[e.action].name,
                fluent: task.fluent_name(e.fluent),
            })
            .collect(),
        diff: report.modifications.diff_lines(task),
        solver: report.solver.map(|s| Solver {
            nodes: s.nodes,
            cores: s.cores,
            iterations: s.iterations,
        }),
        model: Model {
            vars: report.model_vars,
            constraints: report.model_constraints,
        },
        timings: Timings {
            enumerate_s: report.timings.enumerate_s,
            ilp_s: report.timings.ilp_s,
            verify_s: report.timings.verify_s,
            total_s: report.timings.total_s(),
        },
        note: report.note.as_deref(),
        refinements: report.refinements,
    };
    let mut text = serde_json::to_string_pretty(&out).expect("report serializes");
    text.push('\n');
    text
}

/// One `ACTION name: +pre f` line per edit.
pub fn diff_text(task: &PlanningTask, report: &ShieldReport) -> String {
    report
        .modifications
        .diff_lines(task)
        .into_iter()
        .map(|line| line + "\n")
        .collect()
}
