//! The JSON task format.
//!
//! ```json
//! {
//!   "fluents": ["p", "q"],
//!   "actions": [{"name": "a", "pre": [0], "add": [1], "del": [0], "cost": 1.0}],
//!   "init": [0],
//!   "goal": [1]
//! }
//! ```
//!
//! Fluent references are indices into `"fluents"`.

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use taskshield_core::strips::validate_task;
use taskshield_core::{Fluent, FluentSet, GroundAction, PlanningTask};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum TaskJsonError {
    #[error("invalid JSON at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    /// `pointer` is a JSON pointer to the offending value.
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
}

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> TaskJsonError {
    TaskJsonError::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, at: &str, key: &str) -> Result<&'a Value, TaskJsonError> {
    obj.get(key)
        .ok_or_else(|| schema(format!("{at}/{key}"), "missing key"))
}

fn object<'a>(v: &'a Value, at: &str) -> Result<&'a Map<String, Value>, TaskJsonError> {
    v.as_object()
        .ok_or_else(|| schema(at, "expected an object"))
}

fn array<'a>(v: &'a Value, at: &str) -> Result<&'a Vec<Value>, TaskJsonError> {
    v.as_array().ok_or_else(|| schema(at, "expected an array"))
}

fn string<'a>(v: &'a Value, at: &str) -> Result<&'a str, TaskJsonError> {
    v.as_str().ok_or_else(|| schema(at, "expected a string"))
}

fn fluent_set(v: &Value, at: &str, universe: usize) -> Result<FluentSet, TaskJsonError> {
    let mut set = FluentSet::with_universe(universe);
    for (i, item) in array(v, at)?.iter().enumerate() {
        let id = item
            .as_u64()
            .ok_or_else(|| schema(format!("{at}/{i}"), "expected a fluent index"))?;
        let id = usize::try_from(id)
            .ok()
            .filter(|&id| id < universe)
            .ok_or_else(|| {
                schema(
                    format!("{at}/{i}"),
                    format!("fluent index {id} out of range"),
                )
            })?;
        set.insert(id);
    }
    Ok(set)
}

fn parse_action(v: &Value, at: &str, universe: usize) -> Result<GroundAction, TaskJsonError> {
    let obj = object(v, at)?;
    let name = string(field(obj, at, "name")?, &format!("{at}/name"))?;
    let set = |key: &str| fluent_set(field(obj, at, key)?, &format!("{at}/{key}"), universe);
    let (pre, add, del) = (set("pre")?, set("add")?, set("del")?);
    let cost = match obj.get("cost") {
        None => 1.0,
        Some(c) => c
            .as_f64()
            .ok_or_else(|| schema(format!("{at}/cost"), "expected a number"))?,
    };
    GroundAction::new(name, pre, add, del, cost).map_err(|e| schema(at, e.to_string()))
}

/// Reads a task and checks it with [`validate_task`].
pub fn parse_task_json(text: &str) -> Result<PlanningTask, TaskJsonError> {
    let root: Value = serde_json::from_str(text).map_err(|e| TaskJsonError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj = object(&root, "")?;
    let fluents = array(field(obj, "", "fluents")?, "/fluents")?
        .iter()
        .enumerate()
        .map(|(id, v)| {
            Ok(Fluent {
                id,
                name: string(v, &format!("/fluents/{id}"))?.to_string(),
            })
        })
        .collect::<Result<Vec<_>, TaskJsonError>>()?;
    let n = fluents.len();
    let actions = array(field(obj, "", "actions")?, "/actions")?
        .iter()
        .enumerate()
        .map(|(i, v)| parse_action(v, &format!("/actions/{i}"), n))
        .collect::<Result<Vec<_>, _>>()?;
    let init = fluent_set(field(obj, "", "init")?, "/init", n)?;
    let goal = fluent_set(field(obj, "", "goal")?, "/goal", n)?;
    let task = PlanningTask {
        fluents,
        actions,
        init,
        goal,
    };
    if let Some(v) = validate_task(&task).into_iter().next() {
        return Err(schema("", v));
    }
    Ok(task)
}

#[derive(Serialize)]
struct TaskOut<'a> {
    fluents: Vec<&'a str>,
    actions: Vec<ActionOut<'a>>,
    init: Vec<usize>,
    goal: Vec<usize>,
}

#[derive(Serialize)]
struct ActionOut<'a> {
    name: &'a str,
    pre: Vec<usize>,
    add: Vec<usize>,
    del: Vec<usize>,
    cost: f64,
}

/// Pretty-printed, with every fluent list in ascending order.
pub fn emit_task_json(task: &PlanningTask) -> String {
    let out = TaskOut {
        fluents: task.fluents.iter().map(|f| f.name.as_str()).collect(),
        actions: task
            .actions
            .iter()
            .map(|a| ActionOut {
                name: &a.name,
                pre: a.pre.to_vec(),
                add: a.add.to_vec(),
                del: a.del.to_vec(),
                cost: a.cost,
            })
            .collect(),
        init: task.init.to_vec(),
        goal: task.goal.to_vec(),
    };
    let mut text = serde_json::to_string_pretty(&out).expect("task serializes");
    text.push('\n');
    text
}
