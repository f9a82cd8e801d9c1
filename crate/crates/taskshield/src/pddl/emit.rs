use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write;

use taskshield_core::{FluentSet, PlanningTask};

pub const DOMAIN_NAME: &str = "grounded";
pub const PROBLEM_NAME: &str = "grounded-problem";

const RESERVED: [&str; 10] = [
    "and", "not", "or", "either", "forall", "exists", "when", "imply", "define", "object",
];

fn is_identifier(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_lowercase())
        && s.chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-' || c == '_')
        && !RESERVED.contains(&s)
}

/// `p` or `p(a b)` with PDDL-safe identifiers.
fn split_atom(name: &str) -> Option<(&str, Vec<&str>)> {
    match name.split_once('(') {
        None => is_identifier(name).then_some((name, Vec::new())),
        Some((pred, rest)) => {
            let inner = rest.strip_suffix(')')?;
            let args: Vec<&str> = inner.split(' ').collect();
            let ok =
                is_identifier(pred) && !inner.is_empty() && args.iter().all(|a| is_identifier(a));
            ok.then_some((pred, args))
        }
    }
}

/// Lowercase `[a-z0-9_-]`, starting with a letter, not reserved.
fn sanitize(raw: &str, fallback_prefix: &str) -> String {
    let mut out = String::new();
    for c in raw.chars().flat_map(char::to_lowercase) {
        let c = if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-' {
            c
        } else {
            '_'
        };
        if c == '_' && out.ends_with('_') {
            continue;
        }
        out.push(c);
    }
    let trimmed = out.trim_end_matches(['_', '-']).to_string();
    if is_identifier(&trimmed) {
        trimmed
    } else {
        format!("{fallback_prefix}_{trimmed}")
    }
}

fn unique(base: String, taken: &mut HashSet<String>) -> String {
    if taken.insert(base.clone()) {
        return base;
    }
    (2..)
        .map(|k| format!("{base}_{k}"))
        .find(|candidate| taken.insert(candidate.clone()))
        .expect("unbounded suffixes")
}

/// How the task's fluents and actions are spelled in PDDL.
struct Naming {
    /// Per fluent: `(pred)` or `(pred a b)`.
    atoms: Vec<String>,
    /// Predicate name and arity in first-use order.
    predicates: Vec<(String, usize)>,
    constants: BTreeSet<String>,
    actions: Vec<String>,
}

impl Naming {
    /// Fluent names of the form `p` or `p(a b)` map to the atom `(p a b)`.
    /// Other names, and predicates used with more than one arity, become
    /// sanitized nullary predicates.
    fn new(task: &PlanningTask) -> Self {
        let parsed: Vec<Option<(&str, Vec<&str>)>> =
            task.fluents.iter().map(|f| split_atom(&f.name)).collect();
        let mut arity: HashMap<&str, Option<usize>> = HashMap::new();
        for (pred, args) in parsed.iter().flatten() {
            let entry = arity.entry(pred).or_insert(Some(args.len()));
            if *entry != Some(args.len()) {
                *entry = None;
            }
        }
        let mut taken: HashSet<String> = arity
            .iter()
            .filter(|(_, a)| a.is_some())
            .map(|(p, _)| p.to_string())
            .collect();
        let mut atoms = Vec::with_capacity(task.fluents.len());
        let mut predicates: Vec<(String, usize)> = Vec::new();
        let mut declared: HashSet<String> = HashSet::new();
        let mut constants = BTreeSet::new();
        for (f, parsed) in task.fluents.iter().zip(&parsed) {
            let (pred, args) = match parsed {
                Some((pred, args)) if arity[pred].is_some() => (pred.to_string(), args.clone()),
                _ => (unique(sanitize(&f.name, "f"), &mut taken), Vec::new()),
            };
            if declared.insert(pred.clone()) {
                predicates.push((pred.clone(), args.len()));
            }
            constants.extend(args.iter().map(|a| a.to_string()));
            atoms.push(if args.is_empty() {
                format!("({pred})")
            } else {
                format!("({pred} {})", args.join(" "))
            });
        }
        let mut action_names = HashSet::new();
        let actions = task
            .actions
            .iter()
            .map(|a| unique(sanitize(&a.name, "a"), &mut action_names))
            .collect();
        Naming {
            atoms,
            predicates,
            constants,
            actions,
        }
    }

    fn conjunction(&self, set: &FluentSet) -> String {
        let mut out = String::from("(and");
        for f in set.iter() {
            out.push(' ');
            out.push_str(&self.atoms[f]);
        }
        out.push(')');
        out
    }
}

/// A domain with one parameterless action per ground action. Objects
/// become constants. Non-nullary fluents that no action, initial fact or
/// goal mentions cannot be expressed and are lost when re-grounding.
pub fn emit_grounded_domain(task: &PlanningTask) -> String {
    let naming = Naming::new(task);
    let mut out = format!("(define (domain {DOMAIN_NAME})\n  (:requirements :strips)\n");
    if !naming.constants.is_empty() {
        out.push_str("  (:constants");
        for c in &naming.constants {
            out.push(' ');
            out.push_str(c);
        }
        out.push_str(")\n");
    }
    out.push_str("  (:predicates");
    for (pred, arity) in &naming.predicates {
        out.push_str(" (");
        out.push_str(pred);
        for i in 0..*arity {
            let _ = write!(out, " ?a{i}");
        }
        out.push(')');
    }
    out.push_str(")\n");
    for (a, name) in task.actions.iter().zip(&naming.actions) {
        let _ = write!(
            out,
            "  (:action {name}\n    :parameters ()\n    :precondition {}\n    :effect (and",
            naming.conjunction(&a.pre)
        );
        for f in a.add.iter() {
            let _ = write!(out, " {}", naming.atoms[f]);
        }
        for f in a.del.iter() {
            let _ = write!(out, " (not {})", naming.atoms[f]);
        }
        out.push_str("))\n");
    }
    out.push_str(")\n");
    out
}

pub fn emit_grounded_problem(task: &PlanningTask) -> String {
    let naming = Naming::new(task);
    let mut out = format!("(define (problem {PROBLEM_NAME})\n  (:domain {DOMAIN_NAME})\n  (:init");
    for f in task.init.iter() {
        out.push(' ');
        out.push_str(&naming.atoms[f]);
    }
    let _ = write!(out, ")\n  (:goal {}))\n", naming.conjunction(&task.goal));
    out
}

/// The PDDL name each action receives in [`emit_grounded_domain`].
pub fn emitted_action_names(task: &PlanningTask) -> Vec<String> {
    Naming::new(task).actions
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atom_splitting() {
        assert_eq!(split_atom("at(n0 n1)"), Some(("at", vec!["n0", "n1"])));
        assert_eq!(split_atom("safe_client"), Some(("safe_client", vec![])));
        assert_eq!(split_atom("At(x)"), None);
        assert_eq!(split_atom("p()"), None);
        assert_eq!(split_atom("and"), None);
    }

    #[test]
    fn sanitizing() {
        assert_eq!(sanitize("move(n0 n1)", "a"), "move_n0_n1");
        assert_eq!(sanitize("9lives", "a"), "a_9lives");
        assert_eq!(sanitize("Not", "f"), "f_not");
    }
}
