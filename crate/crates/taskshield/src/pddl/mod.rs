//! A STRIPS subset of PDDL: typed objects, positive conjunctive
//! preconditions and goals, add and delete effects, and static equality.

mod ast;
mod emit;
mod ground;
mod sexpr;

use thiserror::Error;

pub use ast::{
    parse_domain, parse_problem, ActionSchema, Atom, DomainAst, Equality, PredicateDecl,
    ProblemAst, TypedName,
};
pub use emit::{
    emit_grounded_domain, emit_grounded_problem, emitted_action_names, DOMAIN_NAME, PROBLEM_NAME,
};
pub use ground::{ground, Grounded, DEFAULT_GROUND_ACTION_CAP};
pub use sexpr::Pos;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum PddlError {
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: unsupported feature: {construct}")]
    Unsupported {
        construct: String,
        line: usize,
        col: usize,
    },
    #[error("variable {variable} of action {action} is not a parameter")]
    UnboundVariable { variable: String, action: String },
    #[error("problem is for domain {found}, not {expected}")]
    DomainMismatch { expected: String, found: String },
    #[error("unknown type {0}")]
    UnknownType(String),
    #[error("unknown predicate {0}")]
    UnknownPredicate(String),
    #[error("unknown object {0}")]
    UnknownObject(String),
    #[error("duplicate {0}")]
    Duplicate(String),
    #[error("predicate {predicate} takes {expected} arguments, found {found}")]
    Arity {
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("object {object} has type {found}, expected {expected}")]
    TypeMismatch {
        object: String,
        expected: String,
        found: String,
    },
    #[error("more than {cap} ground actions")]
    GroundLimit { cap: usize },
}

/// Parses and grounds a domain/problem pair.
pub fn load(domain: &str, problem: &str, cap: usize) -> Result<Grounded, PddlError> {
    ground(&parse_domain(domain)?, &parse_problem(problem)?, cap)
}
