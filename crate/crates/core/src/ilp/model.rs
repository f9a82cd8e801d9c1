use alloc::string::String;
use alloc::vec::Vec;

use hashbrown::HashSet;
use thiserror::Error;

pub type VarId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinVar {
    pub index: VarId,
    pub name: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

/// `Σ coefficient·x relation bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearConstraint {
    pub name: String,
    pub terms: Vec<(i64, VarId)>,
    pub relation: Relation,
    pub bound: i64,
}

impl LinearConstraint {
    pub fn activity(&self, assignment: &[bool]) -> i64 {
        self.terms
            .iter()
            .filter(|(_, v)| assignment[*v])
            .map(|(c, _)| *c)
            .sum()
    }

    pub fn is_satisfied(&self, assignment: &[bool]) -> bool {
        let lhs = self.activity(assignment);
        match self.relation {
            Relation::Le => lhs <= self.bound,
            Relation::Ge => lhs >= self.bound,
            Relation::Eq => lhs == self.bound,
        }
    }
}

/// A pure 0-1 program: minimize a non-negative objective subject to
/// integer linear constraints.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IlpModel {
    pub vars: Vec<BinVar>,
    pub constraints: Vec<LinearConstraint>,
    pub objective: Vec<(i64, VarId)>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("variable at position {position} has index {index}")]
    IndexMismatch { position: usize, index: VarId },
    #[error("duplicate variable name {0}")]
    DuplicateName(String),
    #[error("constraint {constraint} references unknown variable {var}")]
    UnknownVar { constraint: String, var: VarId },
    #[error("constraint {constraint} mentions variable {var} twice")]
    DuplicateTerm { constraint: String, var: VarId },
    #[error("objective references unknown variable {0}")]
    UnknownObjectiveVar(VarId),
    #[error("objective mentions variable {0} twice")]
    DuplicateObjectiveTerm(VarId),
    #[error("objective coefficient of variable {0} is negative")]
    NegativeObjective(VarId),
}

impl IlpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn add_var(&mut self, name: impl Into<String>) -> VarId {
        let index = self.vars.len();
        self.vars.push(BinVar {
            index,
            name: name.into(),
        });
        index
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(i64, VarId)>,
        relation: Relation,
        bound: i64,
    ) -> usize {
        self.constraints.push(LinearConstraint {
            name: name.into(),
            terms,
            relation,
            bound,
        });
        self.constraints.len() - 1
    }

    pub fn add_objective_term(&mut self, coefficient: i64, var: VarId) {
        self.objective.push((coefficient, var));
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let mut names = HashSet::new();
        for (position, v) in self.vars.iter().enumerate() {
            if v.index != position {
                return Err(ModelError::IndexMismatch {
                    position,
                    index: v.index,
                });
            }
            if !names.insert(v.name.as_str()) {
                return Err(ModelError::DuplicateName(v.name.clone()));
            }
        }
        let n = self.vars.len();
        let mut seen = HashSet::new();
        for c in &self.constraints {
            seen.clear();
            for &(_, var) in &c.terms {
                if var >= n {
                    return Err(ModelError::UnknownVar {
                        constraint: c.name.clone(),
                        var,
                    });
                }
                if !seen.insert(var) {
                    return Err(ModelError::DuplicateTerm {
                        constraint: c.name.clone(),
                        var,
                    });
                }
            }
        }
        seen.clear();
        for &(coef, var) in &self.objective {
            if var >= n {
                return Err(ModelError::UnknownObjectiveVar(var));
            }
            if !seen.insert(var) {
                return Err(ModelError::DuplicateObjectiveTerm(var));
            }
            if coef < 0 {
                return Err(ModelError::NegativeObjective(var));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, assignment: &[bool]) -> i64 {
        self.objective
            .iter()
            .filter(|(_, v)| assignment[*v])
            .map(|(c, _)| *c)
            .sum()
    }

    pub fn is_feasible(&self, assignment: &[bool]) -> bool {
        assignment.len() == self.vars.len()
            && self.constraints.iter().all(|c| c.is_satisfied(assignment))
    }

    /// Objective coefficient of every variable (zero when absent).
    pub fn objective_costs(&self) -> Vec<i64> {
        let mut costs = alloc::vec![0; self.vars.len()];
        for &(c, v) in &self.objective {
            costs[v] += c;
        }
        costs
    }
}
