use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use super::hitting::{self, HittingOutcome, HittingSetProblem};
use super::model::{IlpModel, ModelError, VarId};
use super::propagate::{Completion, Engine, Halt};
use crate::budget::Interrupt;
use crate::NoClock;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Branching nodes over every depth-first search run.
    pub nodes: u64,
    /// Cores collected by the core-guided solver.
    pub cores: usize,
    /// Hitting-set rounds of the core-guided solver.
    pub iterations: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Optimal {
        assignment: Vec<bool>,
        objective: i64,
        stats: SolveStats,
    },
    Infeasible {
        stats: SolveStats,
    },
}

impl SolveResult {
    pub fn stats(&self) -> SolveStats {
        match self {
            SolveResult::Optimal { stats, .. } | SolveResult::Infeasible { stats } => *stats,
        }
    }

    pub fn objective(&self) -> Option<i64> {
        match self {
            SolveResult::Optimal { objective, .. } => Some(*objective),
            SolveResult::Infeasible { .. } => None,
        }
    }

    pub fn assignment(&self) -> Option<&[bool]> {
        match self {
            SolveResult::Optimal { assignment, .. } => Some(assignment),
            SolveResult::Infeasible { .. } => None,
        }
    }
}

/// Best feasible assignment seen before a search was cut short. Not
/// necessarily optimal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Incumbent {
    pub assignment: Vec<bool>,
    pub objective: i64,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("invalid model: {0}")]
    InvalidModel(#[from] ModelError),
    #[error("solver interrupted before proving optimality")]
    Interrupted {
        incumbent: Option<Incumbent>,
        stats: SolveStats,
    },
    #[error("solver node limit reached before proving optimality")]
    NodeLimit {
        incumbent: Option<Incumbent>,
        stats: SolveStats,
    },
}

impl SolveError {
    pub fn incumbent(&self) -> Option<&Incumbent> {
        match self {
            SolveError::InvalidModel(_) => None,
            SolveError::Interrupted { incumbent, .. } | SolveError::NodeLimit { incumbent, .. } => {
                incumbent.as_ref()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolverLimits {
    pub node_limit: Option<u64>,
}

/// An exact 0-1 solver. Implementations must return the optimum that is
/// lexicographically smallest in variable order (0 before 1), so every
/// backend reports the same assignment for the same model.
pub trait BinarySolver {
    fn solve(&self, model: &IlpModel, interrupt: &dyn Interrupt)
        -> Result<SolveResult, SolveError>;
}

/// Solves with [`CoreGuidedSolver`] and no limits.
pub fn solve(model: &IlpModel) -> Result<SolveResult, SolveError> {
    CoreGuidedSolver::default().solve(model, &NoClock)
}

/// Core-guided exact solver.
///
/// The optimum is bracketed by alternating two steps: a minimum-cost
/// hitting set over the cores found so far gives a lower bound and a
/// candidate support; a propagation-driven search then either completes the
/// candidate (proving optimality) or fails, and the failure is traced back
/// to a new core. A final pass walks the variables in index order and keeps
/// each at 0 whenever an optimum still exists with that choice, which yields
/// the lexicographically smallest optimal assignment.
#[derive(Clone, Copy, Debug, Default)]
pub struct CoreGuidedSolver {
    pub limits: SolverLimits,
}

/// Depth-first branch-and-bound in variable order, trying 0 before 1,
/// pruning with the objective of the variables fixed so far. Exact but only
/// practical for small models.
#[derive(Clone, Copy, Debug, Default)]
pub struct BranchAndBound {
    pub limits: SolverLimits,
}

enum Check {
    Feasible(Vec<bool>),
    Infeasible(Vec<VarId>),
}

struct CoreGuided<'a> {
    model: &'a IlpModel,
    engine: Engine,
    cost: Vec<i64>,
    is_obj: Vec<bool>,
    obj_vars: Vec<VarId>,
    cores: Vec<Vec<VarId>>,
    incumbent: Option<Incumbent>,
    iterations: u64,
    interrupt: &'a dyn Interrupt,
}

impl<'a> CoreGuided<'a> {
    fn stats(&self) -> SolveStats {
        SolveStats {
            nodes: self.engine.nodes,
            cores: self.cores.len(),
            iterations: self.iterations,
        }
    }

    fn objective(&self, x: &[bool]) -> i64 {
        self.model.objective_value(x)
    }

    fn offer(&mut self, x: &[bool]) {
        let objective = self.objective(x);
        if self
            .incumbent
            .as_ref()
            .is_none_or(|i| objective < i.objective)
        {
            self.incumbent = Some(Incumbent {
                assignment: x.to_vec(),
                objective,
            });
        }
    }

    /// Resets the engine and applies `fixings` then `zeros`. On conflict,
    /// returns the responsible assumptions.
    fn assume(&mut self, fixings: &[Option<bool>], zeros: &[VarId]) -> Result<(), Vec<VarId>> {
        self.engine.reset();
        let mut ok = true;
        for (v, f) in fixings.iter().enumerate() {
            if let Some(b) = *f {
                if !self.engine.fix(v, b) {
                    ok = false;
                    break;
                }
            }
        }
        ok = ok && zeros.iter().all(|&z| self.engine.fix(z, false));
        if ok {
            Ok(())
        } else {
            let reason = self.engine.explain().unwrap_or_default();
            self.engine.reset();
            Err(reason)
        }
    }

    /// Searches for a solution respecting `fixings` with `zeros` at 0.
    /// Free objective variables are tried at 1 first. A refutation lists
    /// the fixings and zeros it depends on.
    fn check(&mut self, fixings: &[Option<bool>], zeros: &[VarId]) -> Result<Check, Halt> {
        if let Err(reason) = self.assume(fixings, zeros) {
            return Ok(Check::Infeasible(reason));
        }
        let is_obj = &self.is_obj;
        let found = self.engine.complete(&|v| is_obj[v], self.interrupt)?;
        self.engine.reset();
        Ok(match found {
            Completion::Found(x) => {
                self.offer(&x);
                Check::Feasible(x)
            }
            Completion::Refuted(reason) => Check::Infeasible(reason),
        })
    }

    /// Minimum objective under `fixings`, if any solution costs at most
    /// `ceiling`.
    fn optimize(
        &mut self,
        fixings: &[Option<bool>],
        ceiling: Option<i64>,
    ) -> Result<Option<(Vec<bool>, i64)>, Halt> {
        let forced: Vec<VarId> = self
            .obj_vars
            .iter()
            .copied()
            .filter(|&v| fixings[v] == Some(true))
            .collect();
        loop {
            self.iterations += 1;
            if self.interrupt.interrupted() {
                return Err(Halt::Interrupted);
            }
            let excluded = |v: VarId| fixings[v] == Some(false);
            let problem = HittingSetProblem {
                cores: &self.cores,
                cost: &self.cost,
                forced: &forced,
                excluded: &excluded,
                ceiling,
            };
            let (set, bound) = match hitting::solve(&problem, self.interrupt)? {
                HittingOutcome::Found { set, cost } => (set, cost),
                HittingOutcome::None => return Ok(None),
            };
            let zeros: Vec<VarId> = self
                .obj_vars
                .iter()
                .copied()
                .filter(|&v| fixings[v].is_none() && set.binary_search(&v).is_err())
                .collect();
            match self.check(fixings, &zeros)? {
                Check::Feasible(x) => {
                    let z = self.objective(&x);
                    debug_assert_eq!(z, bound);
                    return Ok(Some((x, z)));
                }
                Check::Infeasible(reason) => {
                    // The refutation only involves fixings and zeros; its
                    // zeros form a core.
                    let core: Vec<VarId> = reason
                        .into_iter()
                        .filter(|&v| fixings[v].is_none() && self.is_obj[v])
                        .collect();
                    if core.is_empty() {
                        return Ok(None);
                    }
                    self.cores.push(core);
                }
            }
        }
    }

    fn run(&mut self) -> Result<Option<(Vec<bool>, i64)>, Halt> {
        let n = self.model.num_vars();
        let free = vec![None; n];
        // Any feasible point at all; also settles infeasibility.
        if let Check::Infeasible(_) = self.check(&free, &[])? {
            return Ok(None);
        }
        let Some((mut x, z)) = self.optimize(&free, None)? else {
            return Ok(None);
        };

        let mut fixings: Vec<Option<bool>> = vec![None; n];
        let mut remaining = self.obj_vars.len();
        for v in 0..n {
            if remaining == 0 {
                break;
            }
            if self.is_obj[v] {
                remaining -= 1;
            }
            fixings[v] = Some(false);
            if !x[v] {
                continue;
            }
            let mark = self.cores.len();
            let mut found = None;
            if !self.is_obj[v] || self.cost[v] == 0 {
                let zeros: Vec<VarId> = self
                    .obj_vars
                    .iter()
                    .copied()
                    .filter(|&u| fixings[u].is_none() && !x[u])
                    .collect();
                if let Check::Feasible(y) = self.check(&fixings, &zeros)? {
                    found = Some(y);
                }
            }
            if found.is_none() {
                found = self.optimize(&fixings, Some(z))?.map(|(y, _)| y);
            }
            match found {
                Some(y) => x = y,
                None => {
                    self.cores.truncate(mark);
                    fixings[v] = Some(true);
                }
            }
        }
        // Every objective variable is settled; the smallest completion of the
        // remaining variables is the first one found trying 0 first.
        if self.assume(&fixings, &[]).is_err() {
            unreachable!("fixings agree with a feasible assignment");
        }
        let Completion::Found(last) = self.engine.complete(&|_| false, self.interrupt)? else {
            unreachable!("fixings agree with a feasible assignment");
        };
        self.engine.reset();
        debug_assert_eq!(self.objective(&last), z);
        Ok(Some((last, z)))
    }
}

impl BinarySolver for CoreGuidedSolver {
    fn solve(
        &self,
        model: &IlpModel,
        interrupt: &dyn Interrupt,
    ) -> Result<SolveResult, SolveError> {
        model.validate()?;
        let mut engine = Engine::new(model);
        engine.node_limit = self.limits.node_limit;
        if !engine.root_feasible() {
            return Ok(SolveResult::Infeasible {
                stats: SolveStats::default(),
            });
        }
        let cost = model.objective_costs();
        let is_obj: Vec<bool> = cost.iter().map(|&c| c > 0).collect();
        let obj_vars = (0..model.num_vars()).filter(|&v| is_obj[v]).collect();
        let mut state = CoreGuided {
            model,
            engine,
            cost,
            is_obj,
            obj_vars,
            cores: Vec::new(),
            incumbent: None,
            iterations: 0,
            interrupt,
        };
        match state.run() {
            Ok(Some((assignment, objective))) => Ok(SolveResult::Optimal {
                assignment,
                objective,
                stats: state.stats(),
            }),
            Ok(None) => Ok(SolveResult::Infeasible {
                stats: state.stats(),
            }),
            Err(halt) => Err(halt_error(halt, state.incumbent.take(), state.stats())),
        }
    }
}

fn halt_error(halt: Halt, incumbent: Option<Incumbent>, stats: SolveStats) -> SolveError {
    match halt {
        Halt::Interrupted => SolveError::Interrupted { incumbent, stats },
        Halt::NodeLimit => SolveError::NodeLimit { incumbent, stats },
    }
}

impl BinarySolver for BranchAndBound {
    fn solve(
        &self,
        model: &IlpModel,
        interrupt: &dyn Interrupt,
    ) -> Result<SolveResult, SolveError> {
        model.validate()?;
        let mut engine = Engine::new(model);
        engine.node_limit = self.limits.node_limit;
        let stats = |e: &Engine| SolveStats {
            nodes: e.nodes,
            ..SolveStats::default()
        };
        if !engine.root_feasible() {
            return Ok(SolveResult::Infeasible {
                stats: SolveStats::default(),
            });
        }
        let cost = model.objective_costs();
        let obj_vars: Vec<VarId> = (0..model.num_vars()).filter(|&v| cost[v] > 0).collect();
        let n = model.num_vars();
        let mut best: Option<Incumbent> = None;

        let fixed_cost = |e: &Engine| -> i64 {
            obj_vars
                .iter()
                .filter(|&&v| e.value(v) == Some(true))
                .map(|&v| cost[v])
                .sum()
        };

        // (var, flipped, trail mark)
        let mut decisions: Vec<(VarId, bool, usize)> = Vec::new();
        let mut cursor = 0;
        loop {
            // Descend until a leaf, a conflict, or a bound prune.
            let mut dead = best
                .as_ref()
                .is_some_and(|b| fixed_cost(&engine) >= b.objective);
            if !dead {
                while cursor < n && engine.value(cursor).is_some() {
                    cursor += 1;
                }
                if cursor == n {
                    let x: Vec<bool> = (0..n).map(|v| engine.value(v) == Some(true)).collect();
                    let objective = model.objective_value(&x);
                    best = Some(Incumbent {
                        assignment: x,
                        objective,
                    });
                    dead = true;
                } else {
                    engine.nodes += 1;
                    if self.limits.node_limit.is_some_and(|l| engine.nodes > l) {
                        return Err(halt_error(Halt::NodeLimit, best, stats(&engine)));
                    }
                    if engine.nodes.is_multiple_of(256) && interrupt.interrupted() {
                        return Err(halt_error(Halt::Interrupted, best, stats(&engine)));
                    }
                    let var = cursor;
                    let mark = engine.trail_len();
                    decisions.push((var, false, mark));
                    if engine.fix(var, false) {
                        cursor = var + 1;
                        continue;
                    }
                    dead = true;
                }
            }
            debug_assert!(dead);
            loop {
                let Some(top) = decisions.last_mut() else {
                    let s = stats(&engine);
                    return Ok(match best {
                        Some(b) => SolveResult::Optimal {
                            assignment: b.assignment,
                            objective: b.objective,
                            stats: s,
                        },
                        None => SolveResult::Infeasible { stats: s },
                    });
                };
                let (var, mark) = (top.0, top.2);
                engine.backtrack(mark);
                if !top.1 {
                    top.1 = true;
                    if engine.fix(var, true) {
                        cursor = var + 1;
                        break;
                    }
                    continue;
                }
                decisions.pop();
            }
        }
    }
}
