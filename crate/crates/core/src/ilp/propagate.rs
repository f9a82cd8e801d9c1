//! Interval propagation over `≤`-normalized rows with an undo trail.
//!
//! Every constraint becomes one or two rows `Σ c·x ≤ rhs`. A row tracks the
//! smallest activity compatible with the current partial assignment; when
//! that exceeds `rhs` the assignment is infeasible, and any free variable
//! whose unfavourable value alone would exceed the remaining slack is fixed
//! to its other value. Each propagated fixing remembers the row that forced
//! it so conflicts can be traced back to the assumptions that caused them.

use alloc::vec;
use alloc::vec::Vec;

use super::model::{IlpModel, Relation, VarId};
use crate::budget::{Interrupt, POLL_INTERVAL};

const FREE: i8 = -1;
const NO_REASON: u32 = u32::MAX;

struct Row {
    terms: Vec<(i64, VarId)>,
    rhs: i64,
    max_abs: i64,
}

#[derive(Clone, Copy, Debug)]
enum Conflict {
    /// A row whose minimal activity exceeds its bound.
    Row(u32),
    /// An assumption contradicting a value already implied for that variable.
    Assumption(VarId),
}

/// Why a search stopped before finishing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Halt {
    Interrupted,
    NodeLimit,
}

pub(crate) struct Engine {
    rows: Vec<Row>,
    occurs: Vec<Vec<(u32, i64)>>,
    value: Vec<i8>,
    reason: Vec<u32>,
    trail_pos: Vec<u32>,
    min_act: Vec<i64>,
    trail: Vec<VarId>,
    queue: Vec<u32>,
    queued: Vec<bool>,
    conflict: Option<Conflict>,
    root_len: usize,
    root_ok: bool,
    pub(crate) nodes: u64,
    pub(crate) node_limit: Option<u64>,
}

/// Increase in a row's minimal activity when a variable with coefficient
/// `c` is fixed to `val`.
fn delta(c: i64, val: bool) -> i64 {
    if val {
        c.max(0)
    } else {
        (-c).max(0)
    }
}

impl Engine {
    pub(crate) fn new(model: &IlpModel) -> Self {
        let n = model.vars.len();
        let mut rows = Vec::new();
        for c in &model.constraints {
            let le = |terms: &[(i64, VarId)], rhs| Row {
                terms: terms.to_vec(),
                rhs,
                max_abs: terms.iter().map(|(c, _)| c.abs()).max().unwrap_or(0),
            };
            let neg: Vec<_> = c.terms.iter().map(|&(k, v)| (-k, v)).collect();
            match c.relation {
                Relation::Le => rows.push(le(&c.terms, c.bound)),
                Relation::Ge => rows.push(le(&neg, -c.bound)),
                Relation::Eq => {
                    rows.push(le(&c.terms, c.bound));
                    rows.push(le(&neg, -c.bound));
                }
            }
        }
        let mut occurs = vec![Vec::new(); n];
        let mut min_act = Vec::with_capacity(rows.len());
        for (r, row) in rows.iter().enumerate() {
            min_act.push(row.terms.iter().map(|(c, _)| (*c).min(0)).sum());
            for &(c, v) in &row.terms {
                occurs[v].push((r as u32, c));
            }
        }
        let num_rows = rows.len();
        let mut engine = Engine {
            rows,
            occurs,
            value: vec![FREE; n],
            reason: vec![NO_REASON; n],
            trail_pos: vec![0; n],
            min_act,
            trail: Vec::new(),
            queue: (0..num_rows as u32).collect(),
            queued: vec![true; num_rows],
            conflict: None,
            root_len: 0,
            root_ok: true,
            nodes: 0,
            node_limit: None,
        };
        engine.root_ok = engine.propagate();
        engine.root_len = engine.trail.len();
        engine
    }

    /// False when propagation alone refutes the model.
    pub(crate) fn root_feasible(&self) -> bool {
        self.root_ok
    }

    pub(crate) fn value(&self, v: VarId) -> Option<bool> {
        match self.value[v] {
            FREE => None,
            x => Some(x == 1),
        }
    }

    pub(crate) fn is_root_fixed(&self, v: VarId) -> bool {
        self.value[v] != FREE && (self.trail_pos[v] as usize) < self.root_len
    }

    pub(crate) fn trail_len(&self) -> usize {
        self.trail.len()
    }

    fn assign(&mut self, v: VarId, val: bool, reason: u32) {
        self.value[v] = val as i8;
        self.reason[v] = reason;
        self.trail_pos[v] = self.trail.len() as u32;
        self.trail.push(v);
        for k in 0..self.occurs[v].len() {
            let (r, c) = self.occurs[v][k];
            let d = delta(c, val);
            if d != 0 {
                self.min_act[r as usize] += d;
                if !self.queued[r as usize] {
                    self.queued[r as usize] = true;
                    self.queue.push(r);
                }
            }
        }
    }

    fn propagate(&mut self) -> bool {
        while let Some(r) = self.queue.pop() {
            let ri = r as usize;
            self.queued[ri] = false;
            let slack = self.rows[ri].rhs - self.min_act[ri];
            if slack < 0 {
                self.conflict = Some(Conflict::Row(r));
                for q in self.queue.drain(..) {
                    self.queued[q as usize] = false;
                }
                return false;
            }
            if self.rows[ri].max_abs <= slack {
                continue;
            }
            for k in 0..self.rows[ri].terms.len() {
                let (c, v) = self.rows[ri].terms[k];
                if self.value[v] == FREE && c.abs() > slack {
                    self.assign(v, c < 0, r);
                }
            }
        }
        true
    }

    /// Fixes `v` and propagates. Returns false on conflict, leaving the
    /// partial assignment in place for [`Engine::explain`].
    pub(crate) fn fix(&mut self, v: VarId, val: bool) -> bool {
        self.conflict = None;
        match self.value(v) {
            Some(current) => {
                if current != val {
                    self.conflict = Some(Conflict::Assumption(v));
                    return false;
                }
                true
            }
            None => {
                self.assign(v, val, NO_REASON);
                self.propagate()
            }
        }
    }

    pub(crate) fn backtrack(&mut self, len: usize) {
        let len = len.max(self.root_len);
        while self.trail.len() > len {
            let v = self.trail.pop().expect("trail longer than target");
            let val = self.value[v] == 1;
            for k in 0..self.occurs[v].len() {
                let (r, c) = self.occurs[v][k];
                self.min_act[r as usize] -= delta(c, val);
            }
            self.value[v] = FREE;
            self.reason[v] = NO_REASON;
        }
        self.conflict = None;
    }

    pub(crate) fn reset(&mut self) {
        self.backtrack(self.root_len);
    }

    /// The assumptions (fixings made through [`Engine::fix`]) that the last
    /// propagation conflict depends on. `None` when the last failure was not
    /// a propagation conflict.
    pub(crate) fn explain(&self) -> Option<Vec<VarId>> {
        let mut seen = vec![false; self.value.len()];
        let mut assumptions = Vec::new();
        let mut stack: Vec<(u32, u32)> = Vec::new();
        match self.conflict? {
            Conflict::Row(r) => stack.push((r, u32::MAX)),
            Conflict::Assumption(v) => {
                seen[v] = true;
                assumptions.push(v);
                if self.reason[v] != NO_REASON && !self.is_root_fixed(v) {
                    stack.push((self.reason[v], self.trail_pos[v]));
                }
            }
        }
        while let Some((r, before)) = stack.pop() {
            for &(c, v) in &self.rows[r as usize].terms {
                if self.value[v] == FREE || seen[v] || self.trail_pos[v] >= before {
                    continue;
                }
                if delta(c, self.value[v] == 1) == 0 {
                    continue;
                }
                seen[v] = true;
                if (self.trail_pos[v] as usize) < self.root_len {
                    continue;
                }
                match self.reason[v] {
                    NO_REASON => assumptions.push(v),
                    reason => stack.push((reason, self.trail_pos[v])),
                }
            }
        }
        assumptions.sort_unstable();
        Some(assumptions)
    }

    fn tick(&mut self, interrupt: &dyn Interrupt) -> Result<(), Halt> {
        self.nodes += 1;
        if self.node_limit.is_some_and(|l| self.nodes > l) {
            return Err(Halt::NodeLimit);
        }
        if self.nodes.is_multiple_of(POLL_INTERVAL) && interrupt.interrupted() {
            return Err(Halt::Interrupted);
        }
        Ok(())
    }

    fn snapshot(&self) -> Vec<bool> {
        self.value.iter().map(|&x| x == 1).collect()
    }

    /// Depth-first search for a completion of the current partial
    /// assignment. Variables are branched in index order; `prefer_one`
    /// picks which value is tried first. Subtrees whose failure does not
    /// depend on the latest decision are skipped. On failure, the result
    /// names the assumptions made before the call that the refutation rests
    /// on. The engine is restored to its entry state before returning.
    pub(crate) fn complete(
        &mut self,
        prefer_one: &dyn Fn(VarId) -> bool,
        interrupt: &dyn Interrupt,
    ) -> Result<Completion, Halt> {
        struct Decision {
            var: VarId,
            first: bool,
            flipped: bool,
            mark: usize,
            /// Explanation of the failed first branch, without `var`.
            failed: Vec<VarId>,
        }
        let base = self.trail.len();
        let n = self.value.len();
        let mut decisions: Vec<Decision> = Vec::new();
        let mut cursor = 0;
        loop {
            while cursor < n && self.value[cursor] != FREE {
                cursor += 1;
            }
            if cursor == n {
                let solution = self.snapshot();
                self.backtrack(base);
                return Ok(Completion::Found(solution));
            }
            if let Err(halt) = self.tick(interrupt) {
                self.backtrack(base);
                return Err(halt);
            }
            let var = cursor;
            let first = prefer_one(var);
            let mark = self.trail.len();
            decisions.push(Decision {
                var,
                first,
                flipped: false,
                mark,
                failed: Vec::new(),
            });
            if self.fix(var, first) {
                cursor = var + 1;
                continue;
            }
            let mut reason = self.explain().unwrap_or_default();
            loop {
                let Some(top) = decisions.last_mut() else {
                    self.backtrack(base);
                    return Ok(Completion::Refuted(reason));
                };
                let (var, mark) = (top.var, top.mark);
                self.backtrack(mark);
                let Ok(at) = reason.binary_search(&var) else {
                    decisions.pop();
                    continue;
                };
                reason.remove(at);
                if top.flipped {
                    let failed = core::mem::take(&mut top.failed);
                    reason = merge(&reason, &failed);
                    decisions.pop();
                    continue;
                }
                top.flipped = true;
                top.failed = reason;
                let val = !top.first;
                if let Err(halt) = self.tick(interrupt) {
                    self.backtrack(base);
                    return Err(halt);
                }
                if self.fix(var, val) {
                    cursor = var + 1;
                    break;
                }
                reason = self.explain().unwrap_or_default();
            }
        }
    }
}

/// Outcome of [`Engine::complete`].
pub(crate) enum Completion {
    Found(Vec<bool>),
    /// No completion exists; sorted assumptions responsible.
    Refuted(Vec<VarId>),
}

fn merge(a: &[VarId], b: &[VarId]) -> Vec<VarId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    out.sort_unstable();
    out.dedup();
    out
}
