use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::strips::{FluentId, PlanningTask};

/// The three shrinking edits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EditKind {
    AddPrecondition,
    RemoveAdd,
    AddDelete,
}

impl fmt::Display for EditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EditKind::AddPrecondition => "+pre",
            EditKind::RemoveAdd => "-add",
            EditKind::AddDelete => "+del",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edit {
    pub kind: EditKind,
    pub action: usize,
    pub fluent: FluentId,
}

/// A set of edits to the task's actions. Its size is the quantity the
/// shielding model minimizes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ModificationSet {
    pub pre_additions: BTreeSet<(usize, FluentId)>,
    pub add_removals: BTreeSet<(usize, FluentId)>,
    pub del_additions: BTreeSet<(usize, FluentId)>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ModificationError {
    #[error("action index {action} out of range")]
    UnknownAction { action: usize },
    #[error(
        "{kind} edit on action {action_name} with fluent {fluent} is outside the allowed range"
    )]
    OutOfRange {
        kind: EditKind,
        action: usize,
        action_name: String,
        fluent: FluentId,
    },
}

impl ModificationSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cardinality(&self) -> usize {
        self.pre_additions.len() + self.add_removals.len() + self.del_additions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cardinality() == 0
    }

    pub fn insert(&mut self, edit: Edit) -> bool {
        let key = (edit.action, edit.fluent);
        match edit.kind {
            EditKind::AddPrecondition => self.pre_additions.insert(key),
            EditKind::RemoveAdd => self.add_removals.insert(key),
            EditKind::AddDelete => self.del_additions.insert(key),
        }
    }

    /// Edits ordered by action, then kind, then fluent.
    pub fn edits(&self) -> Vec<Edit> {
        let mut out: Vec<Edit> = Vec::with_capacity(self.cardinality());
        let sets = [
            (EditKind::AddPrecondition, &self.pre_additions),
            (EditKind::RemoveAdd, &self.add_removals),
            (EditKind::AddDelete, &self.del_additions),
        ];
        for (kind, set) in sets {
            out.extend(set.iter().map(|&(action, fluent)| Edit {
                kind,
                action,
                fluent,
            }));
        }
        out.sort_by_key(|e| (e.action, e.kind, e.fluent));
        out
    }

    /// One line per edit: `ACTION name: +pre f`, `-add f` or `+del f`.
    pub fn diff_lines(&self, task: &PlanningTask) -> Vec<String> {
        self.edits()
            .into_iter()
            .map(|e| {
                format!(
                    "ACTION {}: {} {}",
                    task.actions[e.action].name,
                    e.kind,
                    task.fluent_name(e.fluent)
                )
            })
            .collect()
    }
}

impl FromIterator<Edit> for ModificationSet {
    fn from_iter<I: IntoIterator<Item = Edit>>(iter: I) -> Self {
        let mut set = ModificationSet::new();
        for e in iter {
            set.insert(e);
        }
        set
    }
}

/// Whether `edit` actually shrinks its action: the precondition is new,
/// the removed add effect exists, the added delete is neither a delete nor
/// an add effect already.
pub fn edit_in_range(task: &PlanningTask, edit: &Edit) -> bool {
    let Some(a) = task.actions.get(edit.action) else {
        return false;
    };
    let f = edit.fluent;
    f < task.num_fluents()
        && match edit.kind {
            EditKind::AddPrecondition => !a.pre.contains(f),
            EditKind::RemoveAdd => a.add.contains(f),
            EditKind::AddDelete => !a.add.contains(f) && !a.del.contains(f),
        }
}

/// Every in-range edit of the given actions, in the order the shielding
/// model creates its variables.
pub fn possible_edits(task: &PlanningTask, actions: impl IntoIterator<Item = usize>) -> Vec<Edit> {
    let n = task.num_fluents();
    let mut out = Vec::new();
    for action in actions {
        for kind in [
            EditKind::AddPrecondition,
            EditKind::RemoveAdd,
            EditKind::AddDelete,
        ] {
            for fluent in 0..n {
                let e = Edit {
                    kind,
                    action,
                    fluent,
                };
                if edit_in_range(task, &e) {
                    out.push(e);
                }
            }
        }
    }
    out
}

/// The task with `mods` applied to its actions. Everything else is kept.
pub fn apply_modifications(
    task: &PlanningTask,
    mods: &ModificationSet,
) -> Result<PlanningTask, ModificationError> {
    let mut out = task.clone();
    for e in mods.edits() {
        if e.action >= task.actions.len() {
            return Err(ModificationError::UnknownAction { action: e.action });
        }
        if !edit_in_range(task, &e) {
            return Err(ModificationError::OutOfRange {
                kind: e.kind,
                action: e.action,
                action_name: task.actions[e.action].name.clone(),
                fluent: e.fluent,
            });
        }
        let a = &mut out.actions[e.action];
        match e.kind {
            EditKind::AddPrecondition => a.pre.insert(e.fluent),
            EditKind::RemoveAdd => a.add.remove(e.fluent),
            EditKind::AddDelete => a.del.insert(e.fluent),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strips::goal_reachable;
    use crate::strips::workflow;

    fn edit(task: &PlanningTask, kind: EditKind, action: &str, fluent: &str) -> Edit {
        Edit {
            kind,
            action: task.action_index(action).unwrap(),
            fluent: task.fluent_id(fluent).unwrap(),
        }
    }

    #[test]
    fn empty_set_is_identity() {
        let task = workflow();
        assert_eq!(
            apply_modifications(&task, &ModificationSet::new()).unwrap(),
            task
        );
    }

    #[test]
    fn safe_client_precondition_shields_workflow() {
        let task = workflow();
        let mods: ModificationSet = [edit(
            &task,
            EditKind::AddPrecondition,
            "direct_approval",
            "safe_client",
        )]
        .into_iter()
        .collect();
        let shielded = apply_modifications(&task, &mods).unwrap();
        assert!(!goal_reachable(&shielded).unwrap());
        assert_eq!(
            mods.diff_lines(&task),
            ["ACTION direct_approval: +pre safe_client"]
        );
    }

    #[test]
    fn removing_escalated_shields_workflow() {
        let task = workflow();
        let mods: ModificationSet = [edit(&task, EditKind::RemoveAdd, "escalation", "escalated")]
            .into_iter()
            .collect();
        let shielded = apply_modifications(&task, &mods).unwrap();
        assert!(!goal_reachable(&shielded).unwrap());
    }

    #[test]
    fn out_of_range_edits_are_rejected() {
        let task = workflow();
        let bad = edit(&task, EditKind::RemoveAdd, "escalation", "safe_client");
        let mods: ModificationSet = [bad].into_iter().collect();
        assert!(matches!(
            apply_modifications(&task, &mods),
            Err(ModificationError::OutOfRange { .. })
        ));
        let mods: ModificationSet = [Edit {
            kind: EditKind::AddDelete,
            action: 99,
            fluent: 0,
        }]
        .into_iter()
        .collect();
        assert_eq!(
            apply_modifications(&task, &mods),
            Err(ModificationError::UnknownAction { action: 99 })
        );
    }

    #[test]
    fn possible_edit_counts() {
        let task = workflow();
        // 14 preconditions, 3 add removals, 14 delete additions.
        assert_eq!(possible_edits(&task, 0..task.actions.len()).len(), 31);
    }
}
