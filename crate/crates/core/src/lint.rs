//! Warnings about models that are valid but likely to simulate badly.
//!
//! Characters never learn from a failed action, so an action they believe
//! applicable but that fails in the actual world gets retried every step.
//! Zero-score actions pass the default improvement gate and can keep a
//! simulation circling through the same worlds.

use std::collections::HashSet;

use crate::model::{precondition_satisfied, NarrativeSystem};
use crate::simulation::{run, SimulationConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LintKind {
    RetryLoop,
    ZeroScoreCycle,
}

impl LintKind {
    pub fn code(self) -> &'static str {
        match self {
            LintKind::RetryLoop => "retry-loop",
            LintKind::ZeroScoreCycle => "zero-score-cycle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lint {
    pub kind: LintKind,
    pub character: String,
    pub action: String,
    pub detail: String,
}

pub fn lint_system(system: &NarrativeSystem) -> Vec<Lint> {
    let mut lints = Vec::new();
    for c in &system.characters {
        for name in &c.actions {
            let Some(action) = system.actions.get(name) else {
                continue;
            };
            if precondition_satisfied(action, &c.perceived) && !precondition_satisfied(action, &system.actual) {
                lints.push(Lint {
                    kind: LintKind::RetryLoop,
                    character: c.name.clone(),
                    action: name.clone(),
                    detail: "believed applicable but fails in the actual world; failures are not learned from".into(),
                });
            }
        }
    }

    // a zero-score success that lands on a world the run already visited
    let trace = run(system, &SimulationConfig::default());
    let mut visited = HashSet::new();
    let mut reported = HashSet::new();
    for record in &trace.steps {
        visited.insert(record.actual_before.clone());
        let Some(name) = record.chosen_action.as_ref() else {
            continue;
        };
        if record.succeeded
            && record.score == Some(0)
            && visited.contains(&record.actual_after)
            && reported.insert((record.character.clone(), name.clone()))
        {
            lints.push(Lint {
                kind: LintKind::ZeroScoreCycle,
                character: record.character.clone(),
                action: name.clone(),
                detail: format!(
                    "scores 0 and returns to the already visited world {}",
                    record.actual_after
                ),
            });
        }
    }
    lints
}
