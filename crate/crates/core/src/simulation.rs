//! Greedy step-wise simulation: each character in turn picks the action it
//! believes most reduces its goal tension, and successful actions update the
//! actual world and every perceived world.

use crate::error::{Error, Result};
use crate::metrics::{predict, subjective_goal_tension};
use crate::model::{apply_postcondition, precondition_satisfied, Action, Character, NarrativeSystem, World};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationConfig {
    pub max_steps: usize,
    /// Only accept actions with a strictly positive score.
    pub strict_improvement: bool,
    /// Recorded with the trace. The engine itself draws no random numbers.
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            max_steps: 100,
            strict_improvement: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub character: String,
    pub chosen_action: Option<String>,
    pub succeeded: bool,
    pub actual_before: World,
    pub actual_after: World,
    pub score: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub config: SimulationConfig,
    pub steps: Vec<StepRecord>,
}

impl Trace {
    pub fn successful(&self) -> impl Iterator<Item = &StepRecord> {
        self.steps.iter().filter(|s| s.succeeded)
    }

    pub fn final_world(&self) -> Option<&World> {
        self.steps.last().map(|s| &s.actual_after)
    }
}

/// An action picked by [`act`] together with its score.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub action: String,
    pub score: i64,
}

/// Scores every action the character believes applicable and returns the best
/// one, if its score passes the improvement gate. Ties go to the earliest
/// action in the character's list.
pub fn act(character: &Character, system: &NarrativeSystem, config: &SimulationConfig) -> Option<Selection> {
    let current = i64::from(subjective_goal_tension(character).total);
    let mut best: Option<Selection> = None;
    for name in &character.actions {
        let Some(action) = system.actions.get(name) else {
            continue;
        };
        if !precondition_satisfied(action, &character.perceived) {
            continue;
        }
        let score = current - i64::from(predict(character, action));
        if best.as_ref().is_none_or(|b| score > b.score) {
            best = Some(Selection {
                action: name.clone(),
                score,
            });
        }
    }
    let threshold = if config.strict_improvement { 1 } else { 0 };
    best.filter(|b| b.score >= threshold)
}

fn apply_everywhere(system: &mut NarrativeSystem, effect: &World) -> Result<()> {
    system.actual = apply_postcondition(effect, &system.actual)?;
    for character in &mut system.characters {
        character.perceived = apply_postcondition(effect, &character.perceived)?;
    }
    Ok(())
}

/// Runs one step: every character, in declaration order, acts on the world as
/// left by the characters before it.
pub fn step(system: &mut NarrativeSystem, config: &SimulationConfig) -> Vec<StepRecord> {
    let mut records = Vec::with_capacity(system.characters.len());
    for index in 0..system.characters.len() {
        let selection = act(&system.characters[index], system, config);
        let before = system.actual.clone();
        let mut succeeded = false;
        if let Some(sel) = &selection {
            let action = &system.actions[sel.action.as_str()];
            if precondition_satisfied(action, &system.actual) {
                let effect = action.postcondition.clone();
                succeeded = apply_everywhere(system, &effect).is_ok();
            }
        }
        records.push(StepRecord {
            character: system.characters[index].name.clone(),
            chosen_action: selection.as_ref().map(|s| s.action.clone()),
            succeeded,
            actual_before: before,
            actual_after: system.actual.clone(),
            score: selection.map(|s| s.score),
        });
    }
    records
}

/// Steps until `max_steps`, until a step where nobody picks an action, or
/// until two consecutive steps without a strictly tension-reducing success.
pub fn run(system: &NarrativeSystem, config: &SimulationConfig) -> Trace {
    let mut working = system.clone();
    let mut steps = Vec::new();
    let mut stale = 0;
    for _ in 0..config.max_steps {
        let records = step(&mut working, config);
        let idle = records.iter().all(|r| r.chosen_action.is_none());
        let improved = records.iter().any(|r| r.succeeded && r.score.is_some_and(|s| s > 0));
        steps.extend(records);
        if idle {
            break;
        }
        stale = if improved { 0 } else { stale + 1 };
        if stale >= 2 {
            break;
        }
    }
    Trace { config: *config, steps }
}

/// Re-applies a trace to `system`, checking that every record matches what the
/// model produces, and returns the resulting system.
pub fn replay(system: &NarrativeSystem, trace: &Trace) -> Result<NarrativeSystem> {
    let mut working = system.clone();
    for (index, record) in trace.steps.iter().enumerate() {
        let diverged = |reason: String| Error::ReplayDiverged { index, reason };
        if record.actual_before != working.actual {
            return Err(diverged(format!(
                "expected world {} before, model has {}",
                record.actual_before, working.actual
            )));
        }
        if record.succeeded {
            let name = record
                .chosen_action
                .as_deref()
                .ok_or_else(|| diverged("successful record without an action".into()))?;
            let action = working.action(name)?.clone();
            if !precondition_satisfied(&action, &working.actual) {
                return Err(diverged(format!("precondition of `{name}` fails")));
            }
            apply_everywhere(&mut working, &action.postcondition)?;
        }
        if record.actual_after != working.actual {
            return Err(diverged(format!(
                "expected world {} after, model has {}",
                record.actual_after, working.actual
            )));
        }
    }
    Ok(working)
}

/// Applies `actions` in order from `start` on behalf of `character`, one
/// record per action. An action whose precondition fails is recorded as a
/// failure and leaves the world unchanged.
pub fn replay_actions(character: &str, start: &World, actions: &[Action]) -> Result<Trace> {
    let mut world = start.clone();
    let mut steps = Vec::with_capacity(actions.len());
    for action in actions {
        let before = world.clone();
        let succeeded = precondition_satisfied(action, &world);
        if succeeded {
            world = apply_postcondition(&action.postcondition, &world)?;
        }
        steps.push(StepRecord {
            character: character.to_string(),
            chosen_action: Some(action.name.clone()),
            succeeded,
            actual_before: before,
            actual_after: world.clone(),
            score: None,
        });
    }
    Ok(Trace {
        config: SimulationConfig {
            max_steps: actions.len(),
            ..SimulationConfig::default()
        },
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{RangeSpec, TruthValue};
    use indexmap::IndexMap;
    use std::collections::BTreeMap;

    fn cfg(max_steps: usize) -> SimulationConfig {
        SimulationConfig {
            max_steps,
            ..SimulationConfig::default()
        }
    }

    /// Two propositions, one character wanting (1, 1), one action forcing (0, 0).
    fn regressive_model() -> NarrativeSystem {
        let mut worldviews = BTreeMap::new();
        worldviews.insert("personal".to_string(), World::from_grades(&[1, 1]));
        let mut actions = IndexMap::new();
        actions.insert(
            "ruin".to_string(),
            Action {
                name: "ruin".into(),
                precondition: World::dont_care(2),
                postcondition: World::from_grades(&[0, 0]),
            },
        );
        NarrativeSystem {
            propositions: vec!["p".into(), "q".into()],
            themes: vec!["personal".into()],
            range: RangeSpec::BINARY,
            actual: World::from_grades(&[1, 1]),
            characters: vec![Character {
                name: "Ann".into(),
                perceived: World::from_grades(&[1, 1]),
                worldviews,
                actions: vec!["ruin".into()],
            }],
            actions,
        }
    }

    #[test]
    fn fanny_picks_the_ideal_bachelor() {
        let system = fixtures::fanny_generated();
        let fanny = &system.characters[0];
        let pick = act(fanny, &system, &cfg(1)).unwrap();
        assert_eq!(pick.action, "action_1");
        assert_eq!(pick.score, 5);
    }

    #[test]
    fn no_actions_means_no_choice() {
        let mut system = fixtures::fanny_generated();
        system.characters[0].actions.clear();
        assert_eq!(act(&system.characters[0], &system, &cfg(1)), None);
    }

    #[test]
    fn negative_scores_are_rejected() {
        let system = regressive_model();
        let ann = &system.characters[0];
        assert_eq!(
            i64::from(subjective_goal_tension(ann).total) - i64::from(predict(ann, &system.actions[0])),
            -2
        );
        assert_eq!(act(ann, &system, &cfg(1)), None);

        let mut working = system.clone();
        let records = step(&mut working, &cfg(1));
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].chosen_action, None);
        assert!(!records[0].succeeded);
        assert_eq!(working.actual, system.actual);
    }

    #[test]
    fn one_step_of_fanny() {
        let mut system = fixtures::fanny_generated();
        let records = step(&mut system, &cfg(1));
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].chosen_action.as_deref(), Some("action_1"));
        assert!(records[0].succeeded);
        assert_eq!(records[0].score, Some(5));
        assert_eq!(system.actual, World::from_grades(&[0, 1, 1, 0]));
        assert_eq!(system.characters[0].perceived, system.actual);
    }

    #[test]
    fn false_belief_fails_in_the_actual_world() {
        // Ann believes p holds, which the action needs; it does not.
        let mut system = regressive_model();
        system.characters[0]
            .worldviews
            .insert("personal".into(), World::from_grades(&[1, 0]));
        system.actions[0].precondition = World::from_options(&[Some(1), None]);
        system.actions[0].postcondition = World::from_options(&[None, Some(0)]);
        system.actual = World::from_grades(&[0, 1]);
        system.characters[0].perceived = World::from_grades(&[1, 1]);

        let mut working = system.clone();
        let records = step(&mut working, &cfg(1));
        assert_eq!(records[0].chosen_action.as_deref(), Some("ruin"));
        assert_eq!(records[0].score, Some(1));
        assert!(!records[0].succeeded);
        assert_eq!(working.actual, system.actual);
        assert_eq!(working.characters[0].perceived, system.characters[0].perceived);
    }

    #[test]
    fn fanny_run_quiesces_at_the_ideal_match() {
        let system = fixtures::fanny_generated();
        let trace = run(&system, &cfg(10));
        assert!(trace.steps.len() < 10);
        assert_eq!(trace.successful().count(), 1);
        assert_eq!(trace.final_world(), Some(&World::from_grades(&[0, 1, 1, 0])));
        assert_eq!(run(&system, &cfg(10)), trace);
    }

    #[test]
    fn zero_score_cycles_terminate() {
        // Once matched, re-taking action_1 scores 0 and is admitted forever
        // unless quiescence catches it.
        let mut system = fixtures::fanny_generated();
        for action in system.actions.values_mut() {
            action.precondition = World::dont_care(4);
        }
        let trace = run(&system, &cfg(50));
        assert_eq!(trace.steps.len(), 3);
        assert_eq!(trace.steps[1].score, Some(0));
        assert_eq!(trace.final_world(), Some(&World::from_grades(&[0, 1, 1, 0])));

        let strict = SimulationConfig {
            strict_improvement: true,
            ..cfg(50)
        };
        let trace = run(&system, &strict);
        assert_eq!(trace.steps.len(), 2);
        assert_eq!(trace.steps[1].chosen_action, None);
    }

    #[test]
    fn zero_steps_gives_an_empty_trace() {
        let trace = run(&fixtures::fanny_generated(), &cfg(0));
        assert!(trace.steps.is_empty());
        assert_eq!(trace.final_world(), None);
    }

    #[test]
    fn replay_reproduces_and_detects_divergence() {
        let system = fixtures::subject_and_subjectivity();
        let trace = run(&system, &cfg(10));
        let replayed = replay(&system, &trace).unwrap();
        assert_eq!(Some(&replayed.actual), trace.final_world());

        let mut tampered = trace.clone();
        tampered.steps[0].actual_after.set(0, TruthValue::Grade(0));
        assert!(matches!(
            replay(&system, &tampered),
            Err(Error::ReplayDiverged { index: 0, .. })
        ));
    }

    #[test]
    fn every_character_finds_their_ideal_match() {
        let system = fixtures::subject_and_subjectivity();
        let trace = run(&system, &cfg(10));
        let chosen: Vec<_> = trace.successful().map(|r| r.chosen_action.clone().unwrap()).collect();
        assert_eq!(chosen, ["fanny_william", "jane_frederick", "elizabeth_charles"]);
    }

    #[test]
    fn replay_actions_records_failures() {
        let system = fixtures::fanny_generated();
        let start = system.actual.clone();
        let actions: Vec<Action> = system.actions.values().cloned().collect();
        let trace = replay_actions("Fanny", &start, &actions).unwrap();
        assert_eq!(trace.steps.len(), 3);
        assert!(trace.steps[0].succeeded);
        // after action 1 prop_1 is false, so the other two no longer apply
        assert!(!trace.steps[1].succeeded);
        assert!(!trace.steps[2].succeeded);
    }
}
