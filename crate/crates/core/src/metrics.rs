//! Distances between truth values and worlds, and the tension measures built
//! on top of them.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{apply_postcondition, Action, Character, TruthValue, World};

/// Goal tension broken down by theme.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TensionReport {
    pub per_theme: BTreeMap<String, u32>,
    pub total: u32,
}

impl TensionReport {
    fn from_parts(parts: impl IntoIterator<Item = (String, u32)>) -> Self {
        let per_theme: BTreeMap<String, u32> = parts.into_iter().collect();
        let total = per_theme.values().sum();
        TensionReport { per_theme, total }
    }

    pub fn theme(&self, theme: &str) -> Option<u32> {
        self.per_theme.get(theme).copied()
    }
}

/// Zero when either side is ⊥, otherwise the absolute grade difference.
pub fn value_dist(a: TruthValue, b: TruthValue) -> u32 {
    match (a, b) {
        (TruthValue::Grade(a), TruthValue::Grade(b)) => a.abs_diff(b),
        _ => 0,
    }
}

pub fn world_distance(a: &World, b: &World) -> Result<u32> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(distance_unchecked(a, b))
}

pub(crate) fn distance_unchecked(a: &World, b: &World) -> u32 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(x, y)| value_dist(x, y)).sum()
}

fn tension_against(character: &Character, world: &World) -> TensionReport {
    TensionReport::from_parts(
        character
            .worldviews
            .iter()
            .map(|(theme, view)| (theme.clone(), distance_unchecked(view, world))),
    )
}

/// Distance of every worldview to the actual world.
pub fn goal_tension(character: &Character, actual: &World) -> TensionReport {
    tension_against(character, actual)
}

/// Goal tension as the character believes it to be.
pub fn subjective_goal_tension(character: &Character) -> TensionReport {
    tension_against(character, &character.perceived)
}

/// Tension between two of one character's worldviews.
pub fn personal_tension(character: &Character, first: &str, second: &str) -> Result<u32> {
    world_distance(character.worldview(first)?, character.worldview(second)?)
}

/// Tension between worldviews of two (possibly identical) characters.
pub fn interpersonal_tension(
    first: &Character,
    first_theme: &str,
    second: &Character,
    second_theme: &str,
) -> Result<u32> {
    world_distance(first.worldview(first_theme)?, second.worldview(second_theme)?)
}

/// Subjective goal tension the character expects after taking `action`.
pub fn predict(character: &Character, action: &Action) -> u32 {
    match apply_postcondition(&action.postcondition, &character.perceived) {
        Ok(predicted) => tension_against(character, &predicted).total,
        // a malformed effect changes nothing
        Err(_) => subjective_goal_tension(character).total,
    }
}
