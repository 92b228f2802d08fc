//! The narrative formalism: truth values, worlds, characters, actions and
//! the system tuple that ties them together.
//!
//! Worlds are positional vectors over the system's proposition list. Every
//! other entity (themes, characters, actions) is addressed by name.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use indexmap::IndexMap;

use crate::error::{Error, Result};

/// A single truth value: a grade within the system range, or don't-care.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TruthValue {
    Grade(u32),
    DontCare,
}

impl TruthValue {
    pub fn grade(self) -> Option<u32> {
        match self {
            TruthValue::Grade(g) => Some(g),
            TruthValue::DontCare => None,
        }
    }

    pub fn is_dont_care(self) -> bool {
        matches!(self, TruthValue::DontCare)
    }
}

impl From<Option<u32>> for TruthValue {
    fn from(value: Option<u32>) -> Self {
        value.map_or(TruthValue::DontCare, TruthValue::Grade)
    }
}

impl From<TruthValue> for Option<u32> {
    fn from(value: TruthValue) -> Self {
        value.grade()
    }
}

impl fmt::Display for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TruthValue::Grade(g) => write!(f, "{g}"),
            TruthValue::DontCare => f.write_str("⊥"),
        }
    }
}

/// Integer range of truth grades. The minimum is always zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RangeSpec {
    pub min: u32,
    pub max: u32,
}

impl RangeSpec {
    pub const BINARY: RangeSpec = RangeSpec { min: 0, max: 1 };

    pub fn new(max: u32) -> Self {
        RangeSpec { min: 0, max }
    }

    pub fn is_binary(&self) -> bool {
        *self == Self::BINARY
    }

    /// Number of distinct grades.
    pub fn span(&self) -> u32 {
        self.max.saturating_sub(self.min) + 1
    }

    pub fn grades(&self) -> impl Iterator<Item = u32> + Clone {
        self.min..=self.max
    }

    pub fn contains(&self, grade: u32) -> bool {
        (self.min..=self.max).contains(&grade)
    }

    /// Largest distance a single non-⊥ value `grade` can have to any grade.
    pub fn max_value_distance(&self, grade: u32) -> u32 {
        (grade.saturating_sub(self.min)).max(self.max.saturating_sub(grade))
    }
}

impl Default for RangeSpec {
    fn default() -> Self {
        Self::BINARY
    }
}

/// An ordered assignment of truth values over the proposition set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct World(Vec<TruthValue>);

impl World {
    pub fn new(values: Vec<TruthValue>) -> Self {
        World(values)
    }

    pub fn from_grades(grades: &[u32]) -> Self {
        World(grades.iter().map(|&g| TruthValue::Grade(g)).collect())
    }

    pub fn dont_care(len: usize) -> Self {
        World(vec![TruthValue::DontCare; len])
    }

    pub fn from_options(values: &[Option<u32>]) -> Self {
        World(values.iter().map(|&v| v.into()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[TruthValue] {
        &self.0
    }

    pub fn get(&self, index: usize) -> Option<TruthValue> {
        self.0.get(index).copied()
    }

    pub fn set(&mut self, index: usize, value: TruthValue) {
        self.0[index] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = TruthValue> + '_ {
        self.0.iter().copied()
    }

    /// True when no entry is ⊥.
    pub fn is_complete(&self) -> bool {
        self.0.iter().all(|v| !v.is_dont_care())
    }

    pub fn first_dont_care(&self) -> Option<usize> {
        self.0.iter().position(|v| v.is_dont_care())
    }

    pub fn to_options(&self) -> Vec<Option<u32>> {
        self.0.iter().map(|&v| v.into()).collect()
    }

    /// Grades of a ⊥-free world.
    pub fn grades(&self) -> Option<Vec<u32>> {
        self.0.iter().map(|v| v.grade()).collect()
    }
}

impl From<Vec<TruthValue>> for World {
    fn from(values: Vec<TruthValue>) -> Self {
        World(values)
    }
}

impl fmt::Display for World {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Character {
    pub name: String,
    /// The character's (possibly false) copy of the actual world.
    pub perceived: World,
    /// One ideal world per theme.
    pub worldviews: BTreeMap<String, World>,
    /// Names of the actions this character may take, in selection order.
    pub actions: Vec<String>,
}

impl Character {
    pub fn worldview(&self, theme: &str) -> Result<&World> {
        self.worldviews
            .get(theme)
            .ok_or_else(|| Error::UnknownTheme(theme.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub name: String,
    pub precondition: World,
    pub postcondition: World,
}

/// The full narrative tuple: propositions, themes, actual world, characters,
/// actions and truth range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NarrativeSystem {
    pub propositions: Vec<String>,
    pub themes: Vec<String>,
    pub range: RangeSpec,
    pub actual: World,
    pub characters: Vec<Character>,
    pub actions: IndexMap<String, Action>,
}

impl NarrativeSystem {
    pub fn proposition_count(&self) -> usize {
        self.propositions.len()
    }

    pub fn character(&self, name: &str) -> Result<&Character> {
        self.characters
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::UnknownCharacter(name.to_string()))
    }

    pub fn character_mut(&mut self, name: &str) -> Result<&mut Character> {
        self.characters
            .iter_mut()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::UnknownCharacter(name.to_string()))
    }

    pub fn action(&self, name: &str) -> Result<&Action> {
        self.actions
            .get(name)
            .ok_or_else(|| Error::UnknownAction(name.to_string()))
    }

    /// Replaces the actual world and resets every perceived world to match it.
    pub fn set_actual_world(&mut self, world: World) {
        for character in &mut self.characters {
            character.perceived = world.clone();
        }
        self.actual = world;
    }
}

/// Invariant that a [`Violation`] reports as broken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    InvalidRange,
    DuplicateName,
    ActualWorldLength,
    ActualWorldDontCare,
    ActualWorldOutOfRange,
    PerceivedLength,
    PerceivedDontCare,
    PerceivedOutOfRange,
    MissingWorldview,
    UnknownWorldviewTheme,
    WorldviewLength,
    WorldviewOutOfRange,
    UnknownAction,
    PreconditionLength,
    PostconditionLength,
    ActionOutOfRange,
}

impl Rule {
    pub fn code(self) -> &'static str {
        match self {
            Rule::InvalidRange => "invalid-range",
            Rule::DuplicateName => "duplicate-name",
            Rule::ActualWorldLength => "actual-world-length",
            Rule::ActualWorldDontCare => "actual-world-dont-care",
            Rule::ActualWorldOutOfRange => "actual-world-out-of-range",
            Rule::PerceivedLength => "perceived-length",
            Rule::PerceivedDontCare => "perceived-dont-care",
            Rule::PerceivedOutOfRange => "perceived-out-of-range",
            Rule::MissingWorldview => "missing-worldview",
            Rule::UnknownWorldviewTheme => "unknown-worldview-theme",
            Rule::WorldviewLength => "worldview-length",
            Rule::WorldviewOutOfRange => "worldview-out-of-range",
            Rule::UnknownAction => "unknown-action",
            Rule::PreconditionLength => "precondition-length",
            Rule::PostconditionLength => "postcondition-length",
            Rule::ActionOutOfRange => "action-out-of-range",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// A broken invariant, naming the offending entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub entity: String,
    pub rule: Rule,
    pub detail: String,
}

impl Violation {
    pub fn new(entity: impl Into<String>, rule: Rule, detail: impl Into<String>) -> Self {
        Violation {
            entity: entity.into(),
            rule,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.entity, self.rule, self.detail)
    }
}

struct WorldRules {
    length: Rule,
    dont_care: Option<Rule>,
    out_of_range: Rule,
}

fn check_world(entity: &str, world: &World, len: usize, range: RangeSpec, rules: WorldRules, out: &mut Vec<Violation>) {
    if world.len() != len {
        out.push(Violation::new(
            entity,
            rules.length,
            format!("expected {len} values, found {}", world.len()),
        ));
    }
    if let (Some(rule), Some(index)) = (rules.dont_care, world.first_dont_care()) {
        out.push(Violation::new(
            entity,
            rule,
            format!("don't-care at proposition {index}"),
        ));
    }
    if let Some((index, grade)) = world
        .iter()
        .enumerate()
        .find_map(|(i, v)| v.grade().filter(|g| !range.contains(*g)).map(|g| (i, g)))
    {
        out.push(Violation::new(
            entity,
            rules.out_of_range,
            format!(
                "grade {grade} at proposition {index} outside [{}, {}]",
                range.min, range.max
            ),
        ));
    }
}

fn check_unique<'a>(kind: &str, names: impl IntoIterator<Item = &'a str>, out: &mut Vec<Violation>) {
    let mut seen = HashSet::new();
    for name in names {
        if !seen.insert(name) {
            out.push(Violation::new(
                format!("{kind} `{name}`"),
                Rule::DuplicateName,
                format!("{kind} name declared more than once"),
            ));
        }
    }
}

/// Checks every structural invariant of the system. An empty result means the
/// system is valid.
pub fn validate_system(system: &NarrativeSystem) -> Vec<Violation> {
    let mut out = Vec::new();
    let len = system.proposition_count();
    let range = system.range;

    if range.min != 0 || range.max < 1 {
        out.push(Violation::new(
            "range",
            Rule::InvalidRange,
            format!(
                "range must be [0, max] with max >= 1, got [{}, {}]",
                range.min, range.max
            ),
        ));
    }

    check_unique("proposition", system.propositions.iter().map(String::as_str), &mut out);
    check_unique("theme", system.themes.iter().map(String::as_str), &mut out);
    check_unique("character", system.characters.iter().map(|c| c.name.as_str()), &mut out);

    check_world(
        "actual world",
        &system.actual,
        len,
        range,
        WorldRules {
            length: Rule::ActualWorldLength,
            dont_care: Some(Rule::ActualWorldDontCare),
            out_of_range: Rule::ActualWorldOutOfRange,
        },
        &mut out,
    );

    for character in &system.characters {
        let entity = format!("character `{}`", character.name);
        check_world(
            &format!("{entity} perceived world"),
            &character.perceived,
            len,
            range,
            WorldRules {
                length: Rule::PerceivedLength,
                dont_care: Some(Rule::PerceivedDontCare),
                out_of_range: Rule::PerceivedOutOfRange,
            },
            &mut out,
        );
        for theme in &system.themes {
            if !character.worldviews.contains_key(theme) {
                out.push(Violation::new(
                    &entity,
                    Rule::MissingWorldview,
                    format!("no worldview for theme `{theme}`"),
                ));
            }
        }
        for (theme, world) in &character.worldviews {
            if !system.themes.contains(theme) {
                out.push(Violation::new(
                    &entity,
                    Rule::UnknownWorldviewTheme,
                    format!("worldview for undeclared theme `{theme}`"),
                ));
            }
            check_world(
                &format!("{entity} worldview `{theme}`"),
                world,
                len,
                range,
                WorldRules {
                    length: Rule::WorldviewLength,
                    dont_care: None,
                    out_of_range: Rule::WorldviewOutOfRange,
                },
                &mut out,
            );
        }
        for action in &character.actions {
            if !system.actions.contains_key(action) {
                out.push(Violation::new(
                    &entity,
                    Rule::UnknownAction,
                    format!("action `{action}` is not declared"),
                ));
            }
        }
    }

    for (name, action) in &system.actions {
        let entity = format!("action `{name}`");
        check_world(
            &format!("{entity} precondition"),
            &action.precondition,
            len,
            range,
            WorldRules {
                length: Rule::PreconditionLength,
                dont_care: None,
                out_of_range: Rule::ActionOutOfRange,
            },
            &mut out,
        );
        check_world(
            &format!("{entity} postcondition"),
            &action.postcondition,
            len,
            range,
            WorldRules {
                length: Rule::PostconditionLength,
                dont_care: None,
                out_of_range: Rule::ActionOutOfRange,
            },
            &mut out,
        );
    }

    out
}

/// Overwrites `world` with every non-⊥ entry of `effect`.
pub fn apply_postcondition(effect: &World, world: &World) -> Result<World> {
    if effect.len() != world.len() {
        return Err(Error::LengthMismatch {
            expected: world.len(),
            found: effect.len(),
        });
    }
    Ok(World(
        effect
            .iter()
            .zip(world.iter())
            .map(|(e, w)| if e.is_dont_care() { w } else { e })
            .collect(),
    ))
}

/// True iff the action's precondition is at distance zero from `world`.
pub fn precondition_satisfied(action: &Action, world: &World) -> bool {
    matches!(crate::metrics::world_distance(&action.precondition, world), Ok(0))
}
