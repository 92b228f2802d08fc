//! Shared generators and independent reference implementations for the
//! integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use indexmap::IndexMap;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tension_core::{Action, Character, NarrativeSystem, RangeSpec, TruthValue, World};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_world(rng: &mut ChaCha8Rng, len: usize, range: RangeSpec, dont_care: f64) -> World {
    World::new(
        (0..len)
            .map(|_| {
                if rng.random_bool(dont_care) {
                    TruthValue::DontCare
                } else {
                    TruthValue::Grade(rng.random_range(range.min..=range.max))
                }
            })
            .collect(),
    )
}

pub fn random_state(rng: &mut ChaCha8Rng, len: usize, range: RangeSpec) -> World {
    random_world(rng, len, range, 0.0)
}

/// A valid model with 1–6 propositions, 1–3 characters, 1–3 themes and up to
/// four actions per character. Perceived worlds are sometimes wrong.
pub fn random_model(rng: &mut ChaCha8Rng) -> NarrativeSystem {
    let n = rng.random_range(1..=6usize);
    let range = if rng.random_bool(0.7) {
        RangeSpec::BINARY
    } else {
        RangeSpec::new(2)
    };
    let themes: Vec<String> = (0..rng.random_range(1..=3usize)).map(|t| format!("t{t}")).collect();
    let actual = random_state(rng, n, range);
    let mut actions = IndexMap::new();
    let mut characters = Vec::new();
    for c in 0..rng.random_range(1..=3usize) {
        let perceived = if rng.random_bool(0.3) {
            random_state(rng, n, range)
        } else {
            actual.clone()
        };
        let worldviews: BTreeMap<String, World> = themes
            .iter()
            .map(|t| (t.clone(), random_world(rng, n, range, 0.3)))
            .collect();
        let mut names = Vec::new();
        for a in 0..rng.random_range(0..=4usize) {
            let name = format!("c{c}_a{a}");
            let action = Action {
                name: name.clone(),
                precondition: random_world(rng, n, range, 0.7),
                postcondition: random_world(rng, n, range, 0.5),
            };
            actions.insert(name.clone(), action);
            names.push(name);
        }
        characters.push(Character {
            name: format!("c{c}"),
            perceived,
            worldviews,
            actions: names,
        });
    }
    NarrativeSystem {
        propositions: (0..n).map(|p| format!("p{p}")).collect(),
        themes,
        range,
        actual,
        characters,
        actions,
    }
}

/// Distance with ⊥ on either side contributing nothing.
pub fn naive_distance(a: &World, b: &World) -> u32 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| match (x, y) {
            (TruthValue::Grade(x), TruthValue::Grade(y)) => x.abs_diff(y),
            _ => 0,
        })
        .sum()
}

/// Every complete world over `len` propositions, in odometer order.
pub fn all_states(len: usize, range: RangeSpec) -> Vec<World> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<u32>| {
                range.grades().map(move |g| {
                    let mut next = prefix.clone();
                    next.push(g);
                    next
                })
            })
            .collect();
    }
    out.iter().map(|g| World::from_grades(g)).collect()
}

/// Histogram as a map, built from [`all_states`] and [`naive_distance`].
pub fn naive_histogram(w_x: &World, w_y: &World, range: RangeSpec) -> BTreeMap<(u32, u32), u128> {
    let mut out = BTreeMap::new();
    for state in all_states(w_x.len(), range) {
        *out.entry((naive_distance(w_x, &state), naive_distance(w_y, &state)))
            .or_insert(0) += 1;
    }
    out
}

/// Overwrites the set entries of `effect` onto `world`.
pub fn naive_apply(effect: &World, world: &World) -> World {
    World::new(
        effect
            .iter()
            .zip(world.iter())
            .map(|(e, w)| if e.is_dont_care() { w } else { e })
            .collect(),
    )
}

pub fn naive_total(character: &Character, world: &World) -> u32 {
    character
        .worldviews
        .values()
        .map(|view| naive_distance(view, world))
        .sum()
}

/// Sign-pattern table of movement classes, written out row by row.
pub const MOVEMENT_TABLE: [((i64, i64), u8); 9] = [
    ((0, 1), 1),
    ((1, 1), 2),
    ((1, 0), 3),
    ((1, -1), 4),
    ((0, -1), 5),
    ((-1, -1), 6),
    ((-1, 0), 7),
    ((-1, 1), 8),
    ((0, 0), 9),
];
