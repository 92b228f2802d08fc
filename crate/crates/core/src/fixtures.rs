//! Bundled reference models and sketches.
//!
//! * `subject_and_subjectivity` — the three-character matchmaking model with
//!   four propositions per character (matched, wealth, faith, ambition).
//! * `fanny_generated` — the sketch-generated single-character Fanny with its
//!   three bachelor actions and starting world.
//! * `fanny_blank` — one character, three themes, four unset propositions; the
//!   starting point for sketch authoring.

use crate::io::{load_model, load_sketch};
use crate::model::NarrativeSystem;
use crate::sketch::Sketch;

pub const SUBJECT_AND_SUBJECTIVITY_JSON: &str = include_str!("../fixtures/subject_and_subjectivity.json");
pub const FANNY_GENERATED_JSON: &str = include_str!("../fixtures/fanny_generated.json");
pub const FANNY_BLANK_JSON: &str = include_str!("../fixtures/fanny_blank.json");
pub const FANNY_DIAMOND_SKETCH_JSON: &str = include_str!("../fixtures/fanny_diamond.sketch.json");
pub const FANNY_SOCIETY_FAMILY_SKETCH_JSON: &str = include_str!("../fixtures/fanny_society_family.sketch.json");
pub const FANNY_BACHELORS_SKETCH_JSON: &str = include_str!("../fixtures/fanny_bachelors.sketch.json");

pub fn subject_and_subjectivity() -> NarrativeSystem {
    load_model(SUBJECT_AND_SUBJECTIVITY_JSON).expect("bundled fixture is valid")
}

pub fn fanny_generated() -> NarrativeSystem {
    load_model(FANNY_GENERATED_JSON).expect("bundled fixture is valid")
}

pub fn fanny_blank() -> NarrativeSystem {
    load_model(FANNY_BLANK_JSON).expect("bundled fixture is valid")
}

pub fn fanny_diamond_sketch() -> Sketch {
    load_sketch(FANNY_DIAMOND_SKETCH_JSON).expect("bundled fixture is valid")
}

pub fn fanny_society_family_sketch() -> Sketch {
    load_sketch(FANNY_SOCIETY_FAMILY_SKETCH_JSON).expect("bundled fixture is valid")
}

pub fn fanny_bachelors_sketch() -> Sketch {
    load_sketch(FANNY_BACHELORS_SKETCH_JSON).expect("bundled fixture is valid")
}
