//! Possible-worlds narrative engine.
//!
//! Characters hold one ideal world per theme and a perceived copy of the
//! actual world. Tension is the distance between those worlds. On top of the
//! model sit a greedy simulation, tension-space analysis (exact 2D histograms
//! of worldview distances over every possible actual world) and sketch-based
//! fitting of worldviews and actions.

pub mod authoring;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod lint;
pub mod metrics;
pub mod model;
pub mod simulation;
pub mod sketch;
pub mod tension_space;

pub use error::{Error, Result};
pub use metrics::{
    goal_tension, interpersonal_tension, personal_tension, predict, subjective_goal_tension, value_dist,
    world_distance, TensionReport,
};
pub use model::{
    apply_postcondition, precondition_satisfied, validate_system, Action, Character, NarrativeSystem, RangeSpec, Rule,
    TruthValue, Violation, World,
};
pub use simulation::{act, replay, replay_actions, run, step, Selection, SimulationConfig, StepRecord, Trace};
pub use sketch::{
    decompose_edge, find_start_world, find_start_world_seeded, fit_actions, fit_worldviews, movement_relation,
    ActionFit, FitFailure, GridNode, Sketch, SketchEdge, SketchMode, UnitMovement, WorldviewFit, WorldviewRelation,
};
pub use tension_space::{
    action_movement, classify_movement, classify_shape, classify_shape_with, compute_space_bruteforce,
    compute_space_convolution, position_of, space_for_axes, trace_overlay, Axes, AxisRef, Movement, MovementClass,
    Position, Shape, ShapeClass, ShapeThresholds, SpaceMethod, TensionSpace,
};
