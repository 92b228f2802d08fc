//! Model-level wrappers used by the command line and the HTTP server: apply a
//! sketch to a whole model, list action arrows, parse axis addresses.

use crate::error::{Error, Result};
use crate::model::{validate_system, NarrativeSystem, World};
use crate::sketch::{
    find_start_world, fit_actions, fit_worldviews, install_actions, install_worldviews, partial_from_world, ActionFit,
    FailureReason, FitFailure, Sketch, SketchMode, WorldviewFit,
};
use crate::tension_space::{action_movement, position_of, Axes, AxisRef, Movement};

/// Prefix for the names of fitted actions.
pub const ACTION_PREFIX: &str = "action";

/// Parses `character:theme`. Exactly one colon is allowed.
pub fn parse_axis(text: &str) -> std::result::Result<AxisRef, String> {
    match text.split(':').collect::<Vec<_>>().as_slice() {
        [c, t] if !c.is_empty() && !t.is_empty() => Ok(AxisRef::new(*c, *t)),
        _ => Err(format!("axis `{text}` is not of the form character:theme")),
    }
}

fn check_distinct(axes: &Axes) -> Result<()> {
    if axes.x == axes.y {
        Err(Error::SameAxes(axes.x.to_string()))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct WorldviewOutcome {
    pub system: NarrativeSystem,
    pub fit: WorldviewFit,
}

/// Fits a worldview sketch against the model's current worldviews on the
/// sketch axes (⊥ entries are free) and writes the result back.
pub fn apply_worldview_sketch(system: &NarrativeSystem, sketch: &Sketch, seed: u64) -> Result<WorldviewOutcome> {
    check_distinct(&sketch.axes)?;
    let x = partial_from_world(sketch.axes.x.resolve(system)?);
    let y = partial_from_world(sketch.axes.y.resolve(system)?);
    let fit = fit_worldviews(sketch, &x, &y, system.range, seed)?;
    let mut updated = system.clone();
    install_worldviews(&mut updated, &sketch.axes, &fit)?;
    ensure_valid(&updated)?;
    Ok(WorldviewOutcome { system: updated, fit })
}

#[derive(Debug, Clone)]
pub struct ActionOutcome {
    pub system: NarrativeSystem,
    pub fit: ActionFit,
    /// Names the fitted actions were installed under, in fit order.
    pub names: Vec<String>,
}

/// Fits an action sketch and installs the actions for the x-axis character.
///
/// The model's actual world is kept as the start when it sits on the first
/// edge's start node. Otherwise the smallest world at that node becomes the
/// new actual world, and every perceived world is reset to it. When no world
/// sits there the whole sketch fails and the model is returned unchanged.
pub fn apply_action_sketch(system: &NarrativeSystem, sketch: &Sketch) -> Result<ActionOutcome> {
    if sketch.mode != SketchMode::Action {
        return Err(Error::WrongSketchMode {
            expected: SketchMode::Action.as_str(),
            found: sketch.mode.as_str(),
        });
    }
    let w_x = sketch.axes.x.resolve(system)?.clone();
    let w_y = sketch.axes.y.resolve(system)?.clone();
    let Some(first) = sketch.edges.first() else {
        return Ok(ActionOutcome {
            system: system.clone(),
            fit: ActionFit {
                start: system.actual.clone(),
                actions: Vec::new(),
                edges: Vec::new(),
                failures: Vec::new(),
            },
            names: Vec::new(),
        });
    };

    let start = if position_of(&w_x, &w_y, &system.actual) == first.start {
        Some(system.actual.clone())
    } else {
        find_start_world(&w_x, &w_y, first.start, system.range)
    };
    let Some(start) = start else {
        let failures = (0..sketch.edges.len())
            .map(|edge| FitFailure {
                edge,
                movement: None,
                reason: if edge == 0 {
                    FailureReason::Unreachable
                } else {
                    FailureReason::Skipped
                },
            })
            .collect();
        return Ok(ActionOutcome {
            system: system.clone(),
            fit: ActionFit {
                start: system.actual.clone(),
                actions: Vec::new(),
                edges: Vec::new(),
                failures,
            },
            names: Vec::new(),
        });
    };

    let fit = fit_actions(sketch, &w_x, &w_y, &start, system.range)?;
    let mut updated = system.clone();
    if updated.actual != start {
        updated.set_actual_world(start);
    }
    let names = install_actions(&mut updated, &sketch.axes.x.character, &fit.actions, ACTION_PREFIX)?;
    ensure_valid(&updated)?;
    Ok(ActionOutcome {
        system: updated,
        fit,
        names,
    })
}

fn ensure_valid(system: &NarrativeSystem) -> Result<()> {
    let violations = validate_system(system);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidModel(violations))
    }
}

/// Arrow of every action applicable at `world`, in declaration order.
pub fn movements_at(system: &NarrativeSystem, axes: &Axes, world: &World) -> Result<Vec<(String, Movement)>> {
    let w_x = axes.x.resolve(system)?;
    let w_y = axes.y.resolve(system)?;
    let mut out = Vec::new();
    for (name, action) in &system.actions {
        if let Some(m) = action_movement(action, world, w_x, w_y)? {
            out.push((name.clone(), m));
        }
    }
    Ok(out)
}
