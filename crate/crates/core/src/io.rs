//! JSON documents for models, sketches, traces, tension spaces and fit
//! results, plus CSV and PGM heatmap export.
//!
//! Truth values are integers and ⊥ is `null`. Every document carries a
//! `version` field; only version 1 is understood.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use indexmap::IndexMap;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_system, Action, Character, NarrativeSystem, RangeSpec, Rule, Violation, World};
use crate::simulation::{SimulationConfig, StepRecord, Trace};
use crate::sketch::{ActionFit, FailureReason, FitFailure, Sketch, SketchEdge, SketchMode, WorldviewFit};
use crate::tension_space::{Axes, AxisRef, Movement, Position, ShapeClass, TensionSpace};

pub const VERSION: u64 = 1;

type Values = Vec<Option<u32>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeDocument {
    pub min: u32,
    pub max: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterDocument {
    pub name: String,
    pub perceived: Values,
    pub worldviews: BTreeMap<String, Values>,
    #[serde(default)]
    pub actions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionDocument {
    pub name: String,
    pub pre: Values,
    pub post: Values,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub version: u64,
    pub range: RangeDocument,
    pub propositions: Vec<String>,
    pub themes: Vec<String>,
    pub actual_world: Values,
    pub characters: Vec<CharacterDocument>,
    pub actions: Vec<ActionDocument>,
}

impl ModelDocument {
    pub fn from_system(system: &NarrativeSystem) -> Self {
        ModelDocument {
            version: VERSION,
            range: RangeDocument {
                min: system.range.min,
                max: system.range.max,
            },
            propositions: system.propositions.clone(),
            themes: system.themes.clone(),
            actual_world: system.actual.to_options(),
            characters: system
                .characters
                .iter()
                .map(|c| CharacterDocument {
                    name: c.name.clone(),
                    perceived: c.perceived.to_options(),
                    worldviews: c.worldviews.iter().map(|(t, w)| (t.clone(), w.to_options())).collect(),
                    actions: c.actions.clone(),
                })
                .collect(),
            actions: system
                .actions
                .values()
                .map(|a| ActionDocument {
                    name: a.name.clone(),
                    pre: a.precondition.to_options(),
                    post: a.postcondition.to_options(),
                })
                .collect(),
        }
    }

    /// Builds the system without validating it. Duplicate action names, which
    /// the system cannot represent, come back as violations; the first
    /// declaration wins.
    pub fn into_system(self) -> (NarrativeSystem, Vec<Violation>) {
        let mut violations = Vec::new();
        let mut actions = IndexMap::new();
        for a in self.actions {
            if actions.contains_key(&a.name) {
                violations.push(Violation::new(
                    format!("action `{}`", a.name),
                    Rule::DuplicateName,
                    "action name declared more than once",
                ));
                continue;
            }
            actions.insert(
                a.name.clone(),
                Action {
                    name: a.name,
                    precondition: World::from_options(&a.pre),
                    postcondition: World::from_options(&a.post),
                },
            );
        }
        let system = NarrativeSystem {
            propositions: self.propositions,
            themes: self.themes,
            range: RangeSpec {
                min: self.range.min,
                max: self.range.max,
            },
            actual: World::from_options(&self.actual_world),
            characters: self
                .characters
                .into_iter()
                .map(|c| Character {
                    name: c.name,
                    perceived: World::from_options(&c.perceived),
                    worldviews: c
                        .worldviews
                        .into_iter()
                        .map(|(t, w)| (t, World::from_options(&w)))
                        .collect(),
                    actions: c.actions,
                })
                .collect(),
            actions,
        };
        (system, violations)
    }
}

fn check_version(version: u64) -> Result<()> {
    if version == VERSION {
        Ok(())
    } else {
        Err(Error::UnsupportedVersion(version))
    }
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

fn render<T: Serialize>(doc: &T) -> String {
    let mut out = serde_json::to_string_pretty(doc).expect("documents always serialize");
    out.push('\n');
    out
}

/// Parses a model document and converts it, returning every violation instead
/// of failing on them.
pub fn parse_model(text: &str) -> Result<(NarrativeSystem, Vec<Violation>)> {
    check_model(parse(text)?)
}

/// Version check, conversion and validation of an already parsed document.
pub fn check_model(doc: ModelDocument) -> Result<(NarrativeSystem, Vec<Violation>)> {
    check_version(doc.version)?;
    let (system, mut violations) = doc.into_system();
    violations.extend(validate_system(&system));
    Ok((system, violations))
}

/// Like [`check_model`] but rejects invalid models whole.
pub fn accept_model(doc: ModelDocument) -> Result<NarrativeSystem> {
    reject_violations(check_model(doc)?)
}

/// Parses and validates a model; invalid models are rejected whole.
pub fn load_model(text: &str) -> Result<NarrativeSystem> {
    reject_violations(parse_model(text)?)
}

fn reject_violations((system, violations): (NarrativeSystem, Vec<Violation>)) -> Result<NarrativeSystem> {
    if violations.is_empty() {
        Ok(system)
    } else {
        Err(Error::InvalidModel(violations))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationDocument {
    pub entity: String,
    pub rule: String,
    pub detail: String,
}

impl From<&Violation> for ViolationDocument {
    fn from(v: &Violation) -> Self {
        ViolationDocument {
            entity: v.entity.clone(),
            rule: v.rule.code().to_string(),
            detail: v.detail.clone(),
        }
    }
}

pub fn save_model(system: &NarrativeSystem) -> String {
    render(&ModelDocument::from_system(system))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisDocument {
    pub character: String,
    pub theme: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxesDocument {
    pub x: AxisDocument,
    pub y: AxisDocument,
}

impl From<&Axes> for AxesDocument {
    fn from(axes: &Axes) -> Self {
        let axis = |a: &AxisRef| AxisDocument {
            character: a.character.clone(),
            theme: a.theme.clone(),
        };
        AxesDocument {
            x: axis(&axes.x),
            y: axis(&axes.y),
        }
    }
}

impl From<AxesDocument> for Axes {
    fn from(doc: AxesDocument) -> Self {
        Axes {
            x: AxisRef::new(doc.x.character, doc.x.theme),
            y: AxisRef::new(doc.y.character, doc.y.theme),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeDocument {
    Worldview,
    Action,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDocument {
    pub from: [u32; 2],
    pub to: [u32; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SketchDocument {
    pub version: u64,
    pub mode: ModeDocument,
    pub axes: AxesDocument,
    pub edges: Vec<EdgeDocument>,
}

impl SketchDocument {
    pub fn from_sketch(sketch: &Sketch) -> Self {
        SketchDocument {
            version: VERSION,
            mode: match sketch.mode {
                SketchMode::Worldview => ModeDocument::Worldview,
                SketchMode::Action => ModeDocument::Action,
            },
            axes: (&sketch.axes).into(),
            edges: sketch
                .edges
                .iter()
                .map(|e| EdgeDocument {
                    from: [e.start.x, e.start.y],
                    to: [e.end.x, e.end.y],
                    color: e.color.clone(),
                })
                .collect(),
        }
    }

    pub fn into_sketch(self) -> Result<Sketch> {
        check_version(self.version)?;
        Ok(Sketch {
            mode: match self.mode {
                ModeDocument::Worldview => SketchMode::Worldview,
                ModeDocument::Action => SketchMode::Action,
            },
            axes: self.axes.into(),
            edges: self
                .edges
                .into_iter()
                .map(|e| SketchEdge {
                    start: Position::new(e.from[0], e.from[1]),
                    end: Position::new(e.to[0], e.to[1]),
                    color: e.color,
                })
                .collect(),
        })
    }
}

pub fn load_sketch(text: &str) -> Result<Sketch> {
    parse::<SketchDocument>(text)?.into_sketch()
}

pub fn save_sketch(sketch: &Sketch) -> String {
    render(&SketchDocument::from_sketch(sketch))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub max_steps: usize,
    #[serde(default)]
    pub strict_improvement: bool,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepDocument {
    pub character: String,
    pub action: Option<String>,
    pub succeeded: bool,
    pub before: Values,
    pub after: Values,
    pub score: Option<i64>,
}

impl From<&StepRecord> for StepDocument {
    fn from(r: &StepRecord) -> Self {
        StepDocument {
            character: r.character.clone(),
            action: r.chosen_action.clone(),
            succeeded: r.succeeded,
            before: r.actual_before.to_options(),
            after: r.actual_after.to_options(),
            score: r.score,
        }
    }
}

impl From<StepDocument> for StepRecord {
    fn from(d: StepDocument) -> Self {
        StepRecord {
            character: d.character,
            chosen_action: d.action,
            succeeded: d.succeeded,
            actual_before: World::from_options(&d.before),
            actual_after: World::from_options(&d.after),
            score: d.score,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceDocument {
    pub version: u64,
    pub config: ConfigDocument,
    pub steps: Vec<StepDocument>,
}

impl TraceDocument {
    pub fn from_trace(trace: &Trace) -> Self {
        TraceDocument {
            version: VERSION,
            config: ConfigDocument {
                max_steps: trace.config.max_steps,
                strict_improvement: trace.config.strict_improvement,
                seed: trace.config.seed,
            },
            steps: trace.steps.iter().map(StepDocument::from).collect(),
        }
    }

    pub fn into_trace(self) -> Result<Trace> {
        check_version(self.version)?;
        Ok(Trace {
            config: SimulationConfig {
                max_steps: self.config.max_steps,
                strict_improvement: self.config.strict_improvement,
                seed: self.config.seed,
            },
            steps: self.steps.into_iter().map(StepRecord::from).collect(),
        })
    }
}

pub fn load_trace(text: &str) -> Result<Trace> {
    parse::<TraceDocument>(text)?.into_trace()
}

pub fn save_trace(trace: &Trace) -> String {
    render(&TraceDocument::from_trace(trace))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensionSpaceDocument {
    pub version: u64,
    pub axes: Option<AxesDocument>,
    pub x_max: u32,
    pub y_max: u32,
    /// Row-major by x: `counts[x][y]`.
    pub counts: Vec<Vec<u128>>,
}

impl TensionSpaceDocument {
    pub fn from_space(space: &TensionSpace) -> Self {
        TensionSpaceDocument {
            version: VERSION,
            axes: space.axes.as_ref().map(AxesDocument::from),
            x_max: space.x_max,
            y_max: space.y_max,
            counts: space.counts.clone(),
        }
    }

    pub fn into_space(self) -> Result<TensionSpace> {
        check_version(self.version)?;
        let well_formed = self.counts.len() == self.x_max as usize + 1
            && self.counts.iter().all(|col| col.len() == self.y_max as usize + 1);
        if !well_formed {
            return Err(Error::Parse {
                line: 0,
                column: 0,
                message: format!("counts must be a {} x {} grid", self.x_max + 1, self.y_max + 1),
            });
        }
        Ok(TensionSpace {
            counts: self.counts,
            x_max: self.x_max,
            y_max: self.y_max,
            axes: self.axes.map(Axes::from),
        })
    }
}

pub fn load_tension_space(text: &str) -> Result<TensionSpace> {
    parse::<TensionSpaceDocument>(text)?.into_space()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Csv,
    Pgm,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "json" => Ok(ExportFormat::Json),
            "csv" => Ok(ExportFormat::Csv),
            "pgm" => Ok(ExportFormat::Pgm),
            other => Err(format!("unknown format `{other}` (expected json, csv or pgm)")),
        }
    }
}

/// Renders a tension space. CSV lists nonzero cells under an `x,y,count`
/// header. PGM is a plain (P2) greyscale image, one pixel per cell, with y
/// increasing upwards and the fullest cell at 255.
pub fn export_tension_space(space: &TensionSpace, format: ExportFormat) -> Vec<u8> {
    match format {
        ExportFormat::Json => render(&TensionSpaceDocument::from_space(space)).into_bytes(),
        ExportFormat::Csv => {
            let mut out = String::from("x,y,count\n");
            for (p, c) in space.cells() {
                writeln!(out, "{},{},{}", p.x, p.y, c).unwrap();
            }
            out.into_bytes()
        }
        ExportFormat::Pgm => {
            let max = space.max_count().max(1);
            let mut out = format!("P2\n{} {}\n255\n", space.x_max + 1, space.y_max + 1);
            for y in (0..=space.y_max).rev() {
                let row: Vec<String> = (0..=space.x_max)
                    .map(|x| {
                        let c = space.count(x, y);
                        ((c * 255 + max / 2) / max).to_string()
                    })
                    .collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeDocument {
    pub class: String,
    pub correlation: f64,
}

impl From<&ShapeClass> for ShapeDocument {
    fn from(s: &ShapeClass) -> Self {
        ShapeDocument {
            class: s.shape.as_str().to_string(),
            correlation: s.correlation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovementDocument {
    pub action: String,
    pub from: [u32; 2],
    pub to: [u32; 2],
    pub class: u8,
}

impl MovementDocument {
    pub fn new(action: impl Into<String>, movement: &Movement) -> Self {
        MovementDocument {
            action: action.into(),
            from: [movement.from.x, movement.from.y],
            to: [movement.to.x, movement.to.y],
            class: movement.class.get(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureDocument {
    pub edge: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub movement: Option<usize>,
    pub reason: String,
}

impl From<&FitFailure> for FailureDocument {
    fn from(f: &FitFailure) -> Self {
        FailureDocument {
            edge: f.edge,
            movement: f.movement,
            reason: f.reason.as_str().to_string(),
        }
    }
}

impl FailureDocument {
    pub fn to_failure(&self) -> Option<FitFailure> {
        Some(FitFailure {
            edge: self.edge,
            movement: self.movement,
            reason: FailureReason::parse(&self.reason)?,
        })
    }
}

/// Result of either fitting mode; fields the mode does not produce are omitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitResultDocument {
    pub mode: ModeDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted_x: Option<Values>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted_y: Option<Values>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_world: Option<Values>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub actions: Vec<ActionDocument>,
    pub failures: Vec<FailureDocument>,
}

impl FitResultDocument {
    pub fn from_worldviews(fit: &WorldviewFit) -> Self {
        FitResultDocument {
            mode: ModeDocument::Worldview,
            fitted_x: Some(fit.x.to_options()),
            fitted_y: Some(fit.y.to_options()),
            start_world: None,
            actions: Vec::new(),
            failures: fit.failures.iter().map(FailureDocument::from).collect(),
        }
    }

    /// `names` are the names the actions were installed under.
    pub fn from_actions(fit: &ActionFit, names: &[String]) -> Self {
        FitResultDocument {
            mode: ModeDocument::Action,
            fitted_x: None,
            fitted_y: None,
            start_world: Some(fit.start.to_options()),
            actions: fit
                .actions
                .iter()
                .zip(names)
                .map(|(a, name)| ActionDocument {
                    name: name.clone(),
                    pre: a.precondition.to_options(),
                    post: a.postcondition.to_options(),
                })
                .collect(),
            failures: fit.failures.iter().map(FailureDocument::from).collect(),
        }
    }
}
