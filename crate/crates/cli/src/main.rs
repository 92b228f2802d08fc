//! `tension`: batch front end to the narrative engine.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage error, 3 runtime error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tension_core::authoring::{apply_action_sketch, apply_worldview_sketch, movements_at, parse_axis};
use tension_core::io::{
    export_tension_space, load_sketch, load_trace, parse_model, save_model, save_trace, ExportFormat,
    FitResultDocument, MovementDocument, ShapeDocument,
};
use tension_core::lint::lint_system;
use tension_core::{
    classify_shape_with, replay, run, space_for_axes, Axes, Error, NarrativeSystem, ShapeThresholds, SimulationConfig,
    SpaceMethod, Violation, World,
};

#[derive(Parser)]
#[command(name = "tension", version, about = "Possible-worlds narrative engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Conv,
    Brute,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pgm,
}

#[derive(clap::Args)]
struct AxisArgs {
    /// x axis as character:theme
    #[arg(long)]
    x: String,
    /// y axis as character:theme
    #[arg(long)]
    y: String,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model and warn about simulation hazards.
    Validate { model: PathBuf },
    /// Run the greedy simulation and write the trace.
    Simulate {
        model: PathBuf,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Only accept strictly tension-reducing actions.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the tension space of two worldviews.
    Tension {
        model: PathBuf,
        #[command(flatten)]
        axes: AxisArgs,
        #[arg(long, value_enum, default_value_t = Method::Conv)]
        method: Method,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the arrow of every action applicable at a world.
    Movements {
        model: PathBuf,
        #[command(flatten)]
        axes: AxisArgs,
        /// `start`, `current` or a comma-separated list of values
        #[arg(long, default_value = "start")]
        world: String,
        /// Trace whose final world is `current`
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the worldviews on a sketch's axes.
    FitWorldviews {
        model: PathBuf,
        sketch: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the fit result document
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Fit one action per edge of an action sketch.
    FitActions {
        model: PathBuf,
        sketch: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Classify the shape of a tension space.
    Shape {
        model: PathBuf,
        #[command(flatten)]
        axes: AxisArgs,
        #[arg(long, default_value_t = -0.4, allow_hyphen_values = true)]
        strong: f64,
        #[arg(long, default_value_t = 0.4)]
        weak: f64,
    },
}

enum Failure {
    Invalid(String),
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invalid(m) | Failure::Usage(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        match err {
            Error::InvalidModel(violations) => Failure::Invalid(describe(&violations)),
            Error::EnumerationTooLarge { .. } | Error::ReplayDiverged { .. } => Failure::Runtime(err.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn describe(violations: &[Violation]) -> String {
    let lines: Vec<String> = violations
        .iter()
        .map(|v| format!("  {}: [{}] {}", v.entity, v.rule.code(), v.detail))
        .collect();
    format!("model has {} violation(s):\n{}", violations.len(), lines.join("\n"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Validate { model } => validate(&model),
        Command::Simulate {
            model,
            steps,
            seed,
            strict,
            out,
        } => {
            guard_output(out.as_deref(), &[&model])?;
            let system = read_model(&model)?;
            let config = SimulationConfig {
                max_steps: steps,
                strict_improvement: strict,
                seed,
            };
            emit(out.as_deref(), save_trace(&run(&system, &config)).as_bytes())
        }
        Command::Tension {
            model,
            axes,
            method,
            format,
            out,
        } => {
            guard_output(out.as_deref(), &[&model])?;
            let system = read_model(&model)?;
            let axes = resolve_axes(&system, &axes)?;
            let method = match method {
                Method::Conv => SpaceMethod::Convolution,
                Method::Brute => SpaceMethod::BruteForce,
            };
            let space = space_for_axes(&system, &axes, method)?;
            let format = match format {
                Format::Json => ExportFormat::Json,
                Format::Csv => ExportFormat::Csv,
                Format::Pgm => ExportFormat::Pgm,
            };
            emit(out.as_deref(), &export_tension_space(&space, format))
        }
        Command::Movements {
            model,
            axes,
            world,
            trace,
            out,
        } => {
            let mut inputs = vec![model.as_path()];
            inputs.extend(trace.as_deref());
            guard_output(out.as_deref(), &inputs)?;
            let system = read_model(&model)?;
            let axes = resolve_axes(&system, &axes)?;
            let state = pick_world(&system, &world, trace.as_deref())?;
            let docs: Vec<MovementDocument> = movements_at(&system, &axes, &state)?
                .iter()
                .map(|(name, m)| MovementDocument::new(name.clone(), m))
                .collect();
            emit(out.as_deref(), &to_json(&docs))
        }
        Command::FitWorldviews {
            model,
            sketch,
            seed,
            out,
            report,
        } => {
            guard_output(out.as_deref(), &[&model, &sketch])?;
            guard_output(report.as_deref(), &[&model, &sketch])?;
            let system = read_model(&model)?;
            let sketch = load_sketch(&read(&sketch)?)?;
            let outcome = apply_worldview_sketch(&system, &sketch, seed)?;
            let doc = FitResultDocument::from_worldviews(&outcome.fit);
            finish_fit(&doc, report.as_deref())?;
            emit(out.as_deref(), save_model(&outcome.system).as_bytes())
        }
        Command::FitActions {
            model,
            sketch,
            out,
            report,
        } => {
            guard_output(out.as_deref(), &[&model, &sketch])?;
            guard_output(report.as_deref(), &[&model, &sketch])?;
            let system = read_model(&model)?;
            let sketch = load_sketch(&read(&sketch)?)?;
            let outcome = apply_action_sketch(&system, &sketch)?;
            let doc = FitResultDocument::from_actions(&outcome.fit, &outcome.names);
            finish_fit(&doc, report.as_deref())?;
            emit(out.as_deref(), save_model(&outcome.system).as_bytes())
        }
        Command::Shape {
            model,
            axes,
            strong,
            weak,
        } => {
            if strong > weak {
                return Err(Failure::Usage(format!("--strong {strong} is above --weak {weak}")));
            }
            let system = read_model(&model)?;
            let axes = resolve_axes(&system, &axes)?;
            let space = space_for_axes(&system, &axes, SpaceMethod::Convolution)?;
            let shape = classify_shape_with(&space, ShapeThresholds { strong, weak });
            emit(None, &to_json(&ShapeDocument::from(&shape)))
        }
    }
}

fn validate(path: &Path) -> Outcome {
    let text = read(path)?;
    let (system, violations) = parse_model(&text)?;
    if !violations.is_empty() {
        return Err(Failure::Invalid(describe(&violations)));
    }
    for lint in lint_system(&system) {
        eprintln!(
            "warning: [{}] {} / {}: {}",
            lint.kind.code(),
            lint.character,
            lint.action,
            lint.detail
        );
    }
    println!(
        "ok: {} propositions, {} characters, {} actions",
        system.proposition_count(),
        system.characters.len(),
        system.actions.len()
    );
    Ok(())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("cannot read {}: {e}", path.display())))
}

fn read_model(path: &Path) -> Result<NarrativeSystem, Failure> {
    let (system, violations) = parse_model(&read(path)?)?;
    if violations.is_empty() {
        Ok(system)
    } else {
        Err(Failure::Invalid(describe(&violations)))
    }
}

fn resolve_axes(system: &NarrativeSystem, args: &AxisArgs) -> Result<Axes, Failure> {
    let x = parse_axis(&args.x).map_err(Failure::Usage)?;
    let y = parse_axis(&args.y).map_err(Failure::Usage)?;
    for axis in [&x, &y] {
        axis.resolve(system)
            .map_err(|e| Failure::Usage(format!("--x/--y {axis}: {e}")))?;
    }
    Ok(Axes { x, y })
}

fn pick_world(system: &NarrativeSystem, spec: &str, trace: Option<&Path>) -> Result<World, Failure> {
    match spec {
        "start" => Ok(system.actual.clone()),
        "current" => match trace {
            None => Ok(system.actual.clone()),
            Some(path) => {
                let trace = load_trace(&read(path)?)?;
                Ok(replay(system, &trace)?.actual)
            }
        },
        list => {
            let grades = list
                .split(',')
                .map(|v| v.trim().parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| Failure::Usage(format!("--world `{list}` is not start, current or a value list")))?;
            if grades.len() != system.proposition_count() || !grades.iter().all(|&g| system.range.contains(g)) {
                return Err(Failure::Usage(format!(
                    "--world needs {} values in [{}, {}]",
                    system.proposition_count(),
                    system.range.min,
                    system.range.max
                )));
            }
            Ok(World::from_grades(&grades))
        }
    }
}

fn finish_fit(doc: &FitResultDocument, report: Option<&Path>) -> Outcome {
    for f in &doc.failures {
        match f.movement {
            Some(m) => eprintln!("fit: edge {} movement {}: {}", f.edge, m, f.reason),
            None => eprintln!("fit: edge {}: {}", f.edge, f.reason),
        }
    }
    match report {
        Some(path) => write_atomic(path, &to_json(doc)),
        None => Ok(()),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("documents always serialize");
    out.push(b'\n');
    out
}

/// Refuses to write over any input.
fn guard_output(out: Option<&Path>, inputs: &[&Path]) -> Outcome {
    let Some(out) = out else {
        return Ok(());
    };
    let Ok(target) = out.canonicalize() else {
        return Ok(());
    };
    for input in inputs {
        if input.canonicalize().is_ok_and(|i| i == target) {
            return Err(Failure::Usage(format!(
                "refusing to overwrite input {}",
                input.display()
            )));
        }
    }
    Ok(())
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Outcome {
    match out {
        Some(path) => write_atomic(path, bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::Runtime(format!("cannot write output: {e}"))),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Outcome {
    let fail = |e: std::io::Error| Failure::Runtime(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}
