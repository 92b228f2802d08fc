//! Sketch-based authoring over the binary range.
//!
//! A sketch is an ordered list of edges drawn on the tension-space grid. Each
//! edge decomposes into unit movements, one per proposition touched. Worldview
//! sketches assign each unit movement to a proposition and pick worldview
//! values obeying the movement's relation. Action sketches are treated as a
//! trace: every edge becomes one action found by A* over single-proposition
//! flips of the working world.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metrics::value_dist;
use crate::model::{apply_postcondition, Action, NarrativeSystem, RangeSpec, TruthValue, World};
use crate::tension_space::{classify_movement, position_of, Axes, MovementClass, Position};

/// Upper bound on A* node expansions per edge.
pub const SEARCH_BUDGET: usize = 1 << 20;

/// Upper bound on the unit movements of one worldview sketch.
pub const MOVEMENT_LIMIT: u64 = 1 << 16;

pub type GridNode = Position;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchEdge {
    pub start: GridNode,
    pub end: GridNode,
    /// Display only.
    pub color: Option<String>,
}

impl SketchEdge {
    pub fn new(start: GridNode, end: GridNode) -> Self {
        SketchEdge {
            start,
            end,
            color: None,
        }
    }

    pub fn displacement(&self) -> (i64, i64) {
        (
            i64::from(self.end.x) - i64::from(self.start.x),
            i64::from(self.end.y) - i64::from(self.start.y),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SketchMode {
    Worldview,
    Action,
}

impl SketchMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SketchMode::Worldview => "worldview",
            SketchMode::Action => "action",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sketch {
    pub edges: Vec<SketchEdge>,
    pub mode: SketchMode,
    pub axes: Axes,
}

/// A single-proposition movement in one of the eight directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UnitMovement(MovementClass);

impl UnitMovement {
    pub fn new(class: MovementClass) -> Option<Self> {
        (class.get() != 9).then_some(UnitMovement(class))
    }

    pub fn class(self) -> MovementClass {
        self.0
    }

    pub fn relation(self) -> WorldviewRelation {
        movement_relation(self)
    }
}

impl fmt::Display for UnitMovement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Splits an edge into `min(|dx|, |dy|)` diagonal moves followed by the
/// remaining straight moves along the longer axis.
pub fn decompose_edge(edge: &SketchEdge) -> Result<Vec<UnitMovement>> {
    let (dx, dy) = edge.displacement();
    if dx == 0 && dy == 0 {
        return Err(Error::EmptyEdge(edge.start.x, edge.start.y));
    }
    let diagonal = dx.abs().min(dy.abs());
    let (rx, ry) = (dx - diagonal * dx.signum(), dy - diagonal * dy.signum());
    let diag = classify_movement(dx.signum(), dy.signum());
    let residual = classify_movement(rx.signum(), ry.signum());
    let mut moves = vec![UnitMovement(diag); diagonal as usize];
    moves.extend(std::iter::repeat_n(
        UnitMovement(residual),
        (rx.abs() + ry.abs()) as usize,
    ));
    Ok(moves)
}

/// What a unit movement implies about the two worldviews at the proposition
/// it changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorldviewRelation {
    /// Both set, same value (movements 2 and 6).
    Equal,
    /// Both set, different values (movements 4 and 8).
    Differ,
    /// x is ⊥, y set (movements 1 and 5).
    XDontCare,
    /// x set, y is ⊥ (movements 3 and 7).
    YDontCare,
}

impl WorldviewRelation {
    pub fn as_str(self) -> &'static str {
        match self {
            WorldviewRelation::Equal => "equal",
            WorldviewRelation::Differ => "differ",
            WorldviewRelation::XDontCare => "x-dont-care",
            WorldviewRelation::YDontCare => "y-dont-care",
        }
    }

    /// Whether fully-defined values `x`, `y` satisfy this relation.
    pub fn holds(self, x: TruthValue, y: TruthValue) -> bool {
        use TruthValue::Grade;
        match (self, x, y) {
            (WorldviewRelation::Equal, Grade(a), Grade(b)) => a == b,
            (WorldviewRelation::Differ, Grade(a), Grade(b)) => a != b,
            (WorldviewRelation::XDontCare, TruthValue::DontCare, Grade(_)) => true,
            (WorldviewRelation::YDontCare, Grade(_), TruthValue::DontCare) => true,
            _ => false,
        }
    }
}

pub fn movement_relation(movement: UnitMovement) -> WorldviewRelation {
    match movement.class().get() {
        2 | 6 => WorldviewRelation::Equal,
        4 | 8 => WorldviewRelation::Differ,
        1 | 5 => WorldviewRelation::XDontCare,
        _ => WorldviewRelation::YDontCare,
    }
}

/// A worldview under construction: `None` entries are still unset.
pub type PartialWorld = Vec<Option<TruthValue>>;

/// Treats every ⊥ of a model worldview as unset.
pub fn partial_from_world(world: &World) -> PartialWorld {
    world.iter().map(|v| (!v.is_dont_care()).then_some(v)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    /// Every proposition already carries a movement of this sketch.
    NoFreeProposition,
    /// Free propositions exist but their pre-set values break the relation.
    Incompatible,
    /// A* exhausted the reachable worlds without reaching the end node.
    Unreachable,
    /// A* hit [`SEARCH_BUDGET`] before finishing.
    SearchBudget,
    /// The edge starts at a node no earlier edge reached.
    Disconnected,
    ZeroLength,
    /// An earlier edge failed, so this one was not attempted.
    Skipped,
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::NoFreeProposition => "no-free-proposition",
            FailureReason::Incompatible => "incompatible",
            FailureReason::Unreachable => "unreachable",
            FailureReason::SearchBudget => "search-budget",
            FailureReason::Disconnected => "disconnected",
            FailureReason::ZeroLength => "zero-length",
            FailureReason::Skipped => "skipped",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            FailureReason::NoFreeProposition,
            FailureReason::Incompatible,
            FailureReason::Unreachable,
            FailureReason::SearchBudget,
            FailureReason::Disconnected,
            FailureReason::ZeroLength,
            FailureReason::Skipped,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitFailure {
    pub edge: usize,
    /// Index of the unit movement within the edge; `None` for whole-edge failures.
    pub movement: Option<usize>,
    pub reason: FailureReason,
}

/// Which proposition a fitted unit movement landed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Assignment {
    pub edge: usize,
    pub movement: usize,
    pub proposition: usize,
    pub relation: WorldviewRelation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldviewFit {
    pub x: World,
    pub y: World,
    pub assignments: Vec<Assignment>,
    pub failures: Vec<FitFailure>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionFit {
    pub start: World,
    /// One action per successfully fitted edge, in edge order.
    pub actions: Vec<Action>,
    /// Index of the edge each action realises.
    pub edges: Vec<usize>,
    pub failures: Vec<FitFailure>,
}

fn require_binary(range: RangeSpec) -> Result<()> {
    if range.is_binary() {
        Ok(())
    } else {
        Err(Error::NonBinaryRange {
            min: range.min,
            max: range.max,
        })
    }
}

fn require_mode(sketch: &Sketch, mode: SketchMode) -> Result<()> {
    if sketch.mode == mode {
        Ok(())
    } else {
        Err(Error::WrongSketchMode {
            expected: mode.as_str(),
            found: sketch.mode.as_str(),
        })
    }
}

/// Chooses values for one proposition, or `None` if the pre-set values rule
/// the relation out.
fn fit_values(
    relation: WorldviewRelation,
    x: Option<TruthValue>,
    y: Option<TruthValue>,
    rng: &mut ChaCha8Rng,
) -> Option<(TruthValue, TruthValue)> {
    use TruthValue::{DontCare, Grade};
    let flip = |v: u32| Grade(1 - v);
    match relation {
        WorldviewRelation::Equal | WorldviewRelation::Differ => {
            let related = |v: u32| match relation {
                WorldviewRelation::Equal => Grade(v),
                _ => flip(v),
            };
            match (x, y) {
                (Some(Grade(a)), Some(Grade(b))) => relation.holds(Grade(a), Grade(b)).then_some((Grade(a), Grade(b))),
                (Some(Grade(a)), None) => Some((Grade(a), related(a))),
                (None, Some(Grade(b))) => Some((related(b), Grade(b))),
                (None, None) => {
                    let a = u32::from(rng.random_bool(0.5));
                    Some((Grade(a), related(a)))
                }
                _ => None,
            }
        }
        WorldviewRelation::XDontCare => match (x, y) {
            (Some(Grade(_)), _) | (_, Some(DontCare)) => None,
            (_, Some(b)) => Some((DontCare, b)),
            (_, None) => Some((DontCare, Grade(u32::from(rng.random_bool(0.5))))),
        },
        WorldviewRelation::YDontCare => match (x, y) {
            (_, Some(Grade(_))) | (Some(DontCare), _) => None,
            (Some(a), _) => Some((a, DontCare)),
            (None, _) => Some((Grade(u32::from(rng.random_bool(0.5))), DontCare)),
        },
    }
}

/// Fits a worldview sketch onto two partially-defined worldviews.
///
/// Each unit movement takes the first proposition, in order, that no earlier
/// movement of this sketch used and whose pre-set values admit the movement's
/// relation. Free choices between structurally equivalent values come from a
/// generator seeded with `seed`. Movements that fit nowhere are reported and
/// skipped. Propositions left unset come back as ⊥.
pub fn fit_worldviews(
    sketch: &Sketch,
    partial_x: &[Option<TruthValue>],
    partial_y: &[Option<TruthValue>],
    range: RangeSpec,
    seed: u64,
) -> Result<WorldviewFit> {
    require_mode(sketch, SketchMode::Worldview)?;
    require_binary(range)?;
    let movements: u64 = sketch
        .edges
        .iter()
        .map(|e| {
            let (dx, dy) = e.displacement();
            dx.unsigned_abs().max(dy.unsigned_abs())
        })
        .sum();
    if movements > MOVEMENT_LIMIT {
        return Err(Error::SketchTooLarge {
            movements,
            limit: MOVEMENT_LIMIT,
        });
    }
    if partial_x.len() != partial_y.len() {
        return Err(Error::LengthMismatch {
            expected: partial_x.len(),
            found: partial_y.len(),
        });
    }
    let mut xs = partial_x.to_vec();
    let mut ys = partial_y.to_vec();
    let mut used = vec![false; xs.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = Vec::new();
    let mut failures = Vec::new();

    for (edge_index, edge) in sketch.edges.iter().enumerate() {
        let moves = match decompose_edge(edge) {
            Ok(moves) => moves,
            Err(_) => {
                failures.push(FitFailure {
                    edge: edge_index,
                    movement: None,
                    reason: FailureReason::ZeroLength,
                });
                continue;
            }
        };
        for (move_index, unit) in moves.into_iter().enumerate() {
            let relation = unit.relation();
            let mut fitted = false;
            for p in (0..xs.len()).filter(|&p| !used[p]) {
                if let Some((x, y)) = fit_values(relation, xs[p], ys[p], &mut rng) {
                    xs[p] = Some(x);
                    ys[p] = Some(y);
                    used[p] = true;
                    assignments.push(Assignment {
                        edge: edge_index,
                        movement: move_index,
                        proposition: p,
                        relation,
                    });
                    fitted = true;
                    break;
                }
            }
            if !fitted {
                let reason = if used.iter().all(|&u| u) {
                    FailureReason::NoFreeProposition
                } else {
                    FailureReason::Incompatible
                };
                failures.push(FitFailure {
                    edge: edge_index,
                    movement: Some(move_index),
                    reason,
                });
            }
        }
    }

    let finish = |values: Vec<Option<TruthValue>>| {
        World::new(values.into_iter().map(|v| v.unwrap_or(TruthValue::DontCare)).collect())
    };
    Ok(WorldviewFit {
        x: finish(xs),
        y: finish(ys),
        assignments,
        failures,
    })
}

/// For each proposition index `i`, the set of (x, y) contributions reachable
/// by propositions `i..`, as a dense boolean grid.
struct SuffixSupport {
    grids: Vec<Vec<Vec<bool>>>,
}

impl SuffixSupport {
    fn build(w_x: &World, w_y: &World, range: RangeSpec) -> Self {
        let n = w_x.len();
        let mut grids = vec![vec![vec![true]]; n + 1];
        for i in (0..n).rev() {
            let next = &grids[i + 1];
            let step_x = w_x
                .get(i)
                .and_then(|v| v.grade())
                .map_or(0, |g| range.max_value_distance(g));
            let step_y = w_y
                .get(i)
                .and_then(|v| v.grade())
                .map_or(0, |g| range.max_value_distance(g));
            let mut grid = vec![vec![false; next[0].len() + step_y as usize]; next.len() + step_x as usize];
            for v in range.grades() {
                let dx = value_dist(w_x.values()[i], TruthValue::Grade(v)) as usize;
                let dy = value_dist(w_y.values()[i], TruthValue::Grade(v)) as usize;
                for (x, col) in next.iter().enumerate() {
                    for (y, &ok) in col.iter().enumerate() {
                        if ok {
                            grid[x + dx][y + dy] = true;
                        }
                    }
                }
            }
            grids[i] = grid;
        }
        SuffixSupport { grids }
    }

    fn contains(&self, from: usize, x: i64, y: i64) -> bool {
        let grid = &self.grids[from];
        x >= 0
            && y >= 0
            && grid
                .get(x as usize)
                .and_then(|col| col.get(y as usize))
                .copied()
                .unwrap_or(false)
    }
}

fn search_start_world(
    w_x: &World,
    w_y: &World,
    node: GridNode,
    range: RangeSpec,
    mut pick: impl FnMut(&[u32]) -> u32,
) -> Option<World> {
    if w_x.len() != w_y.len() {
        return None;
    }
    let support = SuffixSupport::build(w_x, w_y, range);
    let (mut rx, mut ry) = (i64::from(node.x), i64::from(node.y));
    if !support.contains(0, rx, ry) {
        return None;
    }
    let mut grades = Vec::with_capacity(w_x.len());
    for i in 0..w_x.len() {
        let feasible: Vec<u32> = range
            .grades()
            .filter(|&v| {
                let dx = i64::from(value_dist(w_x.values()[i], TruthValue::Grade(v)));
                let dy = i64::from(value_dist(w_y.values()[i], TruthValue::Grade(v)));
                support.contains(i + 1, rx - dx, ry - dy)
            })
            .collect();
        let v = pick(&feasible);
        rx -= i64::from(value_dist(w_x.values()[i], TruthValue::Grade(v)));
        ry -= i64::from(value_dist(w_y.values()[i], TruthValue::Grade(v)));
        grades.push(v);
    }
    Some(World::from_grades(&grades))
}

/// The lexicographically smallest ⊥-free world sitting at `node`, if any.
pub fn find_start_world(w_x: &World, w_y: &World, node: GridNode, range: RangeSpec) -> Option<World> {
    search_start_world(w_x, w_y, node, range, |feasible| feasible[0])
}

/// Like [`find_start_world`] but picks among feasible grades with a seeded
/// generator.
pub fn find_start_world_seeded(w_x: &World, w_y: &World, node: GridNode, range: RangeSpec, seed: u64) -> Option<World> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    search_start_world(w_x, w_y, node, range, |feasible| {
        feasible[rng.random_range(0..feasible.len())]
    })
}

#[derive(PartialEq, Eq)]
struct Frontier {
    f: u32,
    /// Propositions flipped so far, in order.
    path: Vec<usize>,
    grades: Vec<u32>,
}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        self.f.cmp(&other.f).then_with(|| self.path.cmp(&other.path))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

enum SearchOutcome {
    Found(Vec<usize>),
    Unreachable,
    Budget,
}

fn manhattan(a: Position, b: Position) -> u32 {
    a.x.abs_diff(b.x) + a.y.abs_diff(b.y)
}

/// A* over single-proposition flips from `start` to any world at `target`.
///
/// A flip moves each coordinate by at most one, so it can close at most two
/// units of Manhattan distance; flips therefore cost 2 and the plain Manhattan
/// distance stays admissible. Ties on f break towards the lexicographically
/// smallest flip sequence.
fn search_flips(w_x: &World, w_y: &World, start: &[u32], target: Position) -> SearchOutcome {
    let position = |grades: &[u32]| position_of(w_x, w_y, &World::from_grades(grades));
    let mut best_g: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut open = BinaryHeap::new();
    best_g.insert(start.to_vec(), 0);
    open.push(Reverse(Frontier {
        f: manhattan(position(start), target),
        path: Vec::new(),
        grades: start.to_vec(),
    }));
    let mut expansions = 0;

    while let Some(Reverse(node)) = open.pop() {
        let g = 2 * node.path.len() as u32;
        if best_g.get(&node.grades).is_some_and(|&best| best < g) {
            continue;
        }
        if position(&node.grades) == target {
            return SearchOutcome::Found(node.path);
        }
        expansions += 1;
        if expansions > SEARCH_BUDGET {
            return SearchOutcome::Budget;
        }
        for p in 0..node.grades.len() {
            let mut grades = node.grades.clone();
            grades[p] = 1 - grades[p];
            let next_g = g + 2;
            if best_g.get(&grades).is_some_and(|&best| best <= next_g) {
                continue;
            }
            best_g.insert(grades.clone(), next_g);
            let mut path = node.path.clone();
            path.push(p);
            open.push(Reverse(Frontier {
                f: next_g + manhattan(position(&grades), target),
                path,
                grades,
            }));
        }
    }
    SearchOutcome::Unreachable
}

/// Turns each edge of an action sketch into an action, treating the sketch as
/// a trace that starts from `start`.
///
/// Every edge must begin at a node already reached: the start node or the end
/// of an earlier fitted edge, whose world it continues from. The first
/// failing edge stops the fit and every later edge is reported as skipped.
pub fn fit_actions(sketch: &Sketch, w_x: &World, w_y: &World, start: &World, range: RangeSpec) -> Result<ActionFit> {
    require_mode(sketch, SketchMode::Action)?;
    require_binary(range)?;
    if let Some(i) = start.first_dont_care() {
        return Err(Error::DontCareInState(i));
    }
    for w in [w_x, w_y] {
        if w.len() != start.len() {
            return Err(Error::LengthMismatch {
                expected: start.len(),
                found: w.len(),
            });
        }
    }
    let origin = position_of(w_x, w_y, start);
    if let Some(first) = sketch.edges.first() {
        if first.start != origin {
            return Err(Error::StartPositionMismatch {
                x: first.start.x,
                y: first.start.y,
                found_x: origin.x,
                found_y: origin.y,
            });
        }
    }

    let mut reached: HashMap<Position, World> = HashMap::from([(origin, start.clone())]);
    let mut actions = Vec::new();
    let mut edges = Vec::new();
    let mut failures = Vec::new();

    for (index, edge) in sketch.edges.iter().enumerate() {
        let failure = if edge.start == edge.end {
            Some(FailureReason::ZeroLength)
        } else if let Some(from) = reached.get(&edge.start).cloned() {
            let grades = from.grades().expect("reached worlds are complete");
            match search_flips(w_x, w_y, &grades, edge.end) {
                SearchOutcome::Found(path) => {
                    let action = action_from_flips(index, &from, &path)?;
                    let to = apply_postcondition(&action.postcondition, &from)?;
                    reached.insert(edge.end, to);
                    actions.push(action);
                    edges.push(index);
                    None
                }
                SearchOutcome::Unreachable => Some(FailureReason::Unreachable),
                SearchOutcome::Budget => Some(FailureReason::SearchBudget),
            }
        } else {
            Some(FailureReason::Disconnected)
        };
        if let Some(reason) = failure {
            failures.push(FitFailure {
                edge: index,
                movement: None,
                reason,
            });
            failures.extend((index + 1..sketch.edges.len()).map(|edge| FitFailure {
                edge,
                movement: None,
                reason: FailureReason::Skipped,
            }));
            break;
        }
    }

    Ok(ActionFit {
        start: start.clone(),
        actions,
        edges,
        failures,
    })
}

/// Precondition holds the old values of the flipped propositions, the
/// postcondition their new values, ⊥ elsewhere.
fn action_from_flips(edge: usize, from: &World, path: &[usize]) -> Result<Action> {
    let mut touched = vec![false; from.len()];
    for &p in path {
        touched[p] = !touched[p];
    }
    let mut pre = World::dont_care(from.len());
    let mut post = World::dont_care(from.len());
    for (p, _) in touched.iter().enumerate().filter(|(_, &t)| t) {
        let old = from.values()[p];
        pre.set(p, old);
        post.set(p, TruthValue::Grade(1 - old.grade().unwrap_or(0)));
    }
    Ok(Action {
        name: format!("edge_{}", edge + 1),
        precondition: pre,
        postcondition: post,
    })
}

/// Writes fitted worldviews into the sketch's axes.
pub fn install_worldviews(system: &mut NarrativeSystem, axes: &Axes, fit: &WorldviewFit) -> Result<()> {
    axes.x.resolve(system)?;
    axes.y.resolve(system)?;
    for (axis, world) in [(&axes.x, &fit.x), (&axes.y, &fit.y)] {
        let character = system.character_mut(&axis.character)?;
        character.worldviews.insert(axis.theme.clone(), world.clone());
    }
    Ok(())
}

/// Adds fitted actions to `system` under fresh names (`{prefix}_{n}`) and
/// appends them to `character`'s action list. Returns the names used.
pub fn install_actions(
    system: &mut NarrativeSystem,
    character: &str,
    actions: &[Action],
    prefix: &str,
) -> Result<Vec<String>> {
    system.character(character)?;
    let mut names = Vec::with_capacity(actions.len());
    let mut n = 1;
    for action in actions {
        let name = loop {
            let candidate = format!("{prefix}_{n}");
            n += 1;
            if !system.actions.contains_key(&candidate) {
                break candidate;
            }
        };
        system.actions.insert(
            name.clone(),
            Action {
                name: name.clone(),
                ..action.clone()
            },
        );
        names.push(name);
    }
    system.character_mut(character)?.actions.extend(names.iter().cloned());
    Ok(names)
}
