//! Tension spaces: the 2D histogram of (x-worldview distance, y-worldview
//! distance) over every possible actual world, plus movement and shape
//! classification on top of it.

use std::fmt;

use crate::error::{Error, Result};
use crate::metrics::{distance_unchecked, value_dist};
use crate::model::{
    apply_postcondition, precondition_satisfied, Action, NarrativeSystem, RangeSpec, TruthValue, World,
};
use crate::simulation::Trace;

/// Largest number of states the brute-force enumeration will visit.
pub const ENUMERATION_LIMIT: u128 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub x: u32,
    pub y: u32,
}

impl Position {
    pub fn new(x: u32, y: u32) -> Self {
        Position { x, y }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A `character:theme` reference to one worldview.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AxisRef {
    pub character: String,
    pub theme: String,
}

impl AxisRef {
    pub fn new(character: impl Into<String>, theme: impl Into<String>) -> Self {
        AxisRef {
            character: character.into(),
            theme: theme.into(),
        }
    }

    pub fn resolve<'a>(&self, system: &'a NarrativeSystem) -> Result<&'a World> {
        system.character(&self.character)?.worldview(&self.theme)
    }
}

impl fmt::Display for AxisRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.character, self.theme)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Axes {
    pub x: AxisRef,
    pub y: AxisRef,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensionSpace {
    /// Indexed `[x][y]`, dimensions `(x_max + 1) × (y_max + 1)`.
    pub counts: Vec<Vec<u128>>,
    pub x_max: u32,
    pub y_max: u32,
    pub axes: Option<Axes>,
}

impl TensionSpace {
    fn zeroed(x_max: u32, y_max: u32) -> Self {
        TensionSpace {
            counts: vec![vec![0; y_max as usize + 1]; x_max as usize + 1],
            x_max,
            y_max,
            axes: None,
        }
    }

    pub fn with_axes(mut self, axes: Axes) -> Self {
        self.axes = Some(axes);
        self
    }

    pub fn count(&self, x: u32, y: u32) -> u128 {
        self.counts
            .get(x as usize)
            .and_then(|col| col.get(y as usize))
            .copied()
            .unwrap_or(0)
    }

    pub fn total(&self) -> u128 {
        self.counts.iter().flatten().sum()
    }

    pub fn max_count(&self) -> u128 {
        self.counts.iter().flatten().copied().max().unwrap_or(0)
    }

    /// Nonzero cells in x-major order.
    pub fn cells(&self) -> impl Iterator<Item = (Position, u128)> + '_ {
        self.counts.iter().enumerate().flat_map(|(x, col)| {
            col.iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(move |(y, &c)| (Position::new(x as u32, y as u32), c))
        })
    }

    pub fn supports(&self, position: Position) -> bool {
        self.count(position.x, position.y) > 0
    }

    pub fn transpose(&self) -> TensionSpace {
        let mut out = TensionSpace::zeroed(self.y_max, self.x_max);
        for (p, c) in self.cells() {
            out.counts[p.y as usize][p.x as usize] = c;
        }
        out.axes = self.axes.as_ref().map(|a| Axes {
            x: a.y.clone(),
            y: a.x.clone(),
        });
        out
    }
}

/// Largest distance any ⊥-free world can have to `world`.
pub fn max_distance(world: &World, range: RangeSpec) -> u32 {
    world
        .iter()
        .filter_map(TruthValue::grade)
        .map(|g| range.max_value_distance(g))
        .sum()
}

pub fn position_of(w_x: &World, w_y: &World, state: &World) -> Position {
    Position::new(distance_unchecked(w_x, state), distance_unchecked(w_y, state))
}

fn grade_distance(world: &World, grades: &[u32]) -> u32 {
    world
        .iter()
        .zip(grades)
        .map(|(v, &g)| value_dist(v, TruthValue::Grade(g)))
        .sum()
}

fn check_lengths(w_x: &World, w_y: &World, len: usize) -> Result<()> {
    for w in [w_x, w_y] {
        if w.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                found: w.len(),
            });
        }
    }
    Ok(())
}

/// Builds the space by visiting every assignment of `prop_count` propositions.
pub fn compute_space_bruteforce(w_x: &World, w_y: &World, range: RangeSpec, prop_count: usize) -> Result<TensionSpace> {
    check_lengths(w_x, w_y, prop_count)?;
    let span = u128::from(range.span());
    let states = u32::try_from(prop_count)
        .ok()
        .and_then(|n| span.checked_pow(n))
        .unwrap_or(u128::MAX);
    if states > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            states,
            limit: ENUMERATION_LIMIT,
        });
    }

    let mut space = TensionSpace::zeroed(max_distance(w_x, range), max_distance(w_y, range));
    let mut grades = vec![range.min; prop_count];
    loop {
        let x = grade_distance(w_x, &grades);
        let y = grade_distance(w_y, &grades);
        space.counts[x as usize][y as usize] += 1;

        // odometer increment, last proposition fastest
        let mut i = prop_count;
        loop {
            if i == 0 {
                return Ok(space);
            }
            i -= 1;
            if grades[i] < range.max {
                grades[i] += 1;
                break;
            }
            grades[i] = range.min;
        }
    }
}

/// Builds the same histogram by convolving, one proposition at a time, the
/// distribution of per-proposition displacements. Polynomial in |P|.
pub fn compute_space_convolution(w_x: &World, w_y: &World, range: RangeSpec) -> Result<TensionSpace> {
    check_lengths(w_x, w_y, w_x.len())?;
    let mut acc = TensionSpace::zeroed(0, 0);
    acc.counts[0][0] = 1;

    for (vx, vy) in w_x.iter().zip(w_y.iter()) {
        let step_x = vx.grade().map_or(0, |g| range.max_value_distance(g));
        let step_y = vy.grade().map_or(0, |g| range.max_value_distance(g));
        let mut local = vec![vec![0u128; step_y as usize + 1]; step_x as usize + 1];
        for v in range.grades() {
            let dx = value_dist(vx, TruthValue::Grade(v)) as usize;
            let dy = value_dist(vy, TruthValue::Grade(v)) as usize;
            local[dx][dy] += 1;
        }

        let mut next = TensionSpace::zeroed(acc.x_max + step_x, acc.y_max + step_y);
        for (p, c) in acc.cells() {
            for (dx, col) in local.iter().enumerate() {
                for (dy, &k) in col.iter().enumerate() {
                    if k > 0 {
                        next.counts[p.x as usize + dx][p.y as usize + dy] += c * k;
                    }
                }
            }
        }
        acc = next;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceMethod {
    Convolution,
    BruteForce,
}

/// Tension space for two named worldviews of `system`.
pub fn space_for_axes(system: &NarrativeSystem, axes: &Axes, method: SpaceMethod) -> Result<TensionSpace> {
    let w_x = axes.x.resolve(system)?;
    let w_y = axes.y.resolve(system)?;
    let space = match method {
        SpaceMethod::Convolution => compute_space_convolution(w_x, w_y, system.range)?,
        SpaceMethod::BruteForce => compute_space_bruteforce(w_x, w_y, system.range, system.proposition_count())?,
    };
    Ok(space.with_axes(axes.clone()))
}

/// Movement class 1–9 by the sign pattern of a displacement. Positive means the
/// distance to that axis' worldview grew (conflict), negative that it shrank
/// (harmony), zero that the axis did not care.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MovementClass(u8);

impl MovementClass {
    pub fn new(class: u8) -> Option<Self> {
        (1..=9).contains(&class).then_some(MovementClass(class))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Unit displacement `(dx, dy)` for this class.
    pub fn direction(self) -> (i64, i64) {
        match self.0 {
            1 => (0, 1),
            2 => (1, 1),
            3 => (1, 0),
            4 => (1, -1),
            5 => (0, -1),
            6 => (-1, -1),
            7 => (-1, 0),
            8 => (-1, 1),
            _ => (0, 0),
        }
    }

    /// The class of the reversed movement.
    pub fn opposite(self) -> Self {
        match self.0 {
            9 => self,
            c => MovementClass((c + 3) % 8 + 1),
        }
    }
}

impl fmt::Display for MovementClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn classify_movement(dx: i64, dy: i64) -> MovementClass {
    use std::cmp::Ordering::*;
    let class = match (dx.cmp(&0), dy.cmp(&0)) {
        (Equal, Greater) => 1,
        (Greater, Greater) => 2,
        (Greater, Equal) => 3,
        (Greater, Less) => 4,
        (Equal, Less) => 5,
        (Less, Less) => 6,
        (Less, Equal) => 7,
        (Less, Greater) => 8,
        (Equal, Equal) => 9,
    };
    MovementClass(class)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Movement {
    pub from: Position,
    pub to: Position,
    pub class: MovementClass,
    pub dx: i64,
    pub dy: i64,
}

impl Movement {
    pub fn between(from: Position, to: Position) -> Self {
        let dx = i64::from(to.x) - i64::from(from.x);
        let dy = i64::from(to.y) - i64::from(from.y);
        Movement {
            from,
            to,
            class: classify_movement(dx, dy),
            dx,
            dy,
        }
    }
}

/// Where `action` moves the world `state` in the (w_x, w_y) space, or `None`
/// when its precondition does not hold there.
pub fn action_movement(action: &Action, state: &World, w_x: &World, w_y: &World) -> Result<Option<Movement>> {
    if let Some(i) = state.first_dont_care() {
        return Err(Error::DontCareInState(i));
    }
    check_lengths(w_x, w_y, state.len())?;
    if !precondition_satisfied(action, state) {
        return Ok(None);
    }
    let after = apply_postcondition(&action.postcondition, state)?;
    Ok(Some(Movement::between(
        position_of(w_x, w_y, state),
        position_of(w_x, w_y, &after),
    )))
}

/// One movement per successful record of the trace.
pub fn trace_overlay(trace: &Trace, w_x: &World, w_y: &World) -> Vec<Movement> {
    trace
        .successful()
        .map(|r| {
            Movement::between(
                position_of(w_x, w_y, &r.actual_before),
                position_of(w_x, w_y, &r.actual_after),
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Anti-diagonal: most movements harmonise one worldview and conflict the other.
    Strong,
    /// Diagonal: both worldviews tend to move together.
    Weak,
    Neutral,
}

impl Shape {
    pub fn as_str(self) -> &'static str {
        match self {
            Shape::Strong => "strong",
            Shape::Weak => "weak",
            Shape::Neutral => "neutral",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeClass {
    pub shape: Shape,
    pub correlation: f64,
}

/// Correlation cut-offs. A space is strong at or below `strong`, weak at or
/// above `weak`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeThresholds {
    pub strong: f64,
    pub weak: f64,
}

impl Default for ShapeThresholds {
    fn default() -> Self {
        ShapeThresholds {
            strong: -0.4,
            weak: 0.4,
        }
    }
}

/// Count-weighted Pearson correlation of x and y, or `None` when either axis
/// has zero variance.
pub fn weighted_correlation(space: &TensionSpace) -> Option<f64> {
    let total = space.total() as f64;
    if total == 0.0 {
        return None;
    }
    let (mut mx, mut my) = (0.0, 0.0);
    for (p, c) in space.cells() {
        let w = c as f64 / total;
        mx += w * f64::from(p.x);
        my += w * f64::from(p.y);
    }
    let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
    for (p, c) in space.cells() {
        let w = c as f64 / total;
        let (ex, ey) = (f64::from(p.x) - mx, f64::from(p.y) - my);
        vx += w * ex * ex;
        vy += w * ey * ey;
        cov += w * ex * ey;
    }
    const EPS: f64 = 1e-12;
    if vx < EPS || vy < EPS {
        return None;
    }
    Some((cov / (vx.sqrt() * vy.sqrt())).clamp(-1.0, 1.0))
}

pub fn classify_shape(space: &TensionSpace) -> ShapeClass {
    classify_shape_with(space, ShapeThresholds::default())
}

pub fn classify_shape_with(space: &TensionSpace, thresholds: ShapeThresholds) -> ShapeClass {
    match weighted_correlation(space) {
        None => ShapeClass {
            shape: Shape::Neutral,
            correlation: 0.0,
        },
        Some(r) => ShapeClass {
            shape: if r <= thresholds.strong {
                Shape::Strong
            } else if r >= thresholds.weak {
                Shape::Weak
            } else {
                Shape::Neutral
            },
            correlation: r,
        },
    }
}
