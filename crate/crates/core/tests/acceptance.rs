//! Acceptance suite. Runs every criterion, prints one line each and exits
//! non-zero if any failed.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::RngExt;
use tension_core::sketch::{install_actions, install_worldviews, partial_from_world};
use tension_core::{
    apply_postcondition, classify_movement, classify_shape, compute_space_bruteforce, compute_space_convolution,
    decompose_edge, find_start_world, fit_actions, fit_worldviews, fixtures, goal_tension, position_of,
    precondition_satisfied, replay, replay_actions, run, step, trace_overlay, Action, Axes, AxisRef, Character,
    MovementClass, NarrativeSystem, Position, RangeSpec, Shape, SimulationConfig, Sketch, SketchEdge, SketchMode,
    SpaceMethod, TruthValue, World,
};

use common::{naive_apply, naive_distance, naive_total, random_model, random_state, random_world, MOVEMENT_TABLE};

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("bachelor arithmetic", Duration::from_secs(1), bachelor_arithmetic),
        ("generated Fanny fixture", Duration::from_secs(1), generated_fanny),
        ("movement classification table", Duration::from_secs(1), movement_table),
        ("convolution oracle", Duration::from_secs(30), convolution_oracle),
        ("checkerboard parity", Duration::from_secs(10), checkerboard_parity),
        ("shape classification", Duration::from_secs(1), shape_classification),
        ("sketch round-trip", Duration::from_secs(60), sketch_round_trip),
        ("Fanny by sketch", Duration::from_secs(5), fanny_by_sketch),
        ("simulation contract", Duration::from_secs(30), simulation_contract),
    ];

    let mut failed = 0;
    for (name, budget, check) in criteria {
        let started = Instant::now();
        let outcome = check();
        let elapsed = started.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > budget => Err(format!("{detail}; over budget")),
            other => other,
        };
        let timing = format!("{:.3}s / {}s", elapsed.as_secs_f64(), budget.as_secs());
        match outcome {
            Ok(detail) => println!("PASS  {name} [{timing}] {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name} [{timing}] {detail}");
            }
        }
    }
    println!("{} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

const BACHELORS: [(&str, &str); 3] = [("fanny", "william"), ("jane", "frederick"), ("elizabeth", "charles")];

fn character<'a>(system: &'a NarrativeSystem, name: &str) -> &'a Character {
    system
        .characters
        .iter()
        .find(|c| c.name.eq_ignore_ascii_case(name))
        .unwrap_or_else(|| panic!("no character {name}"))
}

/// Per-theme tension before and after `action`, recomputed with the naive
/// distance.
fn theme_tensions(character: &Character, before: &World, after: &World) -> Vec<(String, u32, u32)> {
    character
        .worldviews
        .iter()
        .map(|(t, w)| (t.clone(), naive_distance(w, before), naive_distance(w, after)))
        .collect()
}

fn reductions(system: &NarrativeSystem, start: &World, who: &str) -> Option<Vec<(String, u32)>> {
    let c = character(system, who);
    let before = naive_total(c, start);
    let mut out = Vec::new();
    for (_, bachelor) in BACHELORS {
        let action = system.action(&format!("{who}_{bachelor}")).ok()?;
        if !precondition_satisfied(action, start) {
            return None;
        }
        let after = naive_apply(&action.postcondition, start);
        out.push((bachelor.to_string(), before - naive_total(c, &after)));
    }
    Some(out)
}

fn bachelor_arithmetic() -> Check {
    let system = fixtures::subject_and_subjectivity();
    ensure!(system.proposition_count() == 12, "expected 12 propositions");

    // every per-block start, applied to all three blocks
    let mut reproducing = Vec::new();
    for bits in 0..16u32 {
        let block: Vec<u32> = (0..4).rev().map(|i| (bits >> i) & 1).collect();
        let start = World::from_grades(&block.repeat(3));
        let ok = BACHELORS.iter().all(|(who, ideal)| {
            reductions(&system, &start, who)
                .is_some_and(|r| r.iter().all(|(b, d)| *d == if b == ideal { 5 } else { 3 }))
        });
        if ok {
            reproducing.push(block);
        }
    }
    ensure!(
        reproducing == vec![vec![0, 0, 0, 0]],
        "starts reproducing 5/3/3: {reproducing:?}"
    );
    ensure!(
        system.actual == World::from_grades(&[0; 12]),
        "fixture start is not all-false"
    );

    let start = &system.actual;
    for (who, ideal) in BACHELORS {
        let c = character(&system, who);
        let engine_before = goal_tension(c, start).total;
        ensure!(
            engine_before == naive_total(c, start),
            "{who}: engine tension disagrees"
        );
        let mut zeroed_themes = Vec::new();
        for (_, bachelor) in BACHELORS {
            let action = system.action(&format!("{who}_{bachelor}")).map_err(|e| e.to_string())?;
            let after = apply_postcondition(&action.postcondition, start).map_err(|e| e.to_string())?;
            let reduction = i64::from(engine_before) - i64::from(goal_tension(c, &after).total);
            let expected = if bachelor == ideal { 5 } else { 3 };
            ensure!(
                reduction == expected,
                "{who}_{bachelor}: reduction {reduction}, expected {expected}"
            );
            let zeroed: Vec<String> = theme_tensions(c, start, &after)
                .into_iter()
                .filter(|(_, b, a)| *b > 0 && *a == 0)
                .map(|(t, _, _)| t)
                .collect();
            if bachelor == ideal {
                ensure!(zeroed.len() == 1, "{who}: ideal bachelor zeroes {zeroed:?}");
                zeroed_themes.insert(0, zeroed[0].clone());
            } else if !zeroed.is_empty() {
                ensure!(zeroed.len() == 1, "{who}_{bachelor} zeroes {zeroed:?}");
                zeroed_themes.push(zeroed[0].clone());
            }
        }
        ensure!(
            zeroed_themes.len() == 2 && zeroed_themes[0] != zeroed_themes[1],
            "{who}: zeroing roles {zeroed_themes:?}"
        );
    }
    Ok("unique start (0,0,0,0) per block; ideal -5, others -3".into())
}

/// Checks the 8 → 3/5/5 signature of a Fanny model: personal, family,
/// society at 3, 3, 2; the first action zeroes personal and cuts 5, the
/// other two cut 3 and the third zeroes family.
fn fanny_signature(fanny: &Character, start: &World, actions: &[&Action]) -> Check {
    let tension = |w: &World, theme: &str| naive_distance(&fanny.worldviews[theme], w);
    ensure!(
        fanny.worldviews.len() == 3,
        "expected three worldviews, found {:?}",
        fanny.worldviews.keys()
    );
    let at_start = [
        tension(start, "personal"),
        tension(start, "family"),
        tension(start, "society"),
    ];
    ensure!(at_start == [3, 3, 2], "start tensions {at_start:?}");
    ensure!(goal_tension(fanny, start).total == 8, "engine start total differs");
    ensure!(actions.len() == 3, "expected three actions, found {}", actions.len());

    let mut cuts = Vec::new();
    for (i, action) in actions.iter().enumerate() {
        ensure!(precondition_satisfied(action, start), "action {} not applicable", i + 1);
        let after = apply_postcondition(&action.postcondition, start).map_err(|e| e.to_string())?;
        ensure!(
            after == naive_apply(&action.postcondition, start),
            "apply disagrees with oracle"
        );
        let cut = 8 - i64::from(goal_tension(fanny, &after).total);
        ensure!(cut == i64::from(8 - naive_total(fanny, &after)), "engine total differs");
        cuts.push(cut);
        let zero = |t: &str| tension(&after, t) == 0;
        match i {
            0 => ensure!(
                zero("personal"),
                "action 1 leaves personal at {}",
                tension(&after, "personal")
            ),
            2 => ensure!(
                zero("family"),
                "action 3 leaves family at {}",
                tension(&after, "family")
            ),
            _ => {}
        }
    }
    ensure!(cuts == [5, 3, 3], "reductions {cuts:?}");
    Ok("start 3/3/2 = 8; reductions 5/3/3".into())
}

fn generated_fanny() -> Check {
    let system = fixtures::fanny_generated();
    ensure!(
        system.actual == World::from_grades(&[1, 0, 0, 0]),
        "start world {}",
        system.actual
    );
    let fanny = character(&system, "fanny");
    let actions: Vec<&Action> = ["action_1", "action_2", "action_3"]
        .iter()
        .map(|n| system.action(n))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    fanny_signature(fanny, &system.actual, &actions)
}

fn movement_table() -> Check {
    for ((sx, sy), class) in MOVEMENT_TABLE {
        for scale in [1, 2, 7] {
            let got = classify_movement(sx * scale, sy * scale).get();
            ensure!(
                got == class,
                "({}, {}) classified {got}, expected {class}",
                sx * scale,
                sy * scale
            );
        }
    }
    for ((sx, sy), class) in MOVEMENT_TABLE {
        let c = MovementClass::new(class).ok_or("class out of range")?;
        let reversed = classify_movement(-sx, -sy);
        ensure!(
            c.opposite() == reversed,
            "opposite of {class} is {}",
            c.opposite().get()
        );
        ensure!(c.opposite().opposite() == c, "opposite is not an involution at {class}");
        ensure!(c.direction() == (sx, sy), "direction of {class} is {:?}", c.direction());
    }
    Ok("nine rows; antisymmetric".into())
}

fn convolution_oracle() -> Check {
    let mut rng = common::rng(0xC0DE);
    let mut cells = 0usize;
    for i in 0..500 {
        let range = if i % 2 == 0 {
            RangeSpec::BINARY
        } else {
            RangeSpec::new(2)
        };
        let n = rng.random_range(1..=12usize);
        let dont_care = [0.0, 0.2, 0.5][i % 3];
        let w_x = random_world(&mut rng, n, range, dont_care);
        let w_y = random_world(&mut rng, n, range, dont_care);
        let fast = compute_space_convolution(&w_x, &w_y, range).map_err(|e| e.to_string())?;
        let slow = compute_space_bruteforce(&w_x, &w_y, range, n).map_err(|e| e.to_string())?;
        ensure!(fast == slow, "pair {i} differs: {w_x} vs {w_y}");
        ensure!(
            fast.total() == u128::from(range.span()).pow(n as u32),
            "pair {i}: mass {}",
            fast.total()
        );
        cells += fast.cells().count();
    }
    Ok(format!("500 pairs, {cells} supported cells"))
}

fn checkerboard_parity() -> Check {
    let mut rng = common::rng(0xB0A2D);
    for i in 0..200 {
        let n = rng.random_range(1..=16usize);
        let w_x = random_state(&mut rng, n, RangeSpec::BINARY);
        let w_y = random_state(&mut rng, n, RangeSpec::BINARY);
        let parity = naive_distance(&w_x, &w_y) % 2;
        let space = compute_space_convolution(&w_x, &w_y, RangeSpec::BINARY).map_err(|e| e.to_string())?;
        for (p, _) in space.cells() {
            ensure!(
                (p.x + p.y) % 2 == parity,
                "pair {i}: cell ({}, {}) breaks parity",
                p.x,
                p.y
            );
        }
    }
    Ok("200 pairs".into())
}

fn shape_classification() -> Check {
    let system = fixtures::subject_and_subjectivity();
    let axes = |who: &str, x: &str, y: &str| Axes {
        x: AxisRef::new(character(&system, who).name.clone(), x),
        y: AxisRef::new(character(&system, who).name.clone(), y),
    };
    let labelled = [
        ("fanny", "family", "society", Shape::Strong),
        ("jane", "personal", "society", Shape::Strong),
        ("elizabeth", "personal", "family", Shape::Strong),
        ("fanny", "personal", "society", Shape::Weak),
        ("jane", "personal", "family", Shape::Weak),
        ("elizabeth", "family", "society", Shape::Weak),
    ];
    let mut report = Vec::new();
    for (who, x, y, expected) in labelled {
        let space = tension_core::space_for_axes(&system, &axes(who, x, y), SpaceMethod::Convolution)
            .map_err(|e| e.to_string())?;
        let shape = classify_shape(&space);
        ensure!(
            shape.shape == expected,
            "{who} {x}/{y}: {} (r = {:.3}), expected {}",
            shape.shape.as_str(),
            shape.correlation,
            expected.as_str()
        );
        report.push(format!("{who} {x}/{y} {:+.2}", shape.correlation));
    }
    for c in &system.characters {
        for theme in c.worldviews.keys() {
            let space = tension_core::space_for_axes(&system, &axes(&c.name, theme, theme), SpaceMethod::Convolution)
                .map_err(|e| e.to_string())?;
            let shape = classify_shape(&space);
            ensure!(
                shape.shape == Shape::Weak,
                "{} {theme} self-pair is {}",
                c.name,
                shape.shape.as_str()
            );
        }
    }
    Ok(report.join(", "))
}

fn axes_for(x: &str, y: &str) -> Axes {
    Axes {
        x: AxisRef::new("c", x),
        y: AxisRef::new("c", y),
    }
}

/// Expected relation per class, written out independently of the engine.
fn relation_holds(class: u8, x: TruthValue, y: TruthValue) -> bool {
    use TruthValue::{DontCare, Grade};
    match (class, x, y) {
        (2 | 6, Grade(a), Grade(b)) => a == b,
        (4 | 8, Grade(a), Grade(b)) => a != b,
        (1 | 5, DontCare, Grade(_)) => true,
        (3 | 7, Grade(_), DontCare) => true,
        _ => false,
    }
}

/// A random walk on the grid with at most `budget` unit movements in total.
fn random_walk(rng: &mut impl rand::Rng, budget: usize) -> Vec<SketchEdge> {
    let mut edges = Vec::new();
    let mut at = Position::new(rng.random_range(0..=4), rng.random_range(0..=4));
    let mut left = budget;
    while left > 0 {
        let dx: i64 = rng.random_range(-2..=2);
        let dy: i64 = rng.random_range(-2..=2);
        let units = dx.unsigned_abs().max(dy.unsigned_abs()) as usize;
        let (nx, ny) = (i64::from(at.x) + dx, i64::from(at.y) + dy);
        if units == 0 || units > left || nx < 0 || ny < 0 {
            continue;
        }
        let next = Position::new(nx as u32, ny as u32);
        edges.push(SketchEdge::new(at, next));
        at = next;
        left -= units;
        if rng.random_bool(0.3) {
            break;
        }
    }
    edges
}

fn sketch_round_trip() -> Check {
    let mut rng = common::rng(0x5E7C);
    let mut fitted_pairs = Vec::new();
    let mut movements = 0usize;
    while fitted_pairs.len() < 200 {
        let n = rng.random_range(1..=8usize);
        let budget = rng.random_range(1..=n.min(8));
        let edges = random_walk(&mut rng, budget);
        let sketch = Sketch {
            edges,
            mode: SketchMode::Worldview,
            axes: axes_for("x", "y"),
        };
        let fit = fit_worldviews(&sketch, &vec![None; n], &vec![None; n], RangeSpec::BINARY, rng.random())
            .map_err(|e| e.to_string())?;
        if !fit.failures.is_empty() {
            continue;
        }
        let mut used = BTreeSet::new();
        let mut expected = 0;
        for (e, edge) in sketch.edges.iter().enumerate() {
            let units = decompose_edge(edge).map_err(|e| e.to_string())?;
            expected += units.len();
            for (m, unit) in units.iter().enumerate() {
                let a = fit
                    .assignments
                    .iter()
                    .find(|a| a.edge == e && a.movement == m)
                    .ok_or(format!("movement {e}.{m} unassigned"))?;
                ensure!(used.insert(a.proposition), "proposition {} reused", a.proposition);
                let (x, y) = (fit.x.values()[a.proposition], fit.y.values()[a.proposition]);
                ensure!(
                    relation_holds(unit.class().get(), x, y),
                    "class {} on proposition {} got ({x}, {y})",
                    unit.class().get(),
                    a.proposition
                );
            }
        }
        ensure!(fit.assignments.len() == expected, "assignment count");
        for p in (0..n).filter(|p| !used.contains(p)) {
            ensure!(
                fit.x.values()[p].is_dont_care() && fit.y.values()[p].is_dont_care(),
                "untouched proposition {p} was set"
            );
        }
        movements += expected;
        fitted_pairs.push((fit.x, fit.y));
    }

    let mut edges_checked = 0usize;
    let mut sketches = 0usize;
    let mut attempts = 0usize;
    while sketches < 100 {
        attempts += 1;
        ensure!(attempts < 10_000, "could not generate action sketches");
        let (w_x, w_y) = &fitted_pairs[sketches * 2 % fitted_pairs.len()];
        let n = w_x.len();
        // walk by real flips so every node is supported
        let mut world = random_state(&mut rng, n, RangeSpec::BINARY);
        let start_node = position_of(w_x, w_y, &world);
        let mut nodes = vec![start_node];
        for _ in 0..rng.random_range(1..=4) {
            let mut next = world.clone();
            for p in 0..n {
                if rng.random_bool(0.4) {
                    let g = next.values()[p].grade().unwrap_or(0);
                    next.set(p, TruthValue::Grade(1 - g));
                }
            }
            let node = position_of(w_x, w_y, &next);
            if node != *nodes.last().unwrap() {
                nodes.push(node);
                world = next;
            }
        }
        if nodes.len() < 2 {
            continue;
        }
        let sketch = Sketch {
            edges: nodes.windows(2).map(|w| SketchEdge::new(w[0], w[1])).collect(),
            mode: SketchMode::Action,
            axes: axes_for("x", "y"),
        };
        let start = find_start_world(w_x, w_y, start_node, RangeSpec::BINARY).ok_or("no start world")?;
        let fit = fit_actions(&sketch, w_x, w_y, &start, RangeSpec::BINARY).map_err(|e| e.to_string())?;
        ensure!(fit.failures.is_empty(), "action fit failed: {:?}", fit.failures);
        let trace = replay_actions("c", &start, &fit.actions).map_err(|e| e.to_string())?;
        ensure!(trace.steps.iter().all(|s| s.succeeded), "replayed action failed");
        let overlay = trace_overlay(&trace, w_x, w_y);
        let replayed: Vec<Position> = std::iter::once(overlay[0].from)
            .chain(overlay.iter().map(|m| m.to))
            .collect();
        ensure!(replayed == nodes, "replay visits {replayed:?}, sketched {nodes:?}");
        edges_checked += sketch.edges.len();
        sketches += 1;
    }
    Ok(format!(
        "200 worldview sketches ({movements} movements), 100 action sketches ({edges_checked} edges)"
    ))
}

/// True if `fitted` equals `reference` after permuting propositions and
/// inverting some of them, the same permutation and inversion for every theme.
fn isomorphic(fitted: &Character, reference: &Character) -> bool {
    let themes: Vec<&String> = reference.worldviews.keys().collect();
    if fitted.worldviews.keys().collect::<Vec<_>>() != themes {
        return false;
    }
    let n = reference.perceived.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let matches = |perm: &[usize], mask: u32| {
        themes.iter().all(|t| {
            let f = &fitted.worldviews[*t];
            let r = &reference.worldviews[*t];
            (0..n).all(|i| match (f.values()[perm[i]], r.values()[i]) {
                (TruthValue::Grade(a), TruthValue::Grade(b)) => (a ^ ((mask >> i) & 1)) == b,
                (a, b) => a.is_dont_care() && b.is_dont_care(),
            })
        })
    };
    loop {
        if (0..1u32 << n).any(|mask| matches(&perm, mask)) {
            return true;
        }
        // next permutation
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else {
            return false;
        };
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
}

fn fanny_by_sketch() -> Check {
    let mut system = fixtures::fanny_blank();
    let range = system.range;
    let fanny_name = character(&system, "fanny").name.clone();

    // sketch 1: personal against family
    let diamond = fixtures::fanny_diamond_sketch();
    let blank = |s: &NarrativeSystem, a: &AxisRef| a.resolve(s).map(partial_from_world);
    let px = blank(&system, &diamond.axes.x).map_err(|e| e.to_string())?;
    let py = blank(&system, &diamond.axes.y).map_err(|e| e.to_string())?;
    let fit = fit_worldviews(&diamond, &px, &py, range, 0).map_err(|e| e.to_string())?;
    install_worldviews(&mut system, &diamond.axes, &fit).map_err(|e| e.to_string())?;

    // sketch 2: society against the family worldview just fitted
    let strong = fixtures::fanny_society_family_sketch();
    let px = blank(&system, &strong.axes.x).map_err(|e| e.to_string())?;
    let py = blank(&system, &strong.axes.y).map_err(|e| e.to_string())?;
    let fit = fit_worldviews(&strong, &px, &py, range, 0).map_err(|e| e.to_string())?;
    ensure!(fit.failures.is_empty(), "society sketch failures {:?}", fit.failures);
    install_worldviews(&mut system, &strong.axes, &fit).map_err(|e| e.to_string())?;

    // sketches 3 to 5: one arrow each from the shared start node
    let arrows = fixtures::fanny_bachelors_sketch();
    let w_x = arrows.axes.x.resolve(&system).map_err(|e| e.to_string())?.clone();
    let w_y = arrows.axes.y.resolve(&system).map_err(|e| e.to_string())?.clone();
    let node = arrows.edges[0].start;
    let start = find_start_world(&w_x, &w_y, node, range).ok_or("no start world at the arrow origin")?;
    system.set_actual_world(start.clone());
    let mut fitted = Vec::new();
    for edge in &arrows.edges {
        let single = Sketch {
            edges: vec![edge.clone()],
            ..arrows.clone()
        };
        let fit = fit_actions(&single, &w_x, &w_y, &start, range).map_err(|e| e.to_string())?;
        ensure!(fit.failures.is_empty(), "arrow failures {:?}", fit.failures);
        fitted.extend(fit.actions);
    }
    let combined = fit_actions(&arrows, &w_x, &w_y, &start, range).map_err(|e| e.to_string())?;
    let strip = |a: &[Action]| {
        a.iter()
            .map(|a| (a.precondition.clone(), a.postcondition.clone()))
            .collect::<Vec<_>>()
    };
    ensure!(
        strip(&combined.actions) == strip(&fitted),
        "branching sketch disagrees with separate arrows"
    );
    let names = install_actions(&mut system, &fanny_name, &fitted, "action").map_err(|e| e.to_string())?;

    let fanny = system.character(&fanny_name).map_err(|e| e.to_string())?.clone();
    let actions: Vec<&Action> = names.iter().map(|n| &system.actions[n]).collect();
    let signature = fanny_signature(&fanny, &start, &actions)?;

    let reference = fixtures::fanny_generated();
    ensure!(
        isomorphic(&fanny, character(&reference, "fanny")),
        "worldviews not isomorphic to the reference model"
    );
    ensure!(
        tension_core::validate_system(&system).is_empty(),
        "reconstructed model is invalid"
    );
    Ok(format!("start {start}; {signature}; worldviews isomorphic"))
}

fn simulation_contract() -> Check {
    let mut steps = 0usize;
    let mut successes = 0usize;
    let mut failures = 0usize;
    for seed in 0..100u64 {
        let mut rng = common::rng(0x51 + seed);
        let model = random_model(&mut rng);
        ensure!(tension_core::validate_system(&model).is_empty(), "model {seed} invalid");
        let config = SimulationConfig {
            max_steps: 25,
            strict_improvement: seed % 2 == 1,
            seed,
        };
        let first = run(&model, &config);
        let second = run(&model, &config);
        ensure!(first == second, "model {seed}: traces differ between runs");

        // step by hand to see the perceived worlds after every step
        let mut system = model.clone();
        let mut records = Vec::new();
        while records.len() < first.steps.len() {
            let round = step(&mut system, &config);
            ensure!(!round.is_empty() || model.characters.is_empty(), "empty round");
            for r in round.iter().filter(|r| r.succeeded) {
                let name = r.chosen_action.as_deref().ok_or("success without action")?;
                let action = model.action(name).map_err(|e| e.to_string())?;
                ensure!(
                    naive_distance(&action.precondition, &r.actual_before) == 0,
                    "model {seed}: {name} succeeded with a failing precondition"
                );
                ensure!(
                    r.actual_after == naive_apply(&action.postcondition, &r.actual_before),
                    "model {seed}: {name} applied wrongly"
                );
                for c in &system.characters {
                    for (p, v) in action.postcondition.iter().enumerate() {
                        if !v.is_dont_care() {
                            ensure!(
                                c.perceived.values()[p] == system.actual.values()[p],
                                "model {seed}: {} disagrees with the actual world at {p}",
                                c.name
                            );
                        }
                    }
                }
            }
            for r in round.iter().filter(|r| !r.succeeded) {
                if let Some(name) = &r.chosen_action {
                    let action = model.action(name).map_err(|e| e.to_string())?;
                    ensure!(
                        naive_distance(&action.precondition, &r.actual_before) != 0,
                        "model {seed}: {name} failed with a holding precondition"
                    );
                    ensure!(r.actual_after == r.actual_before, "failed action changed the world");
                }
            }
            records.extend(round);
        }
        ensure!(records == first.steps, "model {seed}: stepping disagrees with run");
        let replayed = replay(&model, &first).map_err(|e| e.to_string())?;
        ensure!(
            Some(&replayed.actual) == first.final_world().or(Some(&model.actual)),
            "model {seed}: replay ends elsewhere"
        );
        steps += first.steps.len();
        successes += first.successful().count();
        failures += first
            .steps
            .iter()
            .filter(|s| s.chosen_action.is_some() && !s.succeeded)
            .count();
    }
    Ok(format!(
        "100 models, {steps} records, {successes} successes, {failures} failed attempts"
    ))
}
