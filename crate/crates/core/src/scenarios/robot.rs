//! A robot on a grid partitioned into public areas.
//!
//! Two systems share the grid. In the observational-determinism system the
//! robot follows a deterministic strategy through a public sequence of
//! input areas towards a secret target cell; a leaky strategy lets the
//! target influence the route. In the opacity system the robot starts in
//! one of several secret cells and moves nondeterministically through the
//! input areas; the observer only sees areas.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hash::hash_of;
use crate::trace::{Trace, Valuation, Value};

pub const DELIMITER: &str = "•";
pub const PADDING: &str = "#";

/// `(row, column)`.
pub type Cell = (i64, i64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Act {
    Left,
    Right,
    Up,
    Down,
    Stand,
}

impl Act {
    pub const MOVES: [Act; 4] = [Act::Left, Act::Right, Act::Up, Act::Down];

    pub fn name(self) -> &'static str {
        match self {
            Act::Left => "left",
            Act::Right => "right",
            Act::Up => "up",
            Act::Down => "down",
            Act::Stand => "stand",
        }
    }

    pub fn apply(self, (r, c): Cell) -> Cell {
        match self {
            Act::Left => (r, c - 1),
            Act::Right => (r, c + 1),
            Act::Up => (r - 1, c),
            Act::Down => (r + 1, c),
            Act::Stand => (r, c),
        }
    }
}

/// A `height × width` grid cut into `block × block` areas, numbered row by
/// row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    pub width: i64,
    pub height: i64,
    pub block: i64,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            width: 10,
            height: 10,
            block: 2,
        }
    }
}

impl Grid {
    pub fn areas(&self) -> i64 {
        self.area_columns() * ((self.height + self.block - 1) / self.block)
    }

    fn area_columns(&self) -> i64 {
        (self.width + self.block - 1) / self.block
    }

    pub fn contains(&self, (r, c): Cell) -> bool {
        (0..self.height).contains(&r) && (0..self.width).contains(&c)
    }

    pub fn area(&self, (r, c): Cell) -> i64 {
        (r / self.block) * self.area_columns() + c / self.block
    }

    /// Cells of an area in row-major order.
    pub fn cells(&self, area: i64) -> Vec<Cell> {
        let (ar, ac) = (area / self.area_columns(), area % self.area_columns());
        let mut out = Vec::new();
        for r in ar * self.block..((ar + 1) * self.block).min(self.height) {
            for c in ac * self.block..((ac + 1) * self.block).min(self.width) {
                out.push((r, c));
            }
        }
        out
    }

    /// Manhattan distance from a cell to the nearest cell of an area.
    pub fn distance(&self, cell: Cell, area: i64) -> i64 {
        self.cells(area)
            .iter()
            .map(|&(r, c)| (r - cell.0).abs() + (c - cell.1).abs())
            .min()
            .unwrap_or(i64::MAX)
    }

    /// A random walk-free sequence of `len` areas, consecutive ones distinct.
    pub fn random_input(&self, rng: &mut impl Rng, len: usize) -> Vec<i64> {
        let mut out: Vec<i64> = Vec::with_capacity(len);
        while out.len() < len {
            let a = rng.gen_range(0..self.areas());
            if out.last() != Some(&a) {
                out.push(a);
            }
        }
        out
    }
}

/// One event: the input letter at this position, the area the robot is in
/// and the action it takes.
pub fn event(input: Value, area: i64, act: Act) -> Valuation {
    Valuation::from_pairs([
        ("input", input),
        ("area", Value::Int(area)),
        ("act", Value::sym(act.name())),
    ])
}

fn input_letter(input: &[i64], i: usize) -> Value {
    match i.cmp(&input.len()) {
        core::cmp::Ordering::Less => Value::Int(input[i]),
        core::cmp::Ordering::Equal => Value::sym(DELIMITER),
        core::cmp::Ordering::Greater => Value::sym(PADDING),
    }
}

/// Builds events from a path of cells and the actions between them; the
/// last cell gets `stand`.
fn events_of(grid: &Grid, input: &[i64], cells: &[Cell], acts: &[Act]) -> Vec<Valuation> {
    cells
        .iter()
        .enumerate()
        .map(|(i, &cell)| {
            event(
                input_letter(input, i),
                grid.area(cell),
                acts.get(i).copied().unwrap_or(Act::Stand),
            )
        })
        .collect()
}

/// The input areas at the start of a trace, read up to the delimiter.
/// `None` if the trace has no complete input yet.
pub fn inputs_of(trace: &Trace) -> Option<Vec<i64>> {
    let mut out = Vec::new();
    for e in trace.events() {
        match e.get("input")? {
            Value::Int(a) => out.push(*a),
            Value::Sym(s) if &**s == DELIMITER => return Some(out),
            _ => return None,
        }
    }
    None
}

pub fn areas_of(trace: &Trace) -> Vec<i64> {
    trace
        .events()
        .filter_map(|e| e.get("area")?.as_int())
        .collect()
}

pub fn acts_of(trace: &Trace) -> Vec<Value> {
    trace
        .events()
        .filter_map(|e| e.get("act").cloned())
        .collect()
}

/// Observational determinism system: a deterministic strategy keyed by a
/// seed. The robot starts in the top-left cell, walks to the top-left cell
/// of every input area in turn, then to the secret target (a cell of the
/// last input area), and stands until the run has its fixed length.
///
/// Each leg goes either columns-first or rows-first. For a leaky input
/// word the choice also depends on the parity of the target cell, so two
/// targets can produce different area sequences.
#[derive(Clone, Copy, Debug)]
pub struct OdSystem {
    pub grid: Grid,
    pub seed: u64,
    /// Probability that a given input word is leaky.
    pub leak: f64,
}

impl OdSystem {
    pub fn new(seed: u64, leak: f64) -> Self {
        OdSystem {
            grid: Grid::default(),
            seed,
            leak,
        }
    }

    pub fn is_leaky(&self, input: &[i64]) -> bool {
        let h = hash_of(self.seed ^ 0x6c65_616b, input);
        (h as f64 / u64::MAX as f64) < self.leak
    }

    fn parity((r, c): Cell) -> u64 {
        ((r + c) & 1) as u64
    }

    /// Events of the run on `input` towards `target`.
    pub fn run(&self, input: &[i64], target: Cell) -> Vec<Valuation> {
        let leaky = self.is_leaky(input);
        let mut cells = alloc::vec![(0, 0)];
        let mut acts = Vec::new();
        let walk = |cells: &mut Vec<Cell>, acts: &mut Vec<Act>, goal: Cell, cols_first: bool| loop {
            let cur = *cells.last().unwrap();
            let col = if goal.1 < cur.1 {
                Act::Left
            } else {
                Act::Right
            };
            let row = if goal.0 < cur.0 { Act::Up } else { Act::Down };
            let act = match (cur.1 != goal.1, cur.0 != goal.0) {
                (false, false) => break,
                (true, false) => col,
                (false, true) => row,
                (true, true) => {
                    if cols_first {
                        col
                    } else {
                        row
                    }
                }
            };
            acts.push(act);
            cells.push(act.apply(cur));
        };
        for (k, &area) in input.iter().enumerate() {
            let goal = self.grid.cells(area)[0];
            let mut bit = hash_of(self.seed, &(input, k)) & 1;
            if leaky {
                bit ^= Self::parity(target);
            }
            walk(&mut cells, &mut acts, goal, bit == 1);
        }
        walk(&mut cells, &mut acts, target, true);
        // Fixed length per input word: room for the longest final leg
        // inside an area, plus one standing step.
        let final_leg = 2 * (self.grid.block - 1) as usize;
        let target_steps = {
            let goal = input
                .last()
                .map(|&a| self.grid.cells(a)[0])
                .unwrap_or((0, 0));
            ((target.0 - goal.0).abs() + (target.1 - goal.1).abs()) as usize
        };
        let len = (cells.len() - target_steps + final_leg + 1).max(input.len() + 2);
        while cells.len() < len {
            acts.push(Act::Stand);
            cells.push(*cells.last().unwrap());
        }
        events_of(&self.grid, input, &cells, &acts)
    }

    /// A random target inside the last input area.
    pub fn random_target(&self, rng: &mut impl Rng, input: &[i64]) -> Cell {
        let area = input.last().copied().unwrap_or(0);
        *self.grid.cells(area).choose(rng).unwrap()
    }

    /// Up to `n` runs on the inputs of `trace` with fresh random targets,
    /// deterministic in the trace content and the seed.
    pub fn samples(
        &self,
        trace: &Trace,
        n: usize,
        sample_seed: u64,
    ) -> Option<Vec<Vec<Valuation>>> {
        let input = inputs_of(trace)?;
        let mut rng = ChaCha8Rng::seed_from_u64(hash_of(sample_seed, trace.letters()));
        Some(
            (0..n)
                .map(|_| self.run(&input, self.random_target(&mut rng, &input)))
                .collect(),
        )
    }
}

/// Settings of an observational-determinism workload.
#[derive(Clone, Copy, Debug)]
pub struct OdWorkload {
    pub seed: u64,
    pub input_len: usize,
    pub count: usize,
    /// Input words are drawn from this many fixed words; `None` draws
    /// fresh random words.
    pub pool: Option<usize>,
    pub leak: f64,
    /// Seed of the strategy (the system), independent of the trace seed.
    pub strategy_seed: u64,
    /// Insert one violating pair at random positions.
    pub plant: bool,
}

impl Default for OdWorkload {
    fn default() -> Self {
        OdWorkload {
            seed: 0,
            input_len: 4,
            count: 100,
            pool: None,
            leak: 0.5,
            strategy_seed: 1,
            plant: false,
        }
    }
}

/// A generated workload and where its planted violation is.
pub struct OdTraces {
    pub system: OdSystem,
    pub traces: Vec<Trace>,
    pub planted: Option<(usize, usize)>,
}

/// Random runs of the OD system. Trace ids are `t0`, `t1`, ...
pub fn gen_od_traces(w: &OdWorkload) -> OdTraces {
    let system = OdSystem::new(w.strategy_seed, w.leak);
    let grid = system.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(w.seed);
    let pool: Option<Vec<Vec<i64>>> = w.pool.map(|n| {
        (0..n.max(1))
            .map(|_| grid.random_input(&mut rng, w.input_len))
            .collect()
    });
    let mut runs: Vec<Vec<Valuation>> = (0..w.count)
        .map(|_| {
            let input = match &pool {
                Some(p) => p.choose(&mut rng).unwrap().clone(),
                None => grid.random_input(&mut rng, w.input_len),
            };
            let target = system.random_target(&mut rng, &input);
            system.run(&input, target)
        })
        .collect();
    let mut planted = None;
    if w.plant && w.count >= 2 {
        if let Some((a, b)) = violating_pair(&system, &mut rng, w.input_len) {
            let i = rng.gen_range(0..w.count);
            let mut j = rng.gen_range(0..w.count - 1);
            if j >= i {
                j += 1;
            }
            runs[i] = a;
            runs[j] = b;
            planted = Some((i.min(j), i.max(j)));
        }
    }
    let traces = runs
        .into_iter()
        .enumerate()
        .map(|(k, evs)| Trace::complete(&format!("t{k}"), evs))
        .collect();
    OdTraces {
        system,
        traces,
        planted,
    }
}

/// Two runs with the same input and different area sequences.
pub fn violating_pair(
    system: &OdSystem,
    rng: &mut impl Rng,
    input_len: usize,
) -> Option<(Vec<Valuation>, Vec<Valuation>)> {
    for _ in 0..10_000 {
        let input = system.grid.random_input(rng, input_len);
        if !system.is_leaky(&input) {
            continue;
        }
        let cells = system.grid.cells(*input.last().unwrap());
        for &t1 in &cells {
            for &t2 in &cells {
                let (a, b) = (system.run(&input, t1), system.run(&input, t2));
                let area = |evs: &[Valuation]| -> Vec<Value> {
                    evs.iter().map(|e| e.get("area").unwrap().clone()).collect()
                };
                if area(&a) != area(&b) {
                    return Some((a, b));
                }
            }
        }
    }
    None
}

/// Opacity system: the robot starts in one of the secret initial cells,
/// first walks to the gate cell if there is one, then moves closer to the
/// next input area every step (any such move is allowed) until all input
/// areas were visited in order; then it stands. With `deterministic`, it
/// always takes the first allowed move.
#[derive(Clone, Debug)]
pub struct OpacitySystem {
    pub grid: Grid,
    pub initial: Vec<Cell>,
    pub gate: Option<Cell>,
    pub deterministic: bool,
    /// Standing steps appended after the last input area is reached.
    pub tail: usize,
}

/// Where a run stands: whether the gate was passed and how many input
/// areas were visited.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Progress {
    gated: bool,
    visited: usize,
}

impl OpacitySystem {
    /// Two initial cells next to the gate in the top-left corner. Every run
    /// has a twin from the other initial cell with the same areas and a
    /// different first action.
    pub fn opaque() -> Self {
        OpacitySystem {
            grid: Grid::default(),
            initial: alloc::vec![(0, 1), (1, 0)],
            gate: Some((0, 0)),
            deterministic: false,
            tail: 1,
        }
    }

    /// One initial cell and a deterministic strategy: every run is the only
    /// one with its areas.
    pub fn non_opaque() -> Self {
        OpacitySystem {
            grid: Grid::default(),
            initial: alloc::vec![(0, 0)],
            gate: None,
            deterministic: true,
            tail: 1,
        }
    }

    fn closer(&self, cell: Cell, dist: impl Fn(Cell) -> i64) -> Vec<Act> {
        let d = dist(cell);
        let mut out: Vec<Act> = Act::MOVES
            .iter()
            .copied()
            .filter(|a| {
                let c = a.apply(cell);
                self.grid.contains(c) && dist(c) < d
            })
            .collect();
        if out.is_empty() {
            out.push(Act::Stand);
        }
        if self.deterministic {
            out.truncate(1);
        }
        out
    }

    fn moves(&self, cell: Cell, p: Progress, input: &[i64]) -> Vec<Act> {
        match (p.gated, self.gate) {
            (false, Some(g)) => self.closer(cell, |c| (c.0 - g.0).abs() + (c.1 - g.1).abs()),
            _ if p.visited < input.len() => {
                let area = input[p.visited];
                self.closer(cell, |c| self.grid.distance(c, area))
            }
            _ => alloc::vec![Act::Stand],
        }
    }

    fn progress(&self, input: &[i64], mut p: Progress, cell: Cell) -> Progress {
        if !p.gated {
            p.gated = self.gate.is_none_or(|g| g == cell);
        }
        if p.gated {
            while p.visited < input.len() && self.grid.area(cell) == input[p.visited] {
                p.visited += 1;
            }
        }
        p
    }

    fn start(&self, input: &[i64], cell: Cell) -> Progress {
        self.progress(
            input,
            Progress {
                gated: false,
                visited: 0,
            },
            cell,
        )
    }

    fn done(&self, input: &[i64], p: Progress) -> bool {
        p.gated && p.visited == input.len()
    }

    /// A random run from a random initial cell.
    pub fn run(&self, rng: &mut impl Rng, input: &[i64]) -> Vec<Valuation> {
        let start = *self.initial.choose(rng).unwrap();
        let mut cells = alloc::vec![start];
        let mut acts = Vec::new();
        let mut p = self.start(input, start);
        while !self.done(input, p) {
            let cur = *cells.last().unwrap();
            let act = *self.moves(cur, p, input).choose(rng).unwrap();
            acts.push(act);
            let next = act.apply(cur);
            cells.push(next);
            p = self.progress(input, p, next);
        }
        for _ in 0..self.tail {
            acts.push(Act::Stand);
            cells.push(*cells.last().unwrap());
        }
        events_of(&self.grid, input, &cells, &acts)
    }

    /// Every run on `input`, enumerated over all choices of the strategy
    /// (at most `limit` runs).
    pub fn runs(&self, input: &[i64], limit: usize) -> Vec<Vec<Valuation>> {
        struct Ctx<'a> {
            sys: &'a OpacitySystem,
            input: &'a [i64],
            limit: usize,
            cells: Vec<Cell>,
            acts: Vec<Act>,
            out: Vec<Vec<Valuation>>,
        }
        fn go(ctx: &mut Ctx<'_>, p: Progress) {
            if ctx.out.len() >= ctx.limit {
                return;
            }
            if ctx.sys.done(ctx.input, p) {
                let (mut cells, mut acts) = (ctx.cells.clone(), ctx.acts.clone());
                for _ in 0..ctx.sys.tail {
                    acts.push(Act::Stand);
                    cells.push(*cells.last().unwrap());
                }
                ctx.out
                    .push(events_of(&ctx.sys.grid, ctx.input, &cells, &acts));
                return;
            }
            let cur = *ctx.cells.last().unwrap();
            for act in ctx.sys.moves(cur, p, ctx.input) {
                let c = act.apply(cur);
                ctx.cells.push(c);
                ctx.acts.push(act);
                go(ctx, ctx.sys.progress(ctx.input, p, c));
                ctx.cells.pop();
                ctx.acts.pop();
            }
        }
        let mut ctx = Ctx {
            sys: self,
            input,
            limit,
            cells: Vec::new(),
            acts: Vec::new(),
            out: Vec::new(),
        };
        for &s in &self.initial {
            ctx.cells = alloc::vec![s];
            ctx.acts.clear();
            go(&mut ctx, self.start(input, s));
        }
        ctx.out
    }

    /// Runs on `input` whose area sequence is `areas`, in depth-first
    /// order. `accept` gets each run's actions and cells and returns
    /// whether to stop. At most `limit` runs are visited; the count is
    /// returned.
    pub fn search(
        &self,
        input: &[i64],
        areas: &[i64],
        limit: usize,
        accept: &mut dyn FnMut(&[Act], &[Cell]) -> bool,
    ) -> usize {
        struct Ctx<'a> {
            sys: &'a OpacitySystem,
            input: &'a [i64],
            areas: &'a [i64],
            limit: usize,
            visited: usize,
            stop: bool,
            cells: Vec<Cell>,
            acts: Vec<Act>,
        }
        fn go(
            ctx: &mut Ctx<'_>,
            p: Progress,
            standing: usize,
            accept: &mut dyn FnMut(&[Act], &[Cell]) -> bool,
        ) {
            if ctx.stop || ctx.visited >= ctx.limit {
                return;
            }
            let i = ctx.cells.len() - 1;
            let done = ctx.sys.done(ctx.input, p);
            if i + 1 == ctx.areas.len() {
                if done && standing == ctx.sys.tail {
                    ctx.visited += 1;
                    ctx.stop = accept(&ctx.acts, &ctx.cells);
                }
                return;
            }
            if done && standing >= ctx.sys.tail {
                return;
            }
            let cur = ctx.cells[i];
            for act in ctx.sys.moves(cur, p, ctx.input) {
                let c = act.apply(cur);
                if ctx.sys.grid.area(c) != ctx.areas[i + 1] {
                    continue;
                }
                let p2 = ctx.sys.progress(ctx.input, p, c);
                ctx.cells.push(c);
                ctx.acts.push(act);
                go(ctx, p2, standing + done as usize, accept);
                ctx.cells.pop();
                ctx.acts.pop();
                if ctx.stop {
                    return;
                }
            }
        }
        let mut ctx = Ctx {
            sys: self,
            input,
            areas,
            limit,
            visited: 0,
            stop: false,
            cells: Vec::new(),
            acts: Vec::new(),
        };
        for &s in &self.initial {
            if areas.first() != Some(&self.grid.area(s)) {
                continue;
            }
            ctx.cells = alloc::vec![s];
            ctx.acts.clear();
            go(&mut ctx, self.start(input, s), 0, accept);
            if ctx.stop {
                break;
            }
        }
        ctx.visited
    }

    /// Events of a run given its cells and actions.
    pub fn events(&self, input: &[i64], cells: &[Cell], acts: &[Act]) -> Vec<Valuation> {
        events_of(&self.grid, input, cells, acts)
    }

    /// All runs with the same input and areas as `trace` (at most `limit`).
    pub fn eqarea_all(&self, trace: &Trace, limit: usize) -> Vec<Vec<Valuation>> {
        let Some(input) = inputs_of(trace) else {
            return Vec::new();
        };
        let areas = areas_of(trace);
        let mut out = Vec::new();
        self.search(&input, &areas, limit, &mut |acts, cells| {
            out.push(events_of(&self.grid, &input, cells, acts));
            false
        });
        out
    }

    /// One run with the same input and areas as `trace` but different
    /// actions, if there is one among the first `limit` runs.
    pub fn eqarea_witness(&self, trace: &Trace, limit: usize) -> Option<Vec<Valuation>> {
        let input = inputs_of(trace)?;
        let areas = areas_of(trace);
        let own: Vec<Value> = acts_of(trace);
        let mut found = None;
        self.search(&input, &areas, limit, &mut |acts, cells| {
            let names: Vec<Value> = acts
                .iter()
                .copied()
                .chain(core::iter::once(Act::Stand))
                .map(|a| Value::sym(a.name()))
                .collect();
            if names != own {
                found = Some(events_of(&self.grid, &input, cells, acts));
                true
            } else {
                false
            }
        });
        found
    }
}

/// Random runs of an opacity system. Trace ids are `t0`, `t1`, ...
pub fn gen_opacity_traces(
    system: &OpacitySystem,
    seed: u64,
    input_len: usize,
    count: usize,
) -> Vec<Trace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let input = system.grid.random_input(&mut rng, input_len);
            Trace::complete(&format!("t{k}"), system.run(&mut rng, &input))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_partition() {
        let g = Grid::default();
        assert_eq!(g.areas(), 25);
        let mut seen = alloc::vec![0; 25];
        for r in 0..10 {
            for c in 0..10 {
                seen[g.area((r, c)) as usize] += 1;
            }
        }
        assert!(seen.iter().all(|&n| n == 4));
        assert_eq!(g.cells(6), [(2, 2), (2, 3), (3, 2), (3, 3)]);
        assert_eq!(g.distance((0, 0), 6), 4);
    }

    #[test]
    fn od_runs_carry_their_inputs() {
        let sys = OdSystem::new(3, 1.0);
        let input = [6, 0, 24];
        let evs = sys.run(&input, (9, 9));
        let t = Trace::complete("t", evs.clone());
        assert_eq!(inputs_of(&t), Some(input.to_vec()));
        assert_eq!(evs.last().unwrap().get("area"), Some(&Value::Int(24)));
        // Same input: same length whatever the target.
        for target in Grid::default().cells(24) {
            assert_eq!(sys.run(&input, target).len(), evs.len());
        }
    }

    #[test]
    fn leak_free_strategies_ignore_the_target() {
        let sys = OdSystem::new(5, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let input = sys.grid.random_input(&mut rng, 4);
            let runs: Vec<_> = sys
                .grid
                .cells(*input.last().unwrap())
                .iter()
                .map(|&t| sys.run(&input, t))
                .collect();
            let areas = |evs: &[Valuation]| {
                evs.iter()
                    .map(|e| e.get("area").cloned())
                    .collect::<Vec<_>>()
            };
            assert!(runs.iter().all(|r| areas(r) == areas(&runs[0])));
        }
    }

    #[test]
    fn opaque_runs_have_twins() {
        let sys = OpacitySystem::opaque();
        let traces = gen_opacity_traces(&sys, 3, 4, 20);
        for t in &traces {
            assert!(sys.eqarea_witness(t, 10_000).is_some(), "{}", t.id());
            let all = sys.eqarea_all(t, 10_000);
            assert!(all.len() >= 2);
            assert!(all
                .iter()
                .any(|evs| evs.as_slice() == t.events().cloned().collect::<Vec<_>>().as_slice()));
        }
    }

    #[test]
    fn deterministic_runs_are_unique() {
        let sys = OpacitySystem::non_opaque();
        for t in gen_opacity_traces(&sys, 3, 4, 10) {
            assert!(sys.eqarea_witness(&t, 10_000).is_none());
            assert_eq!(sys.eqarea_all(&t, 10_000).len(), 1);
        }
    }
}
