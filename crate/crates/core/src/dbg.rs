//! Directional blocking graphs per search state.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geometry::{Aabb, Point};
use crate::problem::AssemblyProblem;
use crate::simulation::{posed_aabb, Action, Axis, Pose, WorldState};

/// Canonical identifier of a state: all poses quantized by the similarity
/// thresholds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey(Vec<i64>);

impl StateKey {
    pub fn new(state: &WorldState, delta_t: f64, delta_r: f64) -> Self {
        let mut key = Vec::with_capacity(state.poses.len() * 6);
        for pose in &state.poses {
            key.extend(pose.translation.iter().map(|c| (c / delta_t).round() as i64));
            key.extend(pose.rotation.scaled_axis().iter().map(|c| (c / delta_r).round() as i64));
        }
        StateKey(key)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EvalScore {
    pub f_c: u32,
    pub f_a: u32,
}

impl EvalScore {
    pub const INFINITE: EvalScore = EvalScore { f_c: u32::MAX, f_a: u32::MAX };

    pub fn is_infinite(&self) -> bool {
        *self == Self::INFINITE
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dbg {
    pub action: Action,
    /// `(blocked, blocker)` pairs.
    pub edges: BTreeSet<(usize, usize)>,
}

impl Dbg {
    pub fn new(action: Action) -> Self {
        Dbg { action, edges: BTreeSet::new() }
    }

    pub fn out_neighbors(&self, part: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.range((part, 0)..=(part, usize::MAX)).map(|&(_, b)| b)
    }

    pub fn is_sink(&self, part: usize) -> bool {
        self.out_neighbors(part).next().is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DbgSet {
    pub vertices: BTreeSet<usize>,
    pub graphs: BTreeMap<Action, Dbg>,
}

impl DbgSet {
    pub fn empty(actions: &[Action], remaining: &[usize]) -> Self {
        DbgSet { vertices: remaining.iter().copied().collect(), graphs: actions.iter().map(|&a| (a, Dbg::new(a))).collect() }
    }

    fn add_edge(&mut self, action: Action, from: usize, to: usize) {
        if from != to && self.vertices.contains(&from) && self.vertices.contains(&to) {
            if let Some(g) = self.graphs.get_mut(&action) {
                g.edges.insert((from, to));
            }
        }
    }

    /// Records that moving `part` along `action` ran into `blockers`.
    pub fn update_on_collision(&mut self, action: Action, part: usize, blockers: &[usize]) {
        for &b in blockers {
            self.add_edge(action, part, b);
        }
    }

    /// Drops `part` and every edge touching it.
    pub fn remove_part(&mut self, part: usize) {
        self.vertices.remove(&part);
        for g in self.graphs.values_mut() {
            g.edges.retain(|&(a, b)| a != part && b != part);
        }
    }

    pub fn eval(&self, part: usize) -> EvalScore {
        let mut blockers = BTreeSet::new();
        let mut sinks = 0;
        for g in self.graphs.values() {
            let mut sink = true;
            for b in g.out_neighbors(part) {
                blockers.insert(b);
                sink = false;
            }
            if sink {
                sinks += 1;
            }
        }
        EvalScore { f_c: blockers.len() as u32, f_a: sinks }
    }

    /// Actions along which `part` is a sink, in canonical order.
    pub fn allowed_actions(&self, part: usize) -> Vec<Action> {
        self.graphs.values().filter(|g| g.is_sink(part)).map(|g| g.action).collect()
    }

    /// One `action blocked blocker` line per edge.
    pub fn dump(&self, problem: &AssemblyProblem) -> String {
        let mut out = String::new();
        for g in self.graphs.values() {
            for &(a, b) in &g.edges {
                writeln!(out, "{} {} {}", g.action, problem.parts[a].id, problem.parts[b].id).unwrap();
            }
        }
        out
    }
}

/// DBG sets of one planning mode, keyed by state.
#[derive(Debug, Clone, Default)]
pub struct DbgStore {
    sets: HashMap<StateKey, DbgSet>,
}

impl DbgStore {
    pub fn get(&self, key: &StateKey) -> Option<&DbgSet> {
        self.sets.get(key)
    }

    pub fn get_mut(&mut self, key: &StateKey) -> Option<&mut DbgSet> {
        self.sets.get_mut(key)
    }

    pub fn get_or_insert_with(&mut self, key: &StateKey, f: impl FnOnce() -> DbgSet) -> &mut DbgSet {
        self.sets.entry(key.clone()).or_insert_with(f)
    }

    pub fn remove_part(&mut self, part: usize) {
        for set in self.sets.values_mut() {
            set.remove_part(part);
        }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticAnalysisConfig {
    pub extension_steps: usize,
    pub max_extension: f64,
    /// Extension distance is at most the mobile length divided by this.
    pub length_divisor: f64,
    /// Depth below the stationary surface an extension point must reach to
    /// count as blocked; matches the simulator's penetration threshold.
    pub inside_depth: f64,
}

impl Default for StaticAnalysisConfig {
    fn default() -> Self {
        StaticAnalysisConfig { extension_steps: 5, max_extension: 0.05, length_divisor: 20.0, inside_depth: 0.01 }
    }
}

impl StaticAnalysisConfig {
    pub fn extension_distance(&self, length: f64) -> f64 {
        self.max_extension.min(length / self.length_divisor)
    }
}

/// Unordered pairs of remaining parts whose posed boxes overlap or touch.
pub fn contacting_pairs(problem: &AssemblyProblem, state: &WorldState, remaining: &[usize]) -> Vec<(usize, usize)> {
    let boxes: Vec<Aabb> = remaining.iter().map(|&p| posed_aabb(problem, p, &state.poses[p])).collect();
    let mut out = Vec::new();
    for i in 0..remaining.len() {
        for j in i + 1..remaining.len() {
            if boxes[i].overlap(&boxes[j]).is_some() {
                let (a, b) = (remaining[i], remaining[j]);
                out.push((a.min(b), a.max(b)));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Extends each world-space point along `axis` and reports whether any
/// extension lands inside `stationary`.
fn extensions_hit(
    problem: &AssemblyProblem,
    points: impl Iterator<Item = Point>,
    stationary: usize,
    pose_s: &Pose,
    axis: Axis,
    step: f64,
    cfg: &StaticAnalysisConfig,
) -> bool {
    let sdf = &problem.parts[stationary].sdf;
    let dir = axis.vector();
    points.into_iter().any(|c| {
        (1..=cfg.extension_steps).any(|k| {
            let e = c + dir * (k as f64 * step);
            sdf.query(&pose_s.apply_inverse(&e)) < -cfg.inside_depth
        })
    })
}

fn posed_samples_in<'a>(problem: &'a AssemblyProblem, part: usize, pose: &'a Pose, region: Aabb) -> impl Iterator<Item = Point> + 'a {
    problem.parts[part].samples.iter().map(move |s| pose.apply(s)).filter(move |w| region.contains(w))
}

/// Contact-point probe: mobile samples inside the box overlap, extended
/// along `axis`.
pub fn extension_blocked(
    problem: &AssemblyProblem,
    state: &WorldState,
    mobile: usize,
    stationary: usize,
    axis: Axis,
    cfg: &StaticAnalysisConfig,
) -> bool {
    let (pm, ps) = (&state.poses[mobile], &state.poses[stationary]);
    let bm = posed_aabb(problem, mobile, pm);
    let Some(region) = bm.overlap(&posed_aabb(problem, stationary, ps)) else {
        return false;
    };
    let step = cfg.extension_distance(bm.extent()[axis.index()]);
    extensions_hit(problem, posed_samples_in(problem, mobile, pm, region.expanded(1e-9)), stationary, ps, axis, step, cfg)
}

/// Region of the mobile box lying behind the stationary box along `axis`,
/// restricted to the stationary cross-section. `None` when the mobile part
/// is not longer than the stationary one along the axis.
pub fn potential_collision_area(mobile: &Aabb, stationary: &Aabb, axis: Axis) -> Option<Aabb> {
    let i = axis.index();
    if mobile.extent()[i] <= stationary.extent()[i] {
        return None;
    }
    let mut area = *mobile;
    for j in 0..3 {
        if j == i {
            if axis.sign() > 0.0 {
                area.max[j] = area.max[j].min(stationary.min[j]);
            } else {
                area.min[j] = area.min[j].max(stationary.max[j]);
            }
        } else {
            area.min[j] = area.min[j].max(stationary.min[j]);
            area.max[j] = area.max[j].min(stationary.max[j]);
        }
        if area.min[j] > area.max[j] {
            return None;
        }
    }
    Some(area)
}

/// Probe from the part of a longer mobile box that trails the stationary
/// box, e.g. a bolt head behind a washer.
pub fn potential_blocking(
    problem: &AssemblyProblem,
    state: &WorldState,
    mobile: usize,
    stationary: usize,
    axis: Axis,
    cfg: &StaticAnalysisConfig,
) -> bool {
    let (pm, ps) = (&state.poses[mobile], &state.poses[stationary]);
    let bm = posed_aabb(problem, mobile, pm);
    let Some(area) = potential_collision_area(&bm, &posed_aabb(problem, stationary, ps), axis) else {
        return false;
    };
    let step = cfg.extension_distance(bm.extent()[axis.index()]);
    extensions_hit(problem, posed_samples_in(problem, mobile, pm, area.expanded(1e-9)), stationary, ps, axis, step, cfg)
}

/// Seeds the six translational DBGs of `state` from SDF probing.
pub fn static_analysis(problem: &AssemblyProblem, state: &WorldState, remaining: &[usize], cfg: &StaticAnalysisConfig) -> DbgSet {
    let mut set = DbgSet::empty(&Action::translations(), remaining);
    for (a, b) in contacting_pairs(problem, state, remaining) {
        for (mobile, stationary) in [(a, b), (b, a)] {
            for axis in Axis::ALL {
                if extension_blocked(problem, state, mobile, stationary, axis, cfg)
                    || potential_blocking(problem, state, mobile, stationary, axis, cfg)
                {
                    set.add_edge(Action::translate(axis), mobile, stationary);
                    set.add_edge(Action::translate(axis.opposite()), stationary, mobile);
                }
            }
        }
    }
    set
}
