//! Kinematic transition function: step one part along an action until it
//! collides or its hull separates from the rest of the assembly.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use nalgebra::{Isometry3, Translation3, Unit, UnitQuaternion};
use serde::{Deserialize, Serialize};

use crate::geometry::{convex_hulls_disjoint, Aabb, ConvexHull, Point, Vec3};
use crate::problem::AssemblyProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "+X")]
    PosX,
    #[serde(rename = "-X")]
    NegX,
    #[serde(rename = "+Y")]
    PosY,
    #[serde(rename = "-Y")]
    NegY,
    #[serde(rename = "+Z")]
    PosZ,
    #[serde(rename = "-Z")]
    NegZ,
}

impl Axis {
    pub const ALL: [Axis; 6] = [Axis::PosX, Axis::NegX, Axis::PosY, Axis::NegY, Axis::PosZ, Axis::NegZ];

    /// Coordinate index (0 = x) of the axis.
    pub fn index(self) -> usize {
        match self {
            Axis::PosX | Axis::NegX => 0,
            Axis::PosY | Axis::NegY => 1,
            Axis::PosZ | Axis::NegZ => 2,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Axis::PosX | Axis::PosY | Axis::PosZ => 1.0,
            _ => -1.0,
        }
    }

    pub fn vector(self) -> Vec3 {
        let mut v = Vec3::zeros();
        v[self.index()] = self.sign();
        v
    }

    pub fn opposite(self) -> Axis {
        match self {
            Axis::PosX => Axis::NegX,
            Axis::NegX => Axis::PosX,
            Axis::PosY => Axis::NegY,
            Axis::NegY => Axis::PosY,
            Axis::PosZ => Axis::NegZ,
            Axis::NegZ => Axis::PosZ,
        }
    }

    fn label(self) -> &'static str {
        ["+X", "-X", "+Y", "-Y", "+Z", "-Z"][self as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotionKind {
    Translational,
    Rotational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Action {
    pub kind: MotionKind,
    pub axis: Axis,
}

impl Action {
    pub const fn translate(axis: Axis) -> Self {
        Action { kind: MotionKind::Translational, axis }
    }

    pub const fn rotate(axis: Axis) -> Self {
        Action { kind: MotionKind::Rotational, axis }
    }

    /// Translational actions in canonical order +X, -X, +Y, -Y, +Z, -Z.
    pub fn translations() -> Vec<Action> {
        Axis::ALL.iter().map(|&a| Action::translate(a)).collect()
    }

    /// All twelve actions: the translations followed by the rotations.
    pub fn all() -> Vec<Action> {
        Axis::ALL.iter().map(|&a| Action::translate(a)).chain(Axis::ALL.iter().map(|&a| Action::rotate(a))).collect()
    }

    pub fn actions_for(kind: MotionKind) -> Vec<Action> {
        match kind {
            MotionKind::Translational => Self::translations(),
            MotionKind::Rotational => Self::all(),
        }
    }

    pub fn opposite(self) -> Action {
        Action { kind: self.kind, axis: self.axis.opposite() }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            MotionKind::Translational => write!(f, "T{}", self.axis.label()),
            MotionKind::Rotational => write!(f, "R{}", self.axis.label()),
        }
    }
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let kind = match s.get(..1) {
            Some("T") => MotionKind::Translational,
            Some("R") => MotionKind::Rotational,
            _ => return Err(format!("bad action {s:?}")),
        };
        let axis = Axis::ALL.iter().find(|a| a.label() == &s[1..]).ok_or_else(|| format!("bad action {s:?}"))?;
        Ok(Action { kind, axis: *axis })
    }
}

impl From<Action> for String {
    fn from(a: Action) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for Action {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Rigid pose of a part relative to its initial placement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub translation: Vec3,
    pub rotation: UnitQuaternion<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Pose { translation: Vec3::zeros(), rotation: UnitQuaternion::identity() }
    }

    pub fn from_translation(t: Vec3) -> Self {
        Pose { translation: t, rotation: UnitQuaternion::identity() }
    }

    pub fn isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(Translation3::from(self.translation), self.rotation)
    }

    pub fn apply(&self, p: &Point) -> Point {
        self.rotation * p + self.translation
    }

    pub fn apply_inverse(&self, p: &Point) -> Point {
        self.rotation.inverse() * (p - self.translation)
    }

    pub fn translated(&self, d: &Vec3) -> Pose {
        Pose { translation: self.translation + d, rotation: self.rotation }
    }

    /// Rotates the posed part about the world-space `pivot`.
    pub fn rotated_about(&self, pivot: &Point, rot: &UnitQuaternion<f64>) -> Pose {
        Pose { translation: rot * (self.translation - pivot.coords) + pivot.coords, rotation: rot * self.rotation }
    }

    /// Translation distance (max norm) and rotation angle to `other`.
    pub fn distance(&self, other: &Pose) -> (f64, f64) {
        let dt = (self.translation - other.translation).amax();
        (dt, self.rotation.angle_to(&other.rotation))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub poses: Vec<Pose>,
}

impl WorldState {
    pub fn initial(parts: usize) -> Self {
        WorldState { poses: vec![Pose::identity(); parts] }
    }

    pub fn with_pose(&self, part: usize, pose: Pose) -> Self {
        let mut poses = self.poses.clone();
        poses[part] = pose;
        WorldState { poses }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionPath {
    pub part: usize,
    pub action: Action,
    pub waypoints: Vec<Pose>,
}

impl MotionPath {
    pub fn end(&self) -> &Pose {
        self.waypoints.last().expect("motion path has at least one waypoint")
    }

    /// True when the part never left its starting pose.
    pub fn is_stationary(&self) -> bool {
        self.waypoints.len() < 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimOutcome {
    /// Blocked; `blockers` are the parts penetrated at the rejected step.
    Collision {
        blockers: Vec<usize>,
    },
    Disassembled,
    /// Rotation budget or travel cap used up without separating;
    /// `contacts` are the parts whose boxes still overlap the mover.
    Stalled {
        contacts: Vec<usize>,
    },
    PathTimeout,
}

impl SimOutcome {
    pub fn is_disassembled(&self) -> bool {
        matches!(self, SimOutcome::Disassembled)
    }

    pub fn blockers(&self) -> &[usize] {
        match self {
            SimOutcome::Collision { blockers } => blockers,
            SimOutcome::Stalled { contacts } => contacts,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub path_step: f64,
    pub rotation_step: f64,
    pub penetration_threshold: f64,
    pub path_timeout_s: f64,
    pub force_magnitude: f64,
    pub contact_stiffness: f64,
    pub contact_damping: f64,
    pub sim_step: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            path_step: 0.1,
            rotation_step: 0.05,
            penetration_threshold: 0.01,
            path_timeout_s: 360.0,
            force_magnitude: 100.0,
            contact_stiffness: 1e6,
            contact_damping: 0.0,
            sim_step: 1e-3,
        }
    }
}

/// Total rotation a single rotational motion may sweep.
pub const ROTATION_BUDGET: f64 = std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: WorldState,
    pub path: MotionPath,
    pub outcome: SimOutcome,
}

/// World-space box of a part at `pose`.
pub fn posed_aabb(problem: &AssemblyProblem, part: usize, pose: &Pose) -> Aabb {
    let p = &problem.parts[part];
    if pose.rotation == UnitQuaternion::identity() {
        p.aabb.translated(&pose.translation)
    } else {
        Aabb::from_points(&p.hull.vertices.iter().map(|v| pose.apply(v)).collect::<Vec<_>>()).unwrap()
    }
}

/// Box in the part's local frame covering the world-space `region`.
fn local_region(pose: &Pose, region: &Aabb) -> Aabb {
    if pose.rotation == UnitQuaternion::identity() {
        region.translated(&-pose.translation)
    } else {
        Aabb::from_points(&region.corners().map(|c| pose.apply_inverse(&c))).unwrap()
    }
}

/// Smallest SDF value of `b` over the samples of `a` inside `region`.
fn min_sdf_in_region(problem: &AssemblyProblem, a: usize, pa: &Pose, b: usize, pb: &Pose, region: &Aabb) -> f64 {
    let local = local_region(pa, region);
    let sdf = &problem.parts[b].sdf;
    problem.parts[a]
        .samples
        .iter()
        .filter(|s| local.contains(s))
        .map(|s| pa.apply(s))
        .filter(|w| region.contains(w))
        .map(|w| sdf.query(&pb.apply_inverse(&w)))
        .fold(f64::INFINITY, f64::min)
}

/// Penetration depth between two posed parts, zero when apart.
pub fn pair_penetration(problem: &AssemblyProblem, a: usize, pa: &Pose, b: usize, pb: &Pose) -> f64 {
    let Some(region) = posed_aabb(problem, a, pa).overlap(&posed_aabb(problem, b, pb)) else {
        return 0.0;
    };
    let m = min_sdf_in_region(problem, a, pa, b, pb, &region).min(min_sdf_in_region(problem, b, pb, a, pa, &region));
    (-m).max(0.0)
}

/// Largest pairwise penetration among `parts` at `state`.
pub fn max_penetration(problem: &AssemblyProblem, state: &WorldState, parts: &[usize]) -> f64 {
    let mut worst = 0.0f64;
    for (i, &a) in parts.iter().enumerate() {
        for &b in &parts[i + 1..] {
            worst = worst.max(pair_penetration(problem, a, &state.poses[a], b, &state.poses[b]));
        }
    }
    worst
}

pub fn posed_hull(problem: &AssemblyProblem, part: usize, pose: &Pose) -> ConvexHull {
    problem.parts[part].hull.transformed(&pose.isometry())
}

/// Hull of the union of the given parts' posed hull vertices.
fn union_hull(problem: &AssemblyProblem, state: &WorldState, parts: &[usize]) -> Option<ConvexHull> {
    let pts: Vec<Point> = parts.iter().flat_map(|&q| problem.parts[q].hull.vertices.iter().map(move |v| state.poses[q].apply(v))).collect();
    ConvexHull::from_points(&pts).ok()
}

/// The part's hull is separated from the hull of all other remaining parts.
pub fn is_disassembled(problem: &AssemblyProblem, state: &WorldState, part: usize, remaining: &[usize]) -> bool {
    let others: Vec<usize> = remaining.iter().copied().filter(|&q| q != part).collect();
    if others.is_empty() {
        return true;
    }
    let hull = posed_hull(problem, part, &state.poses[part]);
    match union_hull(problem, state, &others) {
        Some(rest) => convex_hulls_disjoint(&hull, &rest),
        None => false,
    }
}

/// Index of the first waypoint after the start at which `part` is
/// separated from the other `remaining` parts of `state`.
pub fn first_separated(
    problem: &AssemblyProblem,
    state: &WorldState,
    part: usize,
    remaining: &[usize],
    waypoints: &[Pose],
) -> Option<usize> {
    let others: Vec<usize> = remaining.iter().copied().filter(|&q| q != part).collect();
    if others.is_empty() {
        return (waypoints.len() > 1).then_some(1);
    }
    let rest = union_hull(problem, state, &others)?;
    let hull = &problem.parts[part].hull;
    (1..waypoints.len()).find(|&k| convex_hulls_disjoint(&hull.transformed(&waypoints[k].isometry()), &rest))
}

/// Moves `part` along `action` from `state` until it is blocked, separates
/// from `remaining`, or runs out of budget.
pub fn simulate(
    problem: &AssemblyProblem,
    state: &WorldState,
    part: usize,
    action: Action,
    remaining: &[usize],
    cfg: &SimConfig,
) -> Transition {
    assert!(remaining.contains(&part), "part {part} is not in the remaining set");
    let started = Instant::now();
    let timeout = Duration::from_secs_f64(cfg.path_timeout_s);
    let others: Vec<usize> = remaining.iter().copied().filter(|&q| q != part).collect();
    let rest = union_hull(problem, state, &others);
    let start = state.poses[part];
    let scene = remaining.iter().map(|&q| posed_aabb(problem, q, &state.poses[q])).reduce(|a, b| a.union(&b)).unwrap();
    let travel_cap = 2.0 * scene.extent().norm();
    let pivot = posed_aabb(problem, part, &start).center();
    let axis = Unit::new_normalize(action.axis.vector());
    let hull = &problem.parts[part].hull;

    let mut waypoints = vec![start];
    let finish = |waypoints: Vec<Pose>, outcome: SimOutcome| {
        let end = *waypoints.last().unwrap();
        Transition { state: state.with_pose(part, end), path: MotionPath { part, action, waypoints }, outcome }
    };
    for k in 1usize.. {
        if started.elapsed() > timeout {
            return finish(waypoints, SimOutcome::PathTimeout);
        }
        let pose = match action.kind {
            MotionKind::Translational => {
                let d = k as f64 * cfg.path_step;
                if d > travel_cap {
                    break;
                }
                start.translated(&(axis.into_inner() * d))
            }
            MotionKind::Rotational => {
                let prev = (k - 1) as f64 * cfg.rotation_step;
                if prev >= ROTATION_BUDGET {
                    break;
                }
                let angle = (k as f64 * cfg.rotation_step).min(ROTATION_BUDGET);
                start.rotated_about(&pivot, &UnitQuaternion::from_axis_angle(&axis, angle))
            }
        };
        let blockers: Vec<usize> = others
            .iter()
            .copied()
            .filter(|&q| pair_penetration(problem, part, &pose, q, &state.poses[q]) > cfg.penetration_threshold)
            .collect();
        if !blockers.is_empty() {
            return finish(waypoints, SimOutcome::Collision { blockers });
        }
        waypoints.push(pose);
        let separated = match &rest {
            Some(rest) => convex_hulls_disjoint(&hull.transformed(&pose.isometry()), rest),
            None => others.is_empty(),
        };
        if separated {
            return finish(waypoints, SimOutcome::Disassembled);
        }
    }
    let end = *waypoints.last().unwrap();
    let mover = posed_aabb(problem, part, &end);
    let contacts = others.iter().copied().filter(|&q| mover.overlap(&posed_aabb(problem, q, &state.poses[q])).is_some()).collect();
    finish(waypoints, SimOutcome::Stalled { contacts })
}
