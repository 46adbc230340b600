use serde::Serialize;

use super::DisassemblyPlan;
use crate::problem::AssemblyProblem;
use crate::simulation::{is_disassembled, pair_penetration, MotionKind, Pose, SimConfig};

/// Pose chaining tolerance between consecutive segments.
const CHAIN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub max_penetration: f64,
    pub goal_reached: bool,
    pub errors: Vec<String>,
}

fn same_pose(a: &Pose, b: &Pose) -> bool {
    let (dt, dr) = a.distance(b);
    dt <= CHAIN_TOLERANCE && dr <= CHAIN_TOLERANCE
}

/// Replays `plan` from the initial state, checking chaining, step size,
/// penetration at every waypoint and separation of each removed part.
pub fn validate_plan(problem: &AssemblyProblem, plan: &DisassemblyPlan, sim: &SimConfig) -> ValidationReport {
    let mut state = problem.initial_state();
    let mut remaining = problem.all_parts();
    let mut errors = Vec::new();
    let mut worst = 0.0f64;
    let limit = sim.penetration_threshold + problem.max_sdf_spacing();
    let n = problem.part_count();
    if plan.entries.is_empty() {
        let goal = n <= 1 || (n == 2 && is_disassembled(problem, &state, 0, &remaining));
        return ValidationReport { valid: goal, max_penetration: 0.0, goal_reached: goal, errors };
    }
    for (i, entry) in plan.entries.iter().enumerate() {
        let p = entry.part;
        let label = format!("entry {i} ({})", entry.part_id);
        if p >= n || problem.parts[p].id != entry.part_id {
            errors.push(format!("{label}: unknown part"));
            continue;
        }
        if !remaining.contains(&p) {
            errors.push(format!("{label}: part already removed"));
            continue;
        }
        if entry.remains {
            if remaining.len() != 1 || !entry.segments.is_empty() {
                errors.push(format!("{label}: marked as remaining but other parts are still present"));
            }
            continue;
        }
        if entry.segments.is_empty() {
            errors.push(format!("{label}: no motion"));
        }
        for (j, seg) in entry.segments.iter().enumerate() {
            if seg.part != p || seg.waypoints.is_empty() {
                errors.push(format!("{label} segment {j}: malformed"));
                continue;
            }
            if !same_pose(&seg.waypoints[0], &state.poses[p]) {
                errors.push(format!("{label} segment {j}: does not start where the part is"));
            }
            for (k, w) in seg.waypoints.windows(2).enumerate() {
                let (dt, dr) = w[0].distance(&w[1]);
                let ok = match seg.action.kind {
                    MotionKind::Translational => dt <= sim.path_step + CHAIN_TOLERANCE && dr <= CHAIN_TOLERANCE,
                    MotionKind::Rotational => dr <= sim.rotation_step + CHAIN_TOLERANCE,
                };
                if !ok {
                    errors.push(format!("{label} segment {j}: step {k} too long"));
                }
            }
            for (k, w) in seg.waypoints.iter().enumerate() {
                for &q in remaining.iter().filter(|&&q| q != p) {
                    let d = pair_penetration(problem, p, w, q, &state.poses[q]);
                    worst = worst.max(d);
                    if d > limit {
                        errors.push(format!("{label} segment {j} waypoint {k}: penetrates {} by {d:.4}", problem.parts[q].id));
                    }
                }
            }
            state.poses[p] = *seg.end();
        }
        if !is_disassembled(problem, &state, p, &remaining) {
            errors.push(format!("{label}: not separated from the remaining parts"));
        }
        remaining.retain(|&q| q != p);
    }
    let goal_reached = remaining.len() <= 1;
    ValidationReport { valid: errors.is_empty() && goal_reached, max_penetration: worst, goal_reached, errors }
}
