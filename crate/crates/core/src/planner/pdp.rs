use super::runner::Runner;
use super::{DisassemblyPlan, Failure, Mode, PlanEntry, PlanResult, PlannerConfig};
use crate::problem::AssemblyProblem;
use crate::simulation::{is_disassembled, Action, MotionKind, MotionPath, WorldState};

enum Bfs {
    Found(Vec<MotionPath>),
    /// No path within the depth limit; `capped` when deeper nodes exist.
    Missed {
        capped: bool,
    },
}

/// Breadth-first search over action sequences for one part, rebuilt from
/// scratch on every call.
fn bfs(run: &mut Runner, s0: &WorldState, part: usize, remaining: &[usize], depth: usize, kind: MotionKind) -> Result<Bfs, Failure> {
    let actions = Action::actions_for(kind);
    let mut frontier: Vec<(WorldState, Vec<MotionPath>)> = vec![(s0.clone(), vec![])];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (state, path) in &frontier {
            for &action in &actions {
                if let Some(f) = run.check() {
                    return Err(f);
                }
                let t = run.simulate(state, part, action, remaining);
                let mut p = path.clone();
                let moved = !t.path.is_stationary();
                p.push(t.path);
                if t.outcome.is_disassembled() {
                    return Ok(Bfs::Found(p));
                }
                if moved {
                    next.push((t.state, p));
                }
            }
        }
        if next.is_empty() {
            return Ok(Bfs::Missed { capped: false });
        }
        frontier = next;
    }
    Ok(Bfs::Missed { capped: true })
}

fn search(run: &mut Runner, kind: MotionKind) -> Result<DisassemblyPlan, Failure> {
    let problem = run.problem;
    let s0 = problem.initial_state();
    let mut remaining = problem.all_parts();
    let mut plan = DisassemblyPlan::default();
    let m = remaining.len();
    if m <= 1 || (m == 2 && is_disassembled(problem, &s0, 0, &remaining)) {
        return Ok(plan);
    }
    let mut depth = 1;
    loop {
        let mut removed = false;
        let mut capped = false;
        for part in remaining.clone() {
            match bfs(run, &s0, part, &remaining, depth, kind)? {
                Bfs::Found(segments) => {
                    plan.entries.push(PlanEntry { part, part_id: problem.parts[part].id.clone(), segments, remains: false });
                    remaining.retain(|&q| q != part);
                    removed = true;
                    if remaining.len() <= 1 {
                        plan.finish(problem, &remaining);
                        return Ok(plan);
                    }
                }
                Bfs::Missed { capped: c } => capped |= c,
            }
        }
        if !removed {
            if !capped {
                return Err(Failure::Exhausted);
            }
            depth += 1;
        }
    }
}

pub(super) fn run(problem: &AssemblyProblem, cfg: &PlannerConfig, kind: MotionKind) -> PlanResult {
    let mut runner = Runner::new(problem, cfg);
    let out = search(&mut runner, kind);
    match out {
        Ok(plan) => runner.finish(cfg.mode, Some(plan), None),
        Err(f) => runner.finish(cfg.mode, None, Some(f)),
    }
}

/// Translational stage first; the rotational stage gets a fresh budget.
/// Statistics cover both stages.
pub(super) fn run_star(problem: &AssemblyProblem, cfg: &PlannerConfig) -> PlanResult {
    let mut runner = Runner::new(problem, cfg);
    let out = search(&mut runner, MotionKind::Translational).or_else(|_| {
        runner.restart_clock();
        search(&mut runner, MotionKind::Rotational)
    });
    match out {
        Ok(plan) => runner.finish(Mode::PdpStar, Some(plan), None),
        Err(f) => runner.finish(Mode::PdpStar, None, Some(f)),
    }
}
