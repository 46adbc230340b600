use std::collections::HashSet;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::time::{Duration, Instant};

use serde::Serialize;

use super::{DisassemblyPlan, Failure, Mode, PlanResult, PlannerConfig};
use crate::dbg::{EvalScore, StateKey};
use crate::problem::AssemblyProblem;
use crate::simulation::{simulate, Action, MotionKind, SimOutcome, Transition, WorldState};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRecord {
    /// Fingerprint of the exact poses of the remaining parts.
    pub state: u64,
    /// Fingerprint of the quantized state key and the remaining set.
    pub key: u64,
    pub part: usize,
    pub action: Action,
    pub outcome: String,
    pub blockers: Vec<usize>,
    pub steps: usize,
    pub wall_s: f64,
    pub repeated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expansion {
    pub pass: usize,
    pub kind: MotionKind,
    pub node: usize,
    pub candidates: Vec<usize>,
    pub score: EvalScore,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueueEntry {
    pub node: usize,
    pub candidates: Vec<usize>,
    pub score: EvalScore,
}

/// Open list at the start of a pass, in extraction order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueueSnapshot {
    pub pass: usize,
    pub kind: MotionKind,
    pub entries: Vec<QueueEntry>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunLog {
    pub sims: Vec<SimRecord>,
    pub expansions: Vec<Expansion>,
    pub queues: Vec<QueueSnapshot>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunStats {
    pub sim_count: u64,
    /// Simulations whose (state, part, action) had already been simulated.
    pub repeated_sims: u64,
    pub cache_hits: u64,
    pub skipped_actions: u64,
    pub static_analyses: u64,
    pub expansions: u64,
    pub passes: u64,
    pub path_time_s: f64,
    pub total_time_s: f64,
}

fn exact_key(state: &WorldState, remaining: &[usize]) -> Vec<u64> {
    let mut parts = remaining.to_vec();
    parts.sort_unstable();
    let mut key = Vec::with_capacity(parts.len() * 8);
    for p in parts {
        let pose = &state.poses[p];
        key.push(p as u64);
        key.extend(pose.translation.iter().map(|c| c.to_bits()));
        key.extend(pose.rotation.coords.iter().map(|c| c.to_bits()));
    }
    key
}

/// Stable hash of the exact poses of `remaining`.
pub fn state_fingerprint(state: &WorldState, remaining: &[usize]) -> u64 {
    let mut h = DefaultHasher::new();
    exact_key(state, remaining).hash(&mut h);
    h.finish()
}

fn outcome_label(outcome: &SimOutcome) -> &'static str {
    match outcome {
        SimOutcome::Collision { .. } => "collision",
        SimOutcome::Disassembled => "disassembled",
        SimOutcome::Stalled { .. } => "stalled",
        SimOutcome::PathTimeout => "path_timeout",
    }
}

/// Bookkeeping shared by all planners: clock, budget, simulate ledger.
pub(crate) struct Runner<'a> {
    pub problem: &'a AssemblyProblem,
    pub cfg: &'a PlannerConfig,
    started: Instant,
    clock: Instant,
    budget_base: u64,
    seen: HashSet<(Vec<u64>, usize, Action)>,
    pub stats: RunStats,
    pub log: RunLog,
}

impl<'a> Runner<'a> {
    pub fn new(problem: &'a AssemblyProblem, cfg: &'a PlannerConfig) -> Self {
        let now = Instant::now();
        Runner {
            problem,
            cfg,
            started: now,
            clock: now,
            budget_base: 0,
            seen: HashSet::new(),
            stats: RunStats::default(),
            log: RunLog::default(),
        }
    }

    /// Gives the next stage a fresh time and simulation budget.
    pub fn restart_clock(&mut self) {
        self.clock = Instant::now();
        self.budget_base = self.stats.sim_count;
    }

    pub fn check(&self) -> Option<Failure> {
        if self.clock.elapsed() > Duration::from_secs_f64(self.cfg.global_timeout_s) {
            return Some(Failure::Timeout);
        }
        match self.cfg.sim_budget {
            Some(b) if self.stats.sim_count - self.budget_base >= b => Some(Failure::SimBudget),
            _ => None,
        }
    }

    pub fn simulate(&mut self, state: &WorldState, part: usize, action: Action, remaining: &[usize]) -> Transition {
        let key = exact_key(state, remaining);
        let state_fp = {
            let mut h = DefaultHasher::new();
            key.hash(&mut h);
            h.finish()
        };
        let key_fp = {
            let mut h = DefaultHasher::new();
            StateKey::new(state, self.cfg.delta_t, self.cfg.delta_r).hash(&mut h);
            remaining.hash(&mut h);
            h.finish()
        };
        let repeated = !self.seen.insert((key, part, action));
        let t0 = Instant::now();
        let t = simulate(self.problem, state, part, action, remaining, &self.cfg.sim);
        let wall = t0.elapsed().as_secs_f64();
        self.stats.sim_count += 1;
        self.stats.repeated_sims += repeated as u64;
        self.stats.path_time_s += wall;
        self.log.sims.push(SimRecord {
            state: state_fp,
            key: key_fp,
            part,
            action,
            outcome: outcome_label(&t.outcome).to_string(),
            blockers: t.outcome.blockers().to_vec(),
            steps: t.path.waypoints.len() - 1,
            wall_s: wall,
            repeated,
        });
        t
    }

    pub fn finish(mut self, mode: Mode, plan: Option<DisassemblyPlan>, failure: Option<Failure>) -> PlanResult {
        self.stats.total_time_s = self.started.elapsed().as_secs_f64();
        PlanResult { mode, plan, failure, stats: self.stats, log: self.log }
    }
}
