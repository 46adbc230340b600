use std::collections::HashMap;
use std::sync::Arc;

use super::runner::{Expansion, QueueEntry, QueueSnapshot, Runner};
use super::{DisassemblyPlan, Failure, Mode, PlanEntry, PlanResult, PlannerConfig, INITIAL_SCORE};
use crate::dbg::{static_analysis, DbgSet, DbgStore, EvalScore, StateKey};
use crate::problem::AssemblyProblem;
use crate::simulation::{first_separated, is_disassembled, Action, MotionKind, MotionPath, SimOutcome, Transition, WorldState};

#[derive(Debug, Clone)]
struct Node {
    id: usize,
    order: u64,
    state: Arc<WorldState>,
    key: StateKey,
    candidates: Vec<usize>,
    path: Vec<MotionPath>,
    initial: bool,
}

#[derive(Default)]
struct Lists {
    open: Vec<Node>,
    closed: Vec<Node>,
}

struct CacheEntry {
    transition: Transition,
    remaining: Vec<usize>,
}

type CacheKey = (Vec<u64>, usize, Action);

enum PassEnd {
    Goal,
    Failed(Failure),
    Done,
}

struct Search<'a> {
    run: Runner<'a>,
    guided: bool,
    remaining: Vec<usize>,
    plan: DisassemblyPlan,
    trans: Lists,
    rot: Lists,
    dbg_t: DbgStore,
    dbg_r: DbgStore,
    cache: HashMap<CacheKey, CacheEntry>,
    next_id: usize,
    next_order: u64,
}

fn pose_bits(state: &WorldState) -> Vec<u64> {
    state.poses.iter().flat_map(|p| p.translation.iter().chain(p.rotation.coords.iter()).map(|c| c.to_bits())).collect()
}

/// Two states are alike when every part is within the similarity thresholds.
fn similar(a: &WorldState, b: &WorldState, delta_t: f64, delta_r: f64) -> bool {
    a.poses.iter().zip(&b.poses).all(|(p, q)| {
        let (dt, dr) = p.distance(q);
        dt <= delta_t && dr <= delta_r
    })
}

/// Drops nodes that duplicate an older node with the same candidates.
fn rmd(nodes: Vec<Node>, delta_t: f64, delta_r: f64) -> Vec<Node> {
    let mut by_id: Vec<&Node> = nodes.iter().collect();
    by_id.sort_by_key(|n| n.id);
    let mut kept: HashMap<&[usize], Vec<&Node>> = HashMap::new();
    let mut keep = std::collections::HashSet::new();
    for n in by_id {
        let group = kept.entry(n.candidates.as_slice()).or_default();
        if !group.iter().any(|k| similar(&k.state, &n.state, delta_t, delta_r)) {
            group.push(n);
            keep.insert(n.id);
        }
    }
    let mut out: Vec<Node> = nodes.iter().filter(|n| keep.contains(&n.id)).cloned().collect();
    out.sort_by_key(|n| n.order);
    out
}

#[allow(clippy::too_many_arguments)]
fn dbg_set<'s>(
    store: &'s mut DbgStore,
    kind: MotionKind,
    problem: &AssemblyProblem,
    cfg: &PlannerConfig,
    remaining: &[usize],
    stats: &mut super::RunStats,
    key: &StateKey,
    state: &WorldState,
) -> &'s mut DbgSet {
    store.get_or_insert_with(key, || match kind {
        MotionKind::Translational => {
            stats.static_analyses += 1;
            static_analysis(problem, state, remaining, &cfg.static_analysis)
        }
        MotionKind::Rotational => DbgSet::empty(&Action::all(), remaining),
    })
}

pub(super) fn run(problem: &AssemblyProblem, cfg: &PlannerConfig) -> PlanResult {
    let mut search = Search {
        run: Runner::new(problem, cfg),
        guided: cfg.mode == Mode::SbdpStar,
        remaining: problem.all_parts(),
        plan: DisassemblyPlan::default(),
        trans: Lists::default(),
        rot: Lists::default(),
        dbg_t: DbgStore::default(),
        dbg_r: DbgStore::default(),
        cache: HashMap::new(),
        next_id: 0,
        next_order: 0,
    };
    let outcome = search.solve();
    let Search { run, plan, .. } = search;
    match outcome {
        Ok(()) => run.finish(cfg.mode, Some(plan), None),
        Err(f) => run.finish(cfg.mode, None, Some(f)),
    }
}

impl Search<'_> {
    fn lists(&mut self, kind: MotionKind) -> &mut Lists {
        match kind {
            MotionKind::Translational => &mut self.trans,
            MotionKind::Rotational => &mut self.rot,
        }
    }

    fn node(&mut self, state: Arc<WorldState>, candidates: Vec<usize>, path: Vec<MotionPath>, initial: bool) -> Node {
        let cfg = self.run.cfg;
        let key = StateKey::new(&state, cfg.delta_t, cfg.delta_r);
        let n = Node { id: self.next_id, order: 0, state, key, candidates, path, initial };
        self.next_id += 1;
        n
    }

    fn enqueue(&mut self, kind: MotionKind, mut nodes: Vec<Node>) {
        for n in &mut nodes {
            n.order = self.next_order;
            self.next_order += 1;
        }
        self.lists(kind).open.extend(nodes);
    }

    fn solve(&mut self) -> Result<(), Failure> {
        let problem = self.run.problem;
        let s0 = Arc::new(problem.initial_state());
        let m = self.remaining.len();
        if m <= 1 || (m == 2 && is_disassembled(problem, &s0, 0, &self.remaining)) {
            return Ok(());
        }
        let root = self.node(s0, self.remaining.clone(), vec![], true);
        self.enqueue(MotionKind::Translational, vec![root.clone()]);
        self.enqueue(MotionKind::Rotational, vec![root]);
        loop {
            let before = (self.run.stats.sim_count, self.remaining.len());
            for kind in [MotionKind::Translational, MotionKind::Rotational] {
                match self.pass(kind) {
                    PassEnd::Goal => return Ok(()),
                    PassEnd::Failed(f) => return Err(f),
                    PassEnd::Done => {}
                }
            }
            if (self.run.stats.sim_count, self.remaining.len()) == before {
                return Err(Failure::Exhausted);
            }
        }
    }

    fn score(&mut self, kind: MotionKind, node: &Node) -> EvalScore {
        if node.initial || !self.guided {
            return INITIAL_SCORE;
        }
        let store = match kind {
            MotionKind::Translational => &mut self.dbg_t,
            MotionKind::Rotational => &mut self.dbg_r,
        };
        let (problem, cfg) = (self.run.problem, self.run.cfg);
        dbg_set(store, kind, problem, cfg, &self.remaining, &mut self.run.stats, &node.key, &node.state).eval(node.candidates[0])
    }

    /// Open list in extraction order with the scores used to rank it.
    fn ranked(&mut self, kind: MotionKind) -> Vec<(EvalScore, u64, usize)> {
        let open = std::mem::take(&mut self.lists(kind).open);
        let mut ranked: Vec<(EvalScore, u64, usize)> = Vec::with_capacity(open.len());
        for (i, n) in open.iter().enumerate() {
            let s = if self.guided { self.score(kind, n) } else { INITIAL_SCORE };
            ranked.push((s, n.order, i));
        }
        self.lists(kind).open = open;
        ranked.sort_unstable();
        ranked
    }

    fn extract(&mut self, kind: MotionKind) -> (Node, EvalScore) {
        let (score, _, idx) = self.ranked(kind)[0];
        (self.lists(kind).open.remove(idx), score)
    }

    /// Candidate parts in the order they are tried.
    fn ordered_candidates(&mut self, kind: MotionKind, node: &Node) -> Vec<usize> {
        let mut parts = node.candidates.clone();
        if node.initial && self.guided {
            let store = match kind {
                MotionKind::Translational => &mut self.dbg_t,
                MotionKind::Rotational => &mut self.dbg_r,
            };
            let (problem, cfg) = (self.run.problem, self.run.cfg);
            let set = dbg_set(store, kind, problem, cfg, &self.remaining, &mut self.run.stats, &node.key, &node.state);
            parts.sort_by_key(|&p| (set.eval(p), p));
        }
        parts
    }

    fn allowed(&mut self, kind: MotionKind, node: &Node, part: usize) -> Vec<Action> {
        let actions = Action::actions_for(kind);
        if !self.guided {
            return actions;
        }
        let store = match kind {
            MotionKind::Translational => &mut self.dbg_t,
            MotionKind::Rotational => &mut self.dbg_r,
        };
        let (problem, cfg) = (self.run.problem, self.run.cfg);
        let set = dbg_set(store, kind, problem, cfg, &self.remaining, &mut self.run.stats, &node.key, &node.state);
        let allowed = set.allowed_actions(part);
        self.run.stats.skipped_actions += (actions.len() - allowed.len()) as u64;
        allowed
    }

    fn snapshot(&mut self, kind: MotionKind, pass: usize) {
        let ranked = self.ranked(kind);
        let open = &self.lists(kind).open;
        let entries =
            ranked.iter().map(|&(score, _, i)| QueueEntry { node: open[i].id, candidates: open[i].candidates.clone(), score }).collect();
        self.run.log.queues.push(QueueSnapshot { pass, kind, entries });
    }

    /// Moves the collision list back into the open list and removes duplicates.
    fn refresh(&mut self, kind: MotionKind) {
        let cfg = self.run.cfg;
        let closed = std::mem::take(&mut self.lists(kind).closed);
        self.enqueue(kind, closed);
        let open = std::mem::take(&mut self.lists(kind).open);
        self.lists(kind).open = rmd(open, cfg.delta_t, cfg.delta_r);
    }

    /// Forgets every node committed to `part`, in both planning modes.
    fn delete(&mut self, part: usize) {
        for lists in [&mut self.trans, &mut self.rot] {
            for list in [&mut lists.open, &mut lists.closed] {
                list.retain(|n| n.initial || n.candidates != [part]);
                for n in list.iter_mut().filter(|n| n.initial) {
                    n.candidates.retain(|&q| q != part);
                }
            }
        }
        self.dbg_t.remove_part(part);
        self.dbg_r.remove_part(part);
    }

    fn pass(&mut self, kind: MotionKind) -> PassEnd {
        self.run.stats.passes += 1;
        let pass = self.run.stats.passes as usize;
        self.snapshot(kind, pass);
        while !self.lists(kind).open.is_empty() {
            let (node, score) = self.extract(kind);
            self.lists(kind).closed.push(node.clone());
            if let Some(f) = self.run.check() {
                return PassEnd::Failed(f);
            }
            self.run.stats.expansions += 1;
            self.run.log.expansions.push(Expansion { pass, kind, node: node.id, candidates: node.candidates.clone(), score });
            for part in self.ordered_candidates(kind, &node) {
                if !self.remaining.contains(&part) {
                    continue;
                }
                for action in self.allowed(kind, &node, part) {
                    if let Some(f) = self.run.check() {
                        return PassEnd::Failed(f);
                    }
                    let t = self.transition(&node.state, part, action);
                    let mut path = node.path.clone();
                    path.push(t.path.clone());
                    if t.outcome.is_disassembled() {
                        let part_id = self.run.problem.parts[part].id.clone();
                        self.plan.entries.push(PlanEntry { part, part_id, segments: path, remains: false });
                        self.remaining.retain(|&q| q != part);
                        self.delete(part);
                        if self.remaining.len() <= 1 {
                            self.plan.finish(self.run.problem, &self.remaining);
                            return PassEnd::Goal;
                        }
                        self.refresh(kind);
                        if kind == MotionKind::Rotational {
                            return PassEnd::Done;
                        }
                        break;
                    }
                    if self.guided && t.outcome != SimOutcome::PathTimeout {
                        let store = match kind {
                            MotionKind::Translational => &mut self.dbg_t,
                            MotionKind::Rotational => &mut self.dbg_r,
                        };
                        let (problem, cfg) = (self.run.problem, self.run.cfg);
                        dbg_set(store, kind, problem, cfg, &self.remaining, &mut self.run.stats, &node.key, &node.state)
                            .update_on_collision(action, part, t.outcome.blockers());
                    }
                    if !t.path.is_stationary() {
                        let child = self.node(Arc::new(t.state), vec![part], path, false);
                        self.lists(kind).closed.push(child);
                    }
                }
            }
        }
        self.refresh(kind);
        PassEnd::Done
    }

    /// Simulation through the transition cache. A cached result is reused
    /// when the remaining set is unchanged and adjusted for removed parts
    /// otherwise; a collision whose blockers are all gone resumes from where
    /// it stopped.
    fn transition(&mut self, state: &WorldState, part: usize, action: Action) -> Transition {
        let key = (pose_bits(state), part, action);
        let t = match self.cache.get(&key) {
            Some(e) if e.remaining == self.remaining => {
                self.run.stats.cache_hits += 1;
                return e.transition.clone();
            }
            Some(e) => {
                let cached = e.transition.clone();
                self.rederive(state, cached)
            }
            None => self.run.simulate(state, part, action, &self.remaining),
        };
        self.cache.insert(key, CacheEntry { transition: t.clone(), remaining: self.remaining.clone() });
        t
    }

    fn rederive(&mut self, state: &WorldState, cached: Transition) -> Transition {
        let (problem, part, action) = (self.run.problem, cached.path.part, cached.path.action);
        if cached.outcome == SimOutcome::PathTimeout {
            return self.run.simulate(state, part, action, &self.remaining);
        }
        self.run.stats.cache_hits += 1;
        if let Some(k) = first_separated(problem, state, part, &self.remaining, &cached.path.waypoints) {
            let mut path = cached.path;
            path.waypoints.truncate(k + 1);
            return Transition { state: state.with_pose(part, path.waypoints[k]), path, outcome: SimOutcome::Disassembled };
        }
        let live: Vec<usize> = cached.outcome.blockers().iter().copied().filter(|q| self.remaining.contains(q)).collect();
        match cached.outcome {
            SimOutcome::Collision { .. } if live.is_empty() => {
                let next = self.run.simulate(&cached.state, part, action, &self.remaining);
                let mut path = cached.path;
                path.waypoints.extend_from_slice(&next.path.waypoints[1..]);
                Transition { state: next.state, path, outcome: next.outcome }
            }
            SimOutcome::Collision { .. } => Transition { outcome: SimOutcome::Collision { blockers: live }, ..cached },
            SimOutcome::Stalled { .. } => Transition { outcome: SimOutcome::Stalled { contacts: live }, ..cached },
            _ => cached,
        }
    }
}
