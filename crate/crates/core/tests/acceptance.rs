//! Acceptance run: one PASS/FAIL line per criterion. The full suite is
//! planned twice with every mode, so this takes a few minutes.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::time::Instant;

use disasm_core::bench::{self, BenchConfig, SuiteProblem, SweepRun};
use disasm_core::dbg::{static_analysis, EvalScore, StaticAnalysisConfig};
use disasm_core::geometry::{convex_hulls_disjoint, Aabb, Mesh, Vec3};
use disasm_core::io::{deterministic_csv, generate, Family, RunRecord};
use disasm_core::planner::{plan, Mode, PlannerConfig};
use disasm_core::simulation::{posed_hull, Action, Axis, MotionKind, Pose};
use disasm_core::{AssemblyProblem, BuildOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIM_BUDGET: u64 = 20_000;
const FIG4_MAX_S: f64 = 10.0;
const SUITE_MAX_S: f64 = 15.0 * 60.0;
const DBG_PAIRS: usize = 240;
const SWEEP_STEP: f64 = 1e-3;
const PEN_TOL: f64 = 0.01;
const SBDP_STAR_RATIO: f64 = 0.8;
const SBDP_RATIO: f64 = 0.9;

struct Report {
    lines: Vec<String>,
    failed: Vec<usize>,
}

impl Report {
    fn line(&mut self, n: usize, ok: bool, text: String) {
        let l = format!("criterion {n}: {} {text}", if ok { "PASS" } else { "FAIL" });
        println!("{l}");
        self.lines.push(l);
        if !ok {
            self.failed.push(n);
        }
    }
}

fn walkthrough(r: &mut Report) {
    let t0 = Instant::now();
    let asm = generate(Family::BoltWasherPin, 3, 0).unwrap();
    let p = AssemblyProblem::new(asm.name.clone(), asm.parts.clone(), &BuildOptions::default()).unwrap();
    let idx = |id: &str| p.part_index(id).unwrap();
    let s0 = p.initial_state();
    let set = static_analysis(&p, &s0, &p.all_parts(), &StaticAnalysisConfig::default());
    let score = |id: &str| set.eval(idx(id));
    let want = [("cover", (1, 1)), ("pin", (1, 2)), ("bolt", (2, 0))];
    let scores_ok = want.iter().all(|&(id, (f_c, f_a))| score(id) == EvalScore { f_c, f_a });

    let res = plan(&p, &PlannerConfig::with_mode(Mode::SbdpStar));
    let secs = t0.elapsed().as_secs_f64();
    let order: Vec<usize> = res
        .log
        .queues
        .iter()
        .find(|q| q.kind == MotionKind::Translational && q.pass > 1)
        .map(|q| q.entries.iter().map(|e| e.node).collect())
        .unwrap_or_default();
    let order_ok = order.len() == 4 && BTreeSet::from([order[0], order[1]]) == BTreeSet::from([2, 3]) && order[2..] == [1, 0];
    let removal = res.plan.as_ref().map(|pl| pl.removal_order().iter().map(|s| s.to_string()).collect::<Vec<_>>()).unwrap_or_default();
    let pos = |id: &str| removal.iter().position(|x| x == id);
    let pin_first = matches!((pos("pin"), pos("cover")), (Some(a), Some(b)) if a < b);
    r.line(
        1,
        scores_ok && order_ok && pin_first && secs < FIG4_MAX_S,
        format!(
            "s0 scores cover {:?} pin {:?} bolt {:?}; second translational queue {:?}; removal {:?}; {:.2}s (< {FIG4_MAX_S}s)",
            (score("cover").f_c, score("cover").f_a),
            (score("pin").f_c, score("pin").f_a),
            (score("bolt").f_c, score("bolt").f_a),
            order.iter().map(|n| format!("s{n}")).collect::<Vec<_>>(),
            removal,
            secs
        ),
    );
}

fn overlaps(a: &Aabb, b: &Aabb, shift: &Vec3) -> bool {
    (0..3).all(|i| (a.max[i] + shift[i]).min(b.max[i]) - (a.min[i] + shift[i]).max(b.min[i]) > 1e-9)
}

/// Dense straight-line sweep of `mobile` along `axis` on exact box geometry.
fn sweep_blocked(mobile: &[Aabb], stationary: &[Aabb], axis: Axis, envelope: f64) -> bool {
    let n = (envelope / SWEEP_STEP).ceil() as usize;
    (1..=n).any(|k| {
        let shift = axis.vector() * (k as f64 * SWEEP_STEP).min(envelope);
        mobile.iter().any(|m| stationary.iter().any(|s| overlaps(m, s, &shift)))
    })
}

fn random_box(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::new(rng.random_range(0.3..1.5), rng.random_range(0.3..1.5), rng.random_range(0.3..1.5))
}

/// Box of random size touching a random face of `base`, overlapping it
/// laterally or, sometimes, meeting it only along an edge.
fn attached(rng: &mut ChaCha8Rng, base: &Aabb) -> Aabb {
    let size = random_box(rng);
    let axis = rng.random_range(0..3);
    let mut lo = [0.0; 3];
    for j in 0..3 {
        lo[j] = if j == axis {
            if rng.random_bool(0.5) {
                base.max[j]
            } else {
                base.min[j] - size[j]
            }
        } else if rng.random_bool(0.1) {
            base.max[j]
        } else {
            base.min[j] + rng.random_range(-size[j] + 0.05..base.extent()[j] - 0.05)
        };
    }
    Aabb::from_corners(lo, [lo[0] + size[0], lo[1] + size[1], lo[2] + size[2]])
}

/// Two contacting, non-overlapping parts made of one or two boxes each.
fn random_pair(rng: &mut ChaCha8Rng) -> [Vec<Aabb>; 2] {
    loop {
        let s = random_box(rng);
        let a0 = Aabb::from_corners([0.0; 3], [s[0], s[1], s[2]]);
        let mut a = vec![a0];
        if rng.random_bool(0.3) {
            a.push(attached(rng, &a0));
        }
        let b0 = attached(rng, &a0);
        let mut b = vec![b0];
        if rng.random_bool(0.5) {
            b.push(attached(rng, &b0));
        }
        let zero = Vec3::zeros();
        if !a.iter().any(|x| b.iter().any(|y| overlaps(x, y, &zero))) {
            return [a, b];
        }
    }
}

fn dbg_soundness(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = StaticAnalysisConfig::default();
    let (mut edges, mut confirmed, mut truth) = (0, 0, 0);
    let mut unconfirmed = Vec::new();
    for pair in 0..DBG_PAIRS {
        let boxes = random_pair(&mut rng);
        let meshes = boxes.iter().zip(["a", "b"]).map(|(b, n)| (n.to_string(), Mesh::union_of_boxes(b))).collect();
        let p = AssemblyProblem::new_unaudited("pair", meshes, &BuildOptions::default()).unwrap();
        let set = static_analysis(&p, &p.initial_state(), &[0, 1], &cfg);
        let extent: Vec<Vec3> = boxes.iter().map(|b| b.iter().skip(1).fold(b[0], |u, x| u.union(x)).extent()).collect();
        for axis in Axis::ALL {
            let i = axis.index();
            let envelope = cfg.extension_steps as f64 * cfg.extension_distance(extent[0][i]).max(cfg.extension_distance(extent[1][i]));
            let g = &set.graphs[&Action::translate(axis)];
            for (u, v) in [(0, 1), (1, 0)] {
                let edge = g.edges.contains(&(u, v));
                let blocked = sweep_blocked(&boxes[u], &boxes[v], axis, envelope);
                edges += edge as usize;
                confirmed += (edge && blocked) as usize;
                truth += blocked as usize;
                if edge && !blocked {
                    unconfirmed.push((pair, axis, u, v));
                }
            }
        }
    }
    let recall = confirmed as f64 / truth.max(1) as f64;
    r.line(
        2,
        edges > 0 && confirmed == edges,
        format!(
            "{DBG_PAIRS} pairs, {confirmed}/{edges} static edges confirmed by a {SWEEP_STEP} sweep; recall {confirmed}/{truth} = {recall:.3}; unconfirmed {:?}",
            &unconfirmed[..unconfirmed.len().min(5)]
        ),
    );
}

const MODES: [Mode; 4] = [Mode::SbdpStar, Mode::Sbdp, Mode::PdpT, Mode::PdpStar];

fn sweep(problems: &[SuiteProblem]) -> (Vec<SweepRun>, f64) {
    let planner = PlannerConfig { sim_budget: Some(SIM_BUDGET), ..Default::default() };
    let cfg = BenchConfig { modes: MODES.to_vec(), seeds: vec![0], jobs: 1, planner };
    let t0 = Instant::now();
    let runs = bench::run_sweep(problems, &cfg);
    (runs, t0.elapsed().as_secs_f64())
}

fn problem_of<'a>(problems: &'a [SuiteProblem], name: &str) -> &'a SuiteProblem {
    problems.iter().find(|p| p.problem.name == name).unwrap()
}

/// Each removed part's final pose is hull-disjoint from every part still
/// in the assembly at that moment.
fn final_hulls_disjoint(p: &AssemblyProblem, run: &SweepRun) -> bool {
    let Some(plan) = &run.plan else { return true };
    let mut remaining = p.all_parts();
    for e in plan.entries.iter().filter(|e| !e.remains) {
        let end = e.segments.last().map(|s| *s.end()).unwrap_or_else(Pose::identity);
        let hull = posed_hull(p, e.part, &end);
        remaining.retain(|&q| q != e.part);
        if !remaining.iter().all(|&q| convex_hulls_disjoint(&hull, &posed_hull(p, q, &Pose::identity()))) {
            return false;
        }
    }
    true
}

fn validity(r: &mut Report, problems: &[SuiteProblem], runs: &[SweepRun]) {
    let mut bad = Vec::new();
    let mut plans = 0;
    let mut worst: f64 = 0.0;
    for run in runs.iter().filter(|x| x.plan.is_some()) {
        plans += 1;
        let p = &problem_of(problems, &run.record.problem).problem;
        let v = run.validation.as_ref().unwrap();
        worst = worst.max(v.max_penetration);
        let limit = PEN_TOL + p.max_sdf_spacing();
        if !v.valid || v.max_penetration > limit || !final_hulls_disjoint(p, run) {
            bad.push(format!("{} {}", run.record.problem, run.record.mode));
        }
    }
    r.line(
        3,
        bad.is_empty() && problems.len() >= 15,
        format!(
            "{} problems, {plans} plans, {} violations {:?}; worst penetration {worst:.4} (<= {PEN_TOL} + cell)",
            problems.len(),
            bad.len(),
            bad
        ),
    );
}

fn records_of(runs: &[SweepRun]) -> Vec<RunRecord> {
    runs.iter().map(|x| x.record.clone()).collect()
}

fn efficiency(r: &mut Report, runs: &[SweepRun]) {
    let records = records_of(runs);
    let trio = [Mode::SbdpStar, Mode::Sbdp, Mode::PdpT];
    let common = bench::commonly_solved(&records, &trio);
    let mean = |m: Mode| {
        let xs: Vec<f64> =
            records.iter().filter(|x| x.mode == m && common.contains(&(x.problem.clone(), x.seed))).map(|x| x.sim_count as f64).collect();
        xs.iter().sum::<f64>() / xs.len().max(1) as f64
    };
    let (star, sbdp, pdp) = (mean(Mode::SbdpStar), mean(Mode::Sbdp), mean(Mode::PdpT));
    let by_key: BTreeMap<(String, Mode), &RunRecord> = records.iter().map(|x| ((x.problem.clone(), x.mode), x)).collect();
    let mut worse = Vec::new();
    for ((name, _), star_rec) in by_key.iter().filter(|((_, m), x)| *m == Mode::SbdpStar && x.solved) {
        if let Some(plain) = by_key.get(&(name.clone(), Mode::Sbdp)).filter(|x| x.solved) {
            if star_rec.sim_count > plain.sim_count {
                worse.push(format!("{name} {}>{}", star_rec.sim_count, plain.sim_count));
            }
        }
    }
    let ok = star <= SBDP_STAR_RATIO * sbdp && sbdp <= SBDP_RATIO * pdp && worse.is_empty();
    r.line(
        4,
        ok,
        format!(
            "over {} common problems mean sims SBDP* {star:.1}, SBDP {sbdp:.1}, PDP_t {pdp:.1}; SBDP*/SBDP {:.3} (<= {SBDP_STAR_RATIO}), SBDP/PDP_t {:.3} (<= {SBDP_RATIO}); per-problem SBDP* > SBDP: {:?}",
            common.len(),
            star / sbdp,
            sbdp / pdp,
            worse
        ),
    );
}

fn coverage(r: &mut Report, problems: &[SuiteProblem], runs: &[SweepRun]) {
    let records = records_of(runs);
    let solved = |m: Mode| -> BTreeSet<String> { records.iter().filter(|x| x.mode == m && x.solved).map(|x| x.problem.clone()).collect() };
    let all: BTreeSet<String> = problems.iter().map(|p| p.problem.name.clone()).collect();
    let rot: BTreeSet<String> = problems.iter().filter(|p| p.rotation_required == Some(true)).map(|p| p.problem.name.clone()).collect();
    let pdp_failed: BTreeSet<String> = all.difference(&solved(Mode::PdpT)).cloned().collect();
    let star_all = solved(Mode::SbdpStar) == all;
    let max_t = records.iter().map(|x| x.total_time_s).fold(1.0, f64::max);
    let points = bench::coverage(&records, &bench::checkpoints(max_t));
    let count = |m: Mode, t: f64| points.iter().find(|c| c.mode == m && c.time_s == t).map_or(0, |c| c.solved);
    let behind: Vec<String> = bench::checkpoints(max_t)
        .into_iter()
        .filter(|&t| count(Mode::SbdpStar, t) < count(Mode::Sbdp, t))
        .map(|t| format!("{t:.3}s {}<{}", count(Mode::SbdpStar, t), count(Mode::Sbdp, t)))
        .collect();
    r.line(
        5,
        star_all && !rot.is_empty() && pdp_failed == rot && behind.is_empty(),
        format!(
            "SBDP* solved {}/{}; PDP_t failed {:?}, rotation-required {:?}; checkpoints where SBDP* trails SBDP: {:?}",
            solved(Mode::SbdpStar).len(),
            all.len(),
            pdp_failed,
            rot,
            behind
        ),
    );
}

fn determinism(r: &mut Report, first: &[SweepRun], second: &[SweepRun], secs: f64) {
    let (a, b) = (deterministic_csv(&records_of(first)), deterministic_csv(&records_of(second)));
    let plans_equal = first.iter().zip(second).all(|(x, y)| x.plan == y.plan);
    r.line(
        6,
        a == b && plans_equal && secs < SUITE_MAX_S,
        format!("metric tables identical: {}; plans identical: {plans_equal}; suite sweep {secs:.1}s (< {SUITE_MAX_S}s)", a == b),
    );
}

fn no_rebuild(r: &mut Report, problems: &[SuiteProblem], runs: &[SweepRun]) {
    let mut exact = 0;
    let mut quantized = 0;
    for sp in problems {
        for mode in [Mode::SbdpStar, Mode::Sbdp] {
            let mut cfg = PlannerConfig::with_mode(mode);
            cfg.sim_budget = Some(SIM_BUDGET);
            let res = plan(&sp.problem, &cfg);
            exact += res.stats.repeated_sims;
            let mut seen = HashSet::new();
            quantized += res.log.sims.iter().filter(|x| !seen.insert((x.key, x.part, x.action))).count();
        }
    }
    let mut pdp = String::new();
    for mode in [Mode::PdpT, Mode::PdpStar] {
        let (rep, sims) =
            runs.iter().filter(|x| x.record.mode == mode).fold((0, 0), |(a, b), x| (a + x.record.repeated_sims, b + x.record.sim_count));
        write!(pdp, " {mode} {rep}/{sims}").unwrap();
    }
    let pdp_counted = runs.iter().any(|x| !x.record.mode.is_sbdp() && x.record.repeated_sims > 0);
    r.line(
        7,
        exact == 0 && quantized == 0 && pdp_counted,
        format!("SBDP/SBDP* repeated simulate calls: {exact} exact, {quantized} by state key; PDP repeated/total:{pdp}"),
    );
}

#[test]
fn acceptance() {
    let mut r = Report { lines: Vec::new(), failed: Vec::new() };
    walkthrough(&mut r);
    dbg_soundness(&mut r);

    let dir = tempfile::tempdir().unwrap();
    let manifests = bench::write_suite(dir.path(), &bench::default_suite()).unwrap();
    let problems = bench::load_suite(&manifests, &BuildOptions::default()).unwrap();
    let (runs, secs) = sweep(&problems);
    validity(&mut r, &problems, &runs);
    efficiency(&mut r, &runs);
    coverage(&mut r, &problems, &runs);
    let (again, _) = sweep(&problems);
    determinism(&mut r, &runs, &again, secs);
    no_rebuild(&mut r, &problems, &runs);
    assert!(r.failed.is_empty(), "failed criteria: {:?}\n{}", r.failed, r.lines.join("\n"));
}
