use std::collections::BTreeSet;

use disasm_core::bench::{checkpoints, commonly_solved, coverage};
use disasm_core::dbg::{DbgSet, StateKey};
use disasm_core::geometry::{Aabb, Mesh, Point, Vec3};
use disasm_core::io::RunRecord;
use disasm_core::planner::Mode;
use disasm_core::simulation::{max_penetration, simulate, Action, Pose, SimConfig, SimOutcome, WorldState};
use disasm_core::{AssemblyProblem, BuildOptions};
use nalgebra::UnitQuaternion;
use proptest::prelude::*;

fn action_strategy() -> impl Strategy<Value = Action> {
    (0..12usize).prop_map(|i| Action::all()[i])
}

fn edges_strategy(parts: usize) -> impl Strategy<Value = Vec<(Action, usize, usize)>> {
    prop::collection::vec((action_strategy(), 0..parts, 0..parts), 0..40)
}

fn pose_strategy() -> impl Strategy<Value = Pose> {
    (prop::array::uniform3(-5.0..5.0f64), prop::array::uniform3(-3.0..3.0f64))
        .prop_map(|(t, r)| Pose { translation: Vec3::from(t), rotation: UnitQuaternion::from_scaled_axis(Vec3::from(r)) })
}

proptest! {
    #[test]
    fn eval_counts_match_graphs(edges in edges_strategy(5), part in 0..5usize) {
        let actions = Action::all();
        let mut set = DbgSet::empty(&actions, &[0, 1, 2, 3, 4]);
        for &(a, u, v) in &edges {
            set.update_on_collision(a, u, &[v]);
        }
        let e = set.eval(part);
        prop_assert_eq!(e.f_a as usize, set.allowed_actions(part).len());
        let blockers: BTreeSet<usize> = edges.iter().filter(|&&(_, u, v)| u == part && v != part).map(|&(_, _, v)| v).collect();
        prop_assert_eq!(e.f_c as usize, blockers.len());
        let blocked: BTreeSet<Action> = edges.iter().filter(|&&(_, u, v)| u == part && v != part).map(|&(a, _, _)| a).collect();
        prop_assert_eq!(e.f_a as usize, actions.len() - blocked.len());
    }

    #[test]
    fn removing_a_part_drops_its_edges(edges in edges_strategy(5), gone in 0..5usize, part in 0..5usize) {
        let mut set = DbgSet::empty(&Action::all(), &[0, 1, 2, 3, 4]);
        for &(a, u, v) in &edges {
            set.update_on_collision(a, u, &[v]);
        }
        let before = set.eval(part);
        set.remove_part(gone);
        prop_assert!(set.graphs.values().all(|g| g.edges.iter().all(|&(u, v)| u != gone && v != gone)));
        if part != gone {
            let after = set.eval(part);
            prop_assert!(after.f_c <= before.f_c && after.f_a >= before.f_a);
        }
    }

    #[test]
    fn more_collisions_never_free_actions(edges in edges_strategy(4), extra in (action_strategy(), 0..4usize, 0..4usize), part in 0..4usize) {
        let mut set = DbgSet::empty(&Action::all(), &[0, 1, 2, 3]);
        for &(a, u, v) in &edges {
            set.update_on_collision(a, u, &[v]);
        }
        let before = set.eval(part);
        set.update_on_collision(extra.0, extra.1, &[extra.2]);
        let after = set.eval(part);
        prop_assert!(after.f_a <= before.f_a && after.f_c >= before.f_c);
    }

    #[test]
    fn state_key_is_stable_and_sees_a_full_step(poses in prop::collection::vec(pose_strategy(), 1..4), axis in 0..3usize) {
        let state = WorldState { poses: poses.clone() };
        let (dt, dr) = (0.05, 0.5);
        prop_assert_eq!(StateKey::new(&state, dt, dr), StateKey::new(&state.clone(), dt, dr));
        let mut shift = Vec3::zeros();
        shift[axis] = 1.5 * dt;
        let moved = state.with_pose(0, poses[0].translated(&shift));
        prop_assert_ne!(StateKey::new(&state, dt, dr), StateKey::new(&moved, dt, dr));
    }

    #[test]
    fn pose_inverse_round_trips(pose in pose_strategy(), p in prop::array::uniform3(-4.0..4.0f64)) {
        let p = Point::from(p);
        let back = pose.apply_inverse(&pose.apply(&p));
        prop_assert!((back - p).norm() < 1e-9);
    }

    #[test]
    fn rotation_about_pivot_keeps_it_fixed(pose in pose_strategy(), body in prop::array::uniform3(-2.0..2.0f64), r in prop::array::uniform3(-1.5..1.5f64)) {
        let pivot = pose.apply(&Point::from(body));
        let turned = pose.rotated_about(&pivot, &UnitQuaternion::from_scaled_axis(Vec3::from(r)));
        prop_assert!((turned.apply(&Point::from(body)) - pivot).norm() < 1e-9);
    }

    #[test]
    fn coverage_is_monotone_and_bounded(times in prop::collection::vec((0.0..50.0f64, any::<bool>()), 1..30)) {
        let records: Vec<RunRecord> = times
            .iter()
            .enumerate()
            .map(|(i, &(t, solved))| RunRecord {
                problem: format!("p{}", i / 2),
                mode: if i % 2 == 0 { Mode::SbdpStar } else { Mode::PdpT },
                seed: 0,
                solved,
                sim_count: 1,
                repeated_sims: 0,
                path_time_s: t,
                total_time_s: t,
                failure_reason: String::new(),
            })
            .collect();
        let cps = checkpoints(50.0);
        prop_assert!(cps.windows(2).all(|w| w[0] < w[1]));
        let pts = coverage(&records, &cps);
        for mode in [Mode::SbdpStar, Mode::PdpT] {
            let counts: Vec<usize> = pts.iter().filter(|c| c.mode == mode).map(|c| c.solved).collect();
            prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
            let solved = records.iter().filter(|r| r.mode == mode && r.solved).count();
            prop_assert!(counts.iter().all(|&c| c <= solved));
        }
        let common = commonly_solved(&records, &[Mode::SbdpStar, Mode::PdpT]);
        for (name, _) in &common {
            prop_assert!(records.iter().filter(|r| &r.problem == name).all(|r| r.solved));
        }
    }
}

fn pair_problem(gap: [f64; 3], size: [f64; 3]) -> AssemblyProblem {
    let base = Mesh::cuboid(&Aabb::from_corners([0.0; 3], [2.0, 0.5, 2.0]));
    let lo = [gap[0], 0.5, gap[2]];
    let top = Mesh::cuboid(&Aabb::from_corners(lo, [lo[0] + size[0], lo[1] + size[1], lo[2] + size[2]]));
    let opts = BuildOptions { sdf_resolution: 24, ..Default::default() };
    AssemblyProblem::new("pair", vec![("base".into(), base), ("top".into(), top)], &opts).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simulated_paths_respect_contact_and_step(
        gap in prop::array::uniform3(0.0..1.0f64),
        size in prop::array::uniform3(0.3..1.0f64),
        action in action_strategy(),
        mover in 0..2usize,
    ) {
        let p = pair_problem(gap, size);
        let sim = SimConfig::default();
        let s0 = p.initial_state();
        let t = simulate(&p, &s0, mover, action, &[0, 1], &sim);
        prop_assert_eq!(&t, &simulate(&p, &s0, mover, action, &[0, 1], &sim));
        for w in &t.path.waypoints {
            let st = s0.with_pose(mover, *w);
            prop_assert!(max_penetration(&p, &st, &[0, 1]) <= sim.penetration_threshold + 1e-12);
        }
        for w in t.path.waypoints.windows(2) {
            let (dt, dr) = w[0].distance(&w[1]);
            prop_assert!(dt <= sim.path_step + 1e-9 && dr <= sim.rotation_step + 1e-9);
        }
        if t.outcome == SimOutcome::Disassembled {
            prop_assert!(disasm_core::simulation::is_disassembled(&p, &t.state, mover, &[0, 1]));
        }
    }
}
