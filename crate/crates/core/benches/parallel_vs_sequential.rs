use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use disasm_core::bench::{run_sweep, BenchConfig, SuiteProblem};
use disasm_core::exec::Exec;
use disasm_core::geometry::SdfGrid;
use disasm_core::io::{generate, Family};
use disasm_core::planner::{Mode, PlannerConfig};
use disasm_core::{AssemblyProblem, BuildOptions};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn sdf_build(c: &mut Criterion) {
    let asm = generate(Family::PegBoard, 5, 0).unwrap();
    let board = &asm.parts.iter().find(|(id, _)| id == "board").unwrap().1;
    let mut g = c.benchmark_group("sdf_build");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::new(name, 64), &exec, |b, &exec| b.iter(|| SdfGrid::build_with(board, 64, exec).unwrap()));
    }
    g.finish();
}

fn problem_build(c: &mut Criterion) {
    let asm = generate(Family::NestedBoxes, 7, 0).unwrap();
    let mut g = c.benchmark_group("problem_build");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        let opts = BuildOptions { exec, ..Default::default() };
        g.bench_function(name, |b| b.iter(|| AssemblyProblem::new(asm.name.clone(), asm.parts.clone(), &opts).unwrap()));
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let problems: Vec<SuiteProblem> = [(Family::SlidingTrayStack, 5), (Family::NestedBoxes, 3), (Family::BoltWasherPin, 3)]
        .into_iter()
        .map(|(f, n)| {
            let asm = generate(f, n, 0).unwrap();
            let problem = AssemblyProblem::new(asm.name.clone(), asm.parts, &BuildOptions::default()).unwrap();
            SuiteProblem { manifest: Default::default(), problem, rotation_required: Some(asm.rotation_required) }
        })
        .collect();
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut g = c.benchmark_group("sweep");
    g.sample_size(10);
    for (name, jobs) in [("sequential", 1), ("parallel", threads.max(2))] {
        let cfg = BenchConfig { modes: vec![Mode::SbdpStar, Mode::Sbdp], seeds: vec![0], jobs, planner: PlannerConfig::default() };
        g.bench_function(name, |b| b.iter(|| run_sweep(&problems, &cfg)));
    }
    g.finish();
}

criterion_group!(benches, sdf_build, problem_build, sweep);
criterion_main!(benches);
