//! Benchmark sweeps: suite generation, planner runs, coverage curves and
//! per-mode aggregates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::exec::{map_slice, with_threads, Exec};
use crate::io::{generate, read_manifest, write_synthetic, Family, LoadError, RunRecord, SynthError};
use crate::planner::{plan, validate_plan, DisassemblyPlan, Mode, PlannerConfig, ValidationReport};
use crate::problem::{AssemblyProblem, BuildOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteEntry {
    pub family: Family,
    pub parts: usize,
    pub seed: u64,
}

/// Eighteen problems over all families with 3 to 9 parts.
pub fn default_suite() -> Vec<SuiteEntry> {
    let mut out = Vec::new();
    let mut add = |family, counts: &[usize]| {
        for &parts in counts {
            out.push(SuiteEntry { family, parts, seed: out.len() as u64 });
        }
    };
    add(Family::BoltWasherPin, &[3, 3, 3]);
    add(Family::PegBoard, &[3, 5, 7, 9]);
    add(Family::NestedBoxes, &[3, 5, 7, 9]);
    add(Family::SlidingTrayStack, &[3, 5, 7, 9]);
    add(Family::RotationHook, &[3, 5, 7]);
    out
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("suite directory {0} contains no manifests")]
    EmptySuite(PathBuf),
}

/// Writes every suite problem into `dir`; returns the manifest paths.
pub fn write_suite(dir: &Path, suite: &[SuiteEntry]) -> Result<Vec<PathBuf>, BenchError> {
    suite
        .iter()
        .map(|e| {
            let asm = generate(e.family, e.parts, e.seed)?;
            write_synthetic(dir, &asm).map_err(|source| BenchError::Io { path: dir.into(), source })
        })
        .collect()
}

/// Manifests (`*.json`) directly inside `dir`, sorted by file name.
pub fn suite_manifests(dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let io_err = |source| BenchError::Io { path: dir.into(), source };
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        if path.extension().is_some_and(|e| e == "json") && read_manifest(&path).is_ok() {
            out.push(path);
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(BenchError::EmptySuite(dir.into()));
    }
    Ok(out)
}

pub struct SuiteProblem {
    pub manifest: PathBuf,
    pub problem: AssemblyProblem,
    pub rotation_required: Option<bool>,
}

pub fn load_suite(manifests: &[PathBuf], opts: &BuildOptions) -> Result<Vec<SuiteProblem>, BenchError> {
    manifests
        .iter()
        .map(|m| {
            let hints = read_manifest(m)?;
            let problem = crate::io::load_problem(m, opts)?;
            Ok(SuiteProblem { manifest: m.clone(), problem, rotation_required: hints.rotation_required })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub modes: Vec<Mode>,
    pub seeds: Vec<u64>,
    pub jobs: usize,
    /// Template; `mode` and `seed` are set per run.
    pub planner: PlannerConfig,
}

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub record: RunRecord,
    pub plan: Option<DisassemblyPlan>,
    pub validation: Option<ValidationReport>,
}

/// Runs every (problem, mode, seed) on a pool of `jobs` workers. Each run
/// is single-threaded; results are sorted by (problem, mode, seed).
pub fn run_sweep(problems: &[SuiteProblem], cfg: &BenchConfig) -> Vec<SweepRun> {
    let mut tasks = Vec::new();
    for (i, _) in problems.iter().enumerate() {
        for &mode in &cfg.modes {
            for &seed in &cfg.seeds {
                tasks.push((i, mode, seed));
            }
        }
    }
    let exec = if cfg.jobs > 1 { Exec::Parallel } else { Exec::Sequential };
    let mut runs = with_threads(cfg.jobs, || {
        map_slice(exec, &tasks, |&(i, mode, seed)| {
            let p = &problems[i].problem;
            let pc = PlannerConfig { mode, seed, ..cfg.planner.clone() };
            let result = plan(p, &pc);
            let validation = result.plan.as_ref().map(|pl| validate_plan(p, pl, &pc.sim));
            SweepRun { record: RunRecord::from_result(&p.name, seed, &result), plan: result.plan, validation }
        })
    });
    runs.sort_by(|a, b| (&a.record.problem, a.record.mode, a.record.seed).cmp(&(&b.record.problem, b.record.mode, b.record.seed)));
    runs
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveragePoint {
    pub mode: Mode,
    pub time_s: f64,
    pub solved: usize,
}

/// Logarithmic time checkpoints from 10 ms up to `max_s` (four per decade).
pub fn checkpoints(max_s: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let t = 0.01 * 10f64.powf(k as f64 / 4.0);
        if t > max_s * 1.0001 {
            break;
        }
        out.push(t);
        k += 1;
    }
    out
}

/// Cumulative solved count per mode at each checkpoint.
pub fn coverage(records: &[RunRecord], checkpoints: &[f64]) -> Vec<CoveragePoint> {
    let modes: BTreeSet<Mode> = records.iter().map(|r| r.mode).collect();
    let mut out = Vec::new();
    for mode in modes {
        for &t in checkpoints {
            let solved = records.iter().filter(|r| r.mode == mode && r.solved && r.total_time_s <= t).count();
            out.push(CoveragePoint { mode, time_s: t, solved });
        }
    }
    out
}

pub fn coverage_csv(points: &[CoveragePoint]) -> String {
    let mut out = String::from("mode,time_s,solved\n");
    for p in points {
        writeln!(out, "{},{},{}", p.mode, p.time_s, p.solved).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub mode: Mode,
    pub solved: usize,
    pub runs: usize,
    /// Runs solved by every mode in the comparison.
    pub common: usize,
    pub sim_mean: f64,
    pub sim_std: f64,
    pub pt_mean: f64,
    pub pt_std: f64,
    pub dt_mean: f64,
    pub dt_std: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// (problem, seed) pairs solved by every mode in `modes`.
pub fn commonly_solved(records: &[RunRecord], modes: &[Mode]) -> BTreeSet<(String, u64)> {
    let mut solved: BTreeMap<(String, u64), BTreeSet<Mode>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.solved && modes.contains(&r.mode)) {
        solved.entry((r.problem.clone(), r.seed)).or_default().insert(r.mode);
    }
    solved.into_iter().filter(|(_, m)| modes.iter().all(|x| m.contains(x))).map(|(k, _)| k).collect()
}

/// Avg/Std of Sim, PT and DT per mode over the commonly solved runs.
pub fn aggregates(records: &[RunRecord], modes: &[Mode]) -> Vec<Aggregate> {
    let common = commonly_solved(records, modes);
    modes
        .iter()
        .map(|&mode| {
            let mine: Vec<&RunRecord> = records.iter().filter(|r| r.mode == mode).collect();
            let shared: Vec<&RunRecord> = mine.iter().copied().filter(|r| common.contains(&(r.problem.clone(), r.seed))).collect();
            let col = |f: fn(&RunRecord) -> f64| mean_std(&shared.iter().map(|r| f(r)).collect::<Vec<_>>());
            let (sim_mean, sim_std) = col(|r| r.sim_count as f64);
            let (pt_mean, pt_std) = col(|r| r.path_time_s);
            let (dt_mean, dt_std) = col(|r| r.total_time_s);
            Aggregate {
                mode,
                solved: mine.iter().filter(|r| r.solved).count(),
                runs: mine.len(),
                common: shared.len(),
                sim_mean,
                sim_std,
                pt_mean,
                pt_std,
                dt_mean,
                dt_std,
            }
        })
        .collect()
}

pub fn summary_table(aggs: &[Aggregate]) -> String {
    let mut out = String::from("mode    solved  common  Sim avg   Sim std   PT avg    PT std    DT avg    DT std\n");
    for a in aggs {
        writeln!(
            out,
            "{:<7} {:>3}/{:<3} {:>6}  {:>8.1}  {:>8.1}  {:>8.3}  {:>8.3}  {:>8.3}  {:>8.3}",
            a.mode.name(),
            a.solved,
            a.runs,
            a.common,
            a.sim_mean,
            a.sim_std,
            a.pt_mean,
            a.pt_std,
            a.dt_mean,
            a.dt_std
        )
        .unwrap();
    }
    out
}
