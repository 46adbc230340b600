use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::planner::{DisassemblyPlan, Failure, Mode, PlanEntry, PlanResult, PlannerConfig};

pub const PLAN_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanMetrics {
    pub sim_count: u64,
    pub repeated_sims: u64,
    pub path_time_s: f64,
    pub total_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub version: u32,
    pub problem: String,
    /// Manifest the plan was computed for, if it came from one.
    pub manifest: Option<PathBuf>,
    pub sdf_resolution: usize,
    pub config: PlannerConfig,
    pub solved: bool,
    pub failure: Option<Failure>,
    pub entries: Vec<PlanEntry>,
    pub metrics: PlanMetrics,
}

impl PlanFile {
    pub fn new(
        problem: &str,
        manifest: Option<PathBuf>,
        sdf_resolution: usize,
        cfg: &PlannerConfig,
        plan: Option<&DisassemblyPlan>,
        failure: Option<Failure>,
        metrics: PlanMetrics,
    ) -> Self {
        PlanFile {
            version: PLAN_FORMAT_VERSION,
            problem: problem.to_string(),
            manifest,
            sdf_resolution,
            config: cfg.clone(),
            solved: plan.is_some(),
            failure,
            entries: plan.map(|p| p.entries.clone()).unwrap_or_default(),
            metrics,
        }
    }

    pub fn from_result(problem: &str, manifest: Option<PathBuf>, sdf_resolution: usize, cfg: &PlannerConfig, result: &PlanResult) -> Self {
        let metrics = PlanMetrics {
            sim_count: result.stats.sim_count,
            repeated_sims: result.stats.repeated_sims,
            path_time_s: result.stats.path_time_s,
            total_time_s: result.stats.total_time_s,
        };
        Self::new(problem, manifest, sdf_resolution, cfg, result.plan.as_ref(), result.failure, metrics)
    }

    pub fn plan(&self) -> DisassemblyPlan {
        DisassemblyPlan { entries: self.entries.clone() }
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn read(path: &Path) -> io::Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// One planner run in a benchmark sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub mode: Mode,
    pub seed: u64,
    pub solved: bool,
    pub sim_count: u64,
    pub repeated_sims: u64,
    pub path_time_s: f64,
    pub total_time_s: f64,
    pub failure_reason: String,
}

impl RunRecord {
    pub fn metrics(&self) -> PlanMetrics {
        PlanMetrics {
            sim_count: self.sim_count,
            repeated_sims: self.repeated_sims,
            path_time_s: self.path_time_s,
            total_time_s: self.total_time_s,
        }
    }

    pub fn from_result(problem: &str, seed: u64, result: &PlanResult) -> Self {
        RunRecord {
            problem: problem.to_string(),
            mode: result.mode,
            seed,
            solved: result.solved(),
            sim_count: result.stats.sim_count,
            repeated_sims: result.stats.repeated_sims,
            path_time_s: result.stats.path_time_s,
            total_time_s: result.stats.total_time_s,
            failure_reason: result.failure.map(|f| f.to_string()).unwrap_or_default(),
        }
    }
}

/// Comma-separated metrics, one row per record, in the given order.
pub fn metrics_csv(records: &[RunRecord]) -> String {
    let mut out = String::from("problem,mode,seed,solved,sim_count,repeated_sims,path_time_s,total_time_s,failure\n");
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{:.6},{:.6},{}",
            r.problem, r.mode, r.seed, r.solved, r.sim_count, r.repeated_sims, r.path_time_s, r.total_time_s, r.failure_reason
        )
        .unwrap();
    }
    out
}

/// Same rows without wall-clock columns; identical across reruns.
pub fn deterministic_csv(records: &[RunRecord]) -> String {
    let mut out = String::from("problem,mode,seed,solved,sim_count,repeated_sims,failure\n");
    for r in records {
        writeln!(out, "{},{},{},{},{},{},{}", r.problem, r.mode, r.seed, r.solved, r.sim_count, r.repeated_sims, r.failure_reason).unwrap();
    }
    out
}

/// Pretty-printed JSON of any serializable value.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")
}
