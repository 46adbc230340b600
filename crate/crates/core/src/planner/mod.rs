mod pdp;
mod runner;
mod sbdp;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dbg::{EvalScore, StaticAnalysisConfig};
use crate::problem::AssemblyProblem;
use crate::simulation::{Action, MotionKind, MotionPath, SimConfig};

pub use runner::{state_fingerprint, Expansion, QueueEntry, QueueSnapshot, RunLog, RunStats, SimRecord};
pub use validate::{validate_plan, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "SBDP")]
    Sbdp,
    #[serde(rename = "SBDP*")]
    SbdpStar,
    #[serde(rename = "PDP_t")]
    PdpT,
    #[serde(rename = "PDP_r")]
    PdpR,
    #[serde(rename = "PDP*")]
    PdpStar,
}

impl Mode {
    pub const ALL: [Mode; 5] = [Mode::SbdpStar, Mode::Sbdp, Mode::PdpT, Mode::PdpR, Mode::PdpStar];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Sbdp => "SBDP",
            Mode::SbdpStar => "SBDP*",
            Mode::PdpT => "PDP_t",
            Mode::PdpR => "PDP_r",
            Mode::PdpStar => "PDP*",
        }
    }

    pub fn is_sbdp(self) -> bool {
        matches!(self, Mode::Sbdp | Mode::SbdpStar)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', '_'], "");
        match norm.as_str() {
            "sbdp" => Ok(Mode::Sbdp),
            "sbdp*" | "sbdpstar" => Ok(Mode::SbdpStar),
            "pdpt" => Ok(Mode::PdpT),
            "pdpr" => Ok(Mode::PdpR),
            "pdp*" | "pdpstar" => Ok(Mode::PdpStar),
            _ => Err(format!("unknown mode `{s}` (expected SBDP, SBDP*, PDP_t, PDP_r or PDP*)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub mode: Mode,
    pub global_timeout_s: f64,
    pub delta_t: f64,
    pub delta_r: f64,
    pub seed: u64,
    /// Stop after this many simulate calls; keeps benchmark tables
    /// independent of machine speed.
    pub sim_budget: Option<u64>,
    pub sim: SimConfig,
    pub static_analysis: StaticAnalysisConfig,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            mode: Mode::SbdpStar,
            global_timeout_s: 7200.0,
            delta_t: 0.05,
            delta_r: 0.5,
            seed: 0,
            sim_budget: None,
            sim: SimConfig::default(),
            static_analysis: StaticAnalysisConfig::default(),
        }
    }
}

impl PlannerConfig {
    pub fn with_mode(mode: Mode) -> Self {
        PlannerConfig { mode, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub part: usize,
    pub part_id: String,
    pub segments: Vec<MotionPath>,
    /// Last part left in place once everything else is gone.
    #[serde(default)]
    pub remains: bool,
}

impl PlanEntry {
    pub fn kinds(&self) -> Vec<MotionKind> {
        self.segments.iter().map(|s| s.action.kind).collect()
    }

    pub fn actions(&self) -> Vec<Action> {
        self.segments.iter().map(|s| s.action).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DisassemblyPlan {
    pub entries: Vec<PlanEntry>,
}

impl DisassemblyPlan {
    /// Ids of removed parts, in removal order.
    pub fn removal_order(&self) -> Vec<&str> {
        self.entries.iter().filter(|e| !e.remains).map(|e| e.part_id.as_str()).collect()
    }

    pub fn entry(&self, part_id: &str) -> Option<&PlanEntry> {
        self.entries.iter().find(|e| e.part_id == part_id)
    }

    pub(crate) fn finish(&mut self, problem: &AssemblyProblem, remaining: &[usize]) {
        if let [last] = remaining {
            self.entries.push(PlanEntry { part: *last, part_id: problem.parts[*last].id.clone(), segments: vec![], remains: true });
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Failure {
    Timeout,
    SimBudget,
    /// Every reachable state was expanded without a removal.
    Exhausted,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Failure::Timeout => "timeout",
            Failure::SimBudget => "sim_budget",
            Failure::Exhausted => "exhausted",
        })
    }
}

#[derive(Debug, Clone)]
pub struct PlanResult {
    pub mode: Mode,
    pub plan: Option<DisassemblyPlan>,
    pub failure: Option<Failure>,
    pub stats: RunStats,
    pub log: RunLog,
}

impl PlanResult {
    pub fn solved(&self) -> bool {
        self.plan.is_some()
    }
}

/// Runs the planner selected by `cfg.mode`.
pub fn plan(problem: &AssemblyProblem, cfg: &PlannerConfig) -> PlanResult {
    match cfg.mode {
        Mode::Sbdp | Mode::SbdpStar => sbdp::run(problem, cfg),
        Mode::PdpT => pdp::run(problem, cfg, MotionKind::Translational),
        Mode::PdpR => pdp::run(problem, cfg, MotionKind::Rotational),
        Mode::PdpStar => pdp::run_star(problem, cfg),
    }
}

/// Score of the initial node, which always sorts last.
pub(crate) const INITIAL_SCORE: EvalScore = EvalScore::INFINITE;
