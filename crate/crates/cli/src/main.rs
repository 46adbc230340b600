use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use disasm_core::bench::{self, BenchConfig};
use disasm_core::io::{self, Family, PlanFile, RunRecord};
use disasm_core::planner::{plan, validate_plan, Mode, PlannerConfig};
use disasm_core::BuildOptions;

/// Sim budget used by `bench` unless one is given.
const BENCH_SIM_BUDGET: u64 = 20_000;

#[derive(Parser)]
#[command(name = "disasm", version, about = "Sequential disassembly planning for rigid assemblies")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Plan one problem.
    Plan(PlanArgs),
    /// Run every mode over a suite of problems.
    Bench(BenchArgs),
    /// Replay a plan file and check it.
    Validate(ValidateArgs),
    /// Generate a synthetic problem, or `suite` for the default suite.
    Gen(GenArgs),
}

#[derive(Args, Clone)]
struct Shared {
    /// Global planner timeout in seconds.
    #[arg(long, env = "DISASM_TIMEOUT", default_value_t = 7200.0)]
    timeout: f64,
    /// Stop after this many simulations.
    #[arg(long, env = "DISASM_SIM_BUDGET")]
    sim_budget: Option<u64>,
    #[arg(long, env = "DISASM_OUT_DIR", default_value = "out")]
    out_dir: PathBuf,
    /// SDF cells along each part's longest axis.
    #[arg(long, env = "DISASM_SDF_RES", default_value_t = 64)]
    sdf_res: usize,
    #[arg(long, env = "DISASM_PATH_STEP", default_value_t = 0.1)]
    path_step: f64,
    /// Rotation step in radians.
    #[arg(long, env = "DISASM_ROT_STEP", default_value_t = 0.05)]
    rot_step: f64,
}

impl Shared {
    fn planner(&self, mode: Mode, seed: u64) -> Result<PlannerConfig> {
        if !(self.timeout > 0.0 && self.path_step > 0.0 && self.rot_step > 0.0) || self.sdf_res < 4 {
            bail!("timeout and step sizes must be positive and --sdf-res at least 4");
        }
        let mut cfg = PlannerConfig { mode, seed, global_timeout_s: self.timeout, sim_budget: self.sim_budget, ..Default::default() };
        cfg.sim.path_step = self.path_step;
        cfg.sim.rotation_step = self.rot_step;
        Ok(cfg)
    }

    fn build(&self) -> BuildOptions {
        BuildOptions { sdf_resolution: self.sdf_res, ..Default::default() }
    }
}

#[derive(Args)]
struct PlanArgs {
    manifest: PathBuf,
    #[arg(long, env = "DISASM_MODE", default_value = "SBDP*")]
    mode: Mode,
    #[arg(long, env = "DISASM_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of manifests; the default suite is generated into it when
    /// it does not exist.
    suite: PathBuf,
    #[arg(long = "mode", env = "DISASM_MODE", value_delimiter = ',', default_value = "SBDP*,SBDP,PDP_t,PDP*")]
    modes: Vec<Mode>,
    #[arg(long = "seed", env = "DISASM_SEED", value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    /// Planner runs executed concurrently.
    #[arg(long, env = "DISASM_JOBS", default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Args)]
struct ValidateArgs {
    plan: PathBuf,
    /// Manifest to replay against instead of the one named in the plan.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    family: String,
    #[arg(long)]
    parts: Option<usize>,
    #[arg(long, env = "DISASM_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "DISASM_OUT_DIR", default_value = "suite")]
    out_dir: PathBuf,
}

fn file_stem(mode: Mode) -> String {
    mode.name().replace('*', "star")
}

fn cmd_plan(a: &PlanArgs) -> Result<ExitCode> {
    let cfg = a.shared.planner(a.mode, a.seed)?;
    let opts = a.shared.build();
    let problem = io::load_problem(&a.manifest, &opts).with_context(|| format!("loading {}", a.manifest.display()))?;
    let result = plan(&problem, &cfg);
    fs::create_dir_all(&a.shared.out_dir)?;
    let stem = format!("{}.{}", problem.name, file_stem(a.mode));
    let file = PlanFile::from_result(&problem.name, Some(a.manifest.clone()), opts.sdf_resolution, &cfg, &result);
    let plan_path = a.shared.out_dir.join(format!("{stem}.plan.json"));
    file.write(&plan_path)?;
    io::write_json(&a.shared.out_dir.join(format!("{stem}.log.json")), &json!({ "stats": result.stats, "log": result.log }))?;
    println!(
        "{} {}: {} sims={} pt={:.3}s dt={:.3}s",
        problem.name,
        a.mode,
        match result.failure {
            None => "solved".to_string(),
            Some(f) => format!("failed ({f})"),
        },
        result.stats.sim_count,
        result.stats.path_time_s,
        result.stats.total_time_s
    );
    let Some(p) = &result.plan else {
        return Ok(ExitCode::from(2));
    };
    for e in &p.entries {
        let actions: Vec<String> = e.actions().iter().map(|x| x.to_string()).collect();
        println!("  {:<12} {}", e.part_id, if e.remains { "(remains)".to_string() } else { actions.join(" ") });
    }
    println!("plan written to {}", plan_path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(a: &ValidateArgs) -> Result<ExitCode> {
    let file = PlanFile::read(&a.plan).with_context(|| format!("reading {}", a.plan.display()))?;
    let Some(manifest) = a.manifest.clone().or(file.manifest.clone()) else {
        bail!("plan file names no manifest; pass --manifest");
    };
    let opts = BuildOptions { sdf_resolution: file.sdf_resolution, ..Default::default() };
    let problem = io::load_problem(&manifest, &opts).with_context(|| format!("loading {}", manifest.display()))?;
    if !file.solved {
        println!("invalid: plan file records a failed run ({})", file.failure.map(|f| f.to_string()).unwrap_or_default());
        return Ok(ExitCode::FAILURE);
    }
    let report = validate_plan(&problem, &file.plan(), &file.config.sim);
    for e in &report.errors {
        println!("  {e}");
    }
    println!(
        "{}: max penetration {:.6}, goal {}",
        if report.valid { "valid" } else { "invalid" },
        report.max_penetration,
        if report.goal_reached { "reached" } else { "not reached" }
    );
    Ok(if report.valid { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_gen(a: &GenArgs) -> Result<ExitCode> {
    if a.family == "suite" {
        let paths = bench::write_suite(&a.out_dir, &bench::default_suite())?;
        println!("{} problems written to {}", paths.len(), a.out_dir.display());
        return Ok(ExitCode::SUCCESS);
    }
    let family: Family = a.family.parse()?;
    let asm = io::generate(family, a.parts.unwrap_or(family.default_parts()), a.seed)?;
    let path = io::write_synthetic(&a.out_dir, &asm)?;
    println!("{}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_bench(a: &BenchArgs) -> Result<ExitCode> {
    if !a.suite.exists() {
        bench::write_suite(&a.suite, &bench::default_suite())?;
    }
    let mut planner = a.shared.planner(Mode::SbdpStar, 0)?;
    planner.sim_budget = planner.sim_budget.or(Some(BENCH_SIM_BUDGET));
    let opts = a.shared.build();
    let manifests = bench::suite_manifests(&a.suite)?;
    let problems = bench::load_suite(&manifests, &opts)?;
    let cfg = BenchConfig { modes: a.modes.clone(), seeds: a.seeds.clone(), jobs: a.jobs.max(1), planner: planner.clone() };
    let runs = bench::run_sweep(&problems, &cfg);

    let out = &a.shared.out_dir;
    let plans = out.join("plans");
    fs::create_dir_all(&plans)?;
    let mut invalid = 0;
    for (run, sp) in runs.iter().zip(runs.iter().map(|r| problems.iter().find(|p| p.problem.name == r.record.problem).unwrap())) {
        let Some(p) = &run.plan else { continue };
        if run.validation.as_ref().is_some_and(|v| !v.valid) {
            invalid += 1;
            eprintln!("invalid plan: {} {}", run.record.problem, run.record.mode);
        }
        let cfg = PlannerConfig { mode: run.record.mode, seed: run.record.seed, ..planner.clone() };
        let file =
            PlanFile::new(&run.record.problem, Some(sp.manifest.clone()), opts.sdf_resolution, &cfg, Some(p), None, run.record.metrics());
        file.write(&plans.join(format!("{}.{}.s{}.plan.json", run.record.problem, file_stem(run.record.mode), run.record.seed)))?;
    }
    let records: Vec<RunRecord> = runs.iter().map(|r| r.record.clone()).collect();
    let max_t = records.iter().map(|r| r.total_time_s).fold(1.0, f64::max);
    let aggs = bench::aggregates(&records, &a.modes);
    let table = bench::summary_table(&aggs);
    write(&out.join("metrics.csv"), &io::metrics_csv(&records))?;
    write(&out.join("metrics_det.csv"), &io::deterministic_csv(&records))?;
    write(&out.join("coverage.csv"), &bench::coverage_csv(&bench::coverage(&records, &bench::checkpoints(max_t))))?;
    write(&out.join("summary.txt"), &table)?;
    print!("{table}");
    println!("{} runs, {} invalid plans; results in {}", records.len(), invalid, out.display());
    Ok(if invalid == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Plan(a) => cmd_plan(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Validate(a) => cmd_validate(a),
        Cmd::Gen(a) => cmd_gen(a),
    };
    res.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
