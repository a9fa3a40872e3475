//! `fedata`: generate evaluation programs, triage inputs against their
//! manifests, and run simulated fuzzing campaigns.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use fedata_core::codegen::CompilerConfig;
use fedata_core::fuzzsim::{run_campaign, Budget, CampaignOptions, Mode, ScheduleParams};
use fedata_core::harness::{self, ExperimentPlan, PoolSource};
use fedata_core::oracle;
use fedata_core::Manifest;

#[derive(Parser)]
#[command(name = "fedata", version, about = "Synthetic bug corpora with known path counts, plus a fuzzing-schedule simulator")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Extract function skeletons from every .c file under a directory.
    Ingest {
        srcdir: PathBuf,
        /// Where to write the pool JSON (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate the programs and manifests described by a plan.
    Gen {
        #[arg(long)]
        plan: PathBuf,
        /// Output directory; overrides the plan's `out_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skeleton pool JSON written by `ingest`; overrides the plan's pool.
        #[arg(long)]
        pool: Option<PathBuf>,
        /// Also compile each program with the system C compiler.
        #[arg(long)]
        compile: bool,
        /// Compile with the address sanitizer.
        #[arg(long, requires = "compile")]
        hardened: bool,
        #[arg(long, default_value_t = 4)]
        jobs: usize,
    },
    /// Decide which path an input takes through a generated program.
    Triage {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Run one simulated campaign against a manifest.
    Fuzz {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "FAST")]
        schedule: Mode,
        #[arg(long, default_value_t = 512)]
        alpha: u64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long = "upper-m", default_value_t = 4096)]
        upper_m: u64,
        #[arg(long = "lower-l", default_value_t = 16)]
        lower_l: u64,
        #[arg(long = "max-execs", default_value_t = 1_000_000)]
        max_execs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the per-cycle log as CSV.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Run every (program, schedule, trial) campaign of a plan.
    Matrix {
        #[arg(long)]
        plan: PathBuf,
        /// Directory holding the manifests; overrides the plan's `out_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trials: Option<u32>,
        #[arg(long = "max-execs")]
        max_execs: Option<u64>,
        /// Where to write the matrix CSV (default `<out>/matrix.csv`).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Turn a matrix CSV into plot-ready series files.
    Report {
        #[arg(long)]
        csv: PathBuf,
        /// Output directory (default `report/` next to the CSV).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn read_plan(path: &Path) -> Result<ExperimentPlan> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ExperimentPlan::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let manifest = Manifest::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    manifest.validate().with_context(|| format!("validating {}", path.display()))?;
    Ok(manifest)
}

fn run(cmd: Cmd) -> Result<u8> {
    match cmd {
        Cmd::Ingest { srcdir, out } => {
            if !srcdir.is_dir() {
                bail!("{} is not a directory", srcdir.display());
            }
            let (units, rejected) = harness::ingest_dir(&srcdir)?;
            for (path, err) in &rejected {
                eprintln!("skipped {}: {err}", path.display());
            }
            let json = serde_json::to_string_pretty(&units)? + "\n";
            match out {
                Some(path) => {
                    std::fs::write(&path, json)?;
                    let functions: usize = units.iter().map(|u| u.functions.len()).sum();
                    println!("{} units, {functions} functions -> {}", units.len(), path.display());
                }
                None => print!("{json}"),
            }
            Ok(0)
        }
        Cmd::Gen { plan, out, pool, compile, hardened, jobs } => {
            let mut plan = read_plan(&plan)?;
            if let Some(out) = out {
                plan.out_dir = out;
            }
            if let Some(file) = pool {
                plan.pool = PoolSource::Pool { file };
            }
            let pool = harness::load_pool(&plan.pool)?;
            let programs = harness::gen_batch(&plan, &pool)?;
            let written = harness::write_batch(&programs, &plan.out_dir)?;
            println!("{} programs -> {}", written.len(), plan.out_dir.display());
            if compile {
                let cc = CompilerConfig::default();
                let results = harness::compile_batch(&programs, &plan.out_dir, &cc, hardened, jobs);
                let failed: Vec<_> = programs.iter().zip(&results).filter(|(_, r)| r.is_err()).collect();
                for (p, r) in &failed {
                    if let Err(e) = r {
                        eprintln!("{}: {e}", p.program_name);
                    }
                }
                if !failed.is_empty() {
                    bail!("{} of {} programs failed to compile", failed.len(), programs.len());
                }
                println!("compiled {} programs", programs.len());
            }
            Ok(0)
        }
        Cmd::Triage { manifest, input } => {
            let manifest = read_manifest(&manifest)?;
            let bytes = std::fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let verdict = oracle::evaluate(&manifest, &bytes)?;
            println!("path={} bug={}", verdict.path_id, u8::from(verdict.triggers_bug));
            Ok(if verdict.triggers_bug { 2 } else { 0 })
        }
        Cmd::Fuzz { manifest, schedule, alpha, beta, upper_m, lower_l, max_execs, seed, log } => {
            let manifest = read_manifest(&manifest)?;
            let params = ScheduleParams { alpha, beta, upper: upper_m, lower: lower_l, ..ScheduleParams::new(schedule) };
            params.validate().map_err(anyhow::Error::msg)?;
            let metrics =
                run_campaign(&manifest, &params, Budget::execs(max_execs), &CampaignOptions::default(), seed)?;
            if let Some(path) = log {
                std::fs::write(&path, metrics.log_csv())?;
            }
            println!("{}", serde_json::to_string_pretty(&metrics.summary())?);
            Ok(0)
        }
        Cmd::Matrix { plan, out, trials, max_execs, csv } => {
            let mut plan = read_plan(&plan)?;
            if let Some(out) = out {
                plan.out_dir = out;
            }
            if let Some(t) = trials {
                plan.trials = t;
            }
            if let Some(n) = max_execs {
                plan.budget.max_execs = n;
            }
            let report = harness::run_matrix(&plan)?;
            let path = csv.unwrap_or_else(|| plan.out_dir.join("matrix.csv"));
            std::fs::write(&path, report.to_csv())?;
            println!("{} cells -> {}", report.rows.len(), path.display());
            Ok(0)
        }
        Cmd::Report { csv, out } => {
            let text = std::fs::read_to_string(&csv).with_context(|| format!("reading {}", csv.display()))?;
            let set = harness::report(&text)?;
            let dir = out.unwrap_or_else(|| csv.parent().unwrap_or(Path::new(".")).join("report"));
            let written = set.write(&dir)?;
            println!("{} series -> {}", written.len(), dir.display());
            Ok(0)
        }
    }
}
