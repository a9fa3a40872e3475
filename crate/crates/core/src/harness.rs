//! Batch generation, campaign matrices and report series.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codegen::{compile, emit_program, program_name, write_program, CodegenError, CompilerConfig, GeneratedProgram};
use crate::fcg::{Fcg, FcgError, DEFAULT_PATH_CAP};
use crate::fuzzsim::{run_campaign_with, Budget, CampaignMetrics, CampaignOptions, ScheduleParams};
use crate::manifest::Manifest;
use crate::oracle::{Oracle, OracleError};
use crate::par;
use crate::planner::{plan_conditions, FeatureConfig, PlanError};
use crate::skeleton::{extract_skeletons, SkeletonError};
use crate::synth::{synthetic_pool, PoolUnit};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("no skeleton in the pool can host p={p}, m={m}, k={k}")]
    PoolExhausted { p: u32, m: u32, k: u32 },
    #[error("malformed csv: {0}")]
    MalformedCsv(String),
    #[error("{path}: {source}")]
    BadManifest { path: PathBuf, source: OracleError },
    #[error(transparent)]
    Skeleton(#[from] SkeletonError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Codegen(#[from] CodegenError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub config: FeatureConfig,
    pub repetitions: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolSource {
    /// C files under a directory, one unit per file.
    Sources { dir: PathBuf },
    /// A pool previously written by `ingest`.
    Pool { file: PathBuf },
    Synthetic { count: usize, seed: u64 },
}

impl Default for PoolSource {
    fn default() -> Self {
        PoolSource::Synthetic { count: 32, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    #[serde(default)]
    pub corpus: Vec<CorpusEntry>,
    #[serde(default)]
    pub schedules: Vec<ScheduleParams>,
    pub budget: Budget,
    #[serde(default = "one")]
    pub trials: u32,
    #[serde(default)]
    pub base_seed: u64,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub pool: PoolSource,
    #[serde(default)]
    pub campaign: CampaignOptions,
    /// Write each campaign's cycle log and summary under `out_dir/logs`.
    #[serde(default)]
    pub write_logs: bool,
}

fn one() -> u32 {
    1
}

impl ExperimentPlan {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let plan: ExperimentPlan = serde_json::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::InvalidPlan("trials must be at least 1".into()));
        }
        if self.budget.max_execs == 0 {
            return Err(HarnessError::InvalidPlan("budget must allow at least one execution".into()));
        }
        for s in &self.schedules {
            s.validate().map_err(HarnessError::InvalidPlan)?;
        }
        for e in &self.corpus {
            e.config.validate()?;
        }
        Ok(())
    }
}

/// Files the extractor refused, with the reason.
pub type Rejected = Vec<(PathBuf, SkeletonError)>;

/// Extracts skeletons from every `.c` file under `dir`, in path order.
/// Files the extractor rejects are reported back, not fatal.
pub fn ingest_dir(dir: &Path) -> Result<(Vec<PoolUnit>, Rejected), HarnessError> {
    let mut units = Vec::new();
    let mut rejected = Vec::new();
    let files = walkdir::WalkDir::new(dir).sort_by_file_name().into_iter();
    for entry in files {
        let entry = entry.map_err(|e| std::io::Error::other(e.to_string()))?;
        let path = entry.path();
        if !entry.file_type().is_file() || path.extension().is_none_or(|e| e != "c") {
            continue;
        }
        let text = String::from_utf8_lossy(&std::fs::read(path)?).into_owned();
        let name = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().replace(|c: char| !c.is_ascii_alphanumeric(), "_"));
        match extract_skeletons(&text) {
            Ok(functions) => units.push(PoolUnit { name, functions }),
            Err(e) => rejected.push((path.to_path_buf(), e)),
        }
    }
    Ok((units, rejected))
}

pub fn load_pool(source: &PoolSource) -> Result<Vec<PoolUnit>, HarnessError> {
    match source {
        PoolSource::Sources { dir } => Ok(ingest_dir(dir)?.0),
        PoolSource::Pool { file } => Ok(serde_json::from_str(&std::fs::read_to_string(file)?)?),
        PoolSource::Synthetic { count, seed } => Ok(synthetic_pool(*count, *seed)?),
    }
}

/// Generates one program for `config`, starting from a seeded pool unit
/// and moving on to the next whenever a unit is too small.
pub fn generate_one(pool: &[PoolUnit], config: &FeatureConfig, repetition: u32) -> Result<GeneratedProgram, HarnessError> {
    config.validate()?;
    let exhausted = || HarnessError::PoolExhausted { p: config.p, m: config.m, k: config.k };
    if pool.is_empty() {
        return Err(exhausted());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let start = rng.gen_range(0..pool.len());
    for i in 0..pool.len() {
        let unit = &pool[(start + i) % pool.len()];
        let fcg = match Fcg::from_skeletons(unit.functions.iter().cloned(), "main").normalize() {
            Ok(g) => g.attach_bug_node(),
            Err(_) => continue,
        };
        let selection = match fcg.select_bug_path_capped(config.c(), DEFAULT_PATH_CAP, &mut rng) {
            Ok(s) => s,
            Err(FcgError::ProgramTooSmall { .. }) => continue,
            Err(_) => continue,
        };
        let spec = plan_conditions(&fcg, &selection, config, &mut rng)?;
        let name = program_name(&unit.name, config, repetition);
        return Ok(emit_program(&fcg, &selection, &spec, config, &name)?);
    }
    Err(exhausted())
}

/// Every (config, repetition) job of the corpus, with per-program seeds.
pub fn batch_jobs(corpus: &[CorpusEntry]) -> Vec<(FeatureConfig, u32)> {
    corpus
        .iter()
        .flat_map(|e| {
            (0..e.repetitions).map(move |r| {
                let config = FeatureConfig { seed: par::derive_seed(e.config.seed, u64::from(r)), ..e.config.clone() };
                (config, r)
            })
        })
        .collect()
}

pub fn gen_batch(plan: &ExperimentPlan, pool: &[PoolUnit]) -> Result<Vec<GeneratedProgram>, HarnessError> {
    let jobs = batch_jobs(&plan.corpus);
    par::map(&jobs, |(config, rep)| generate_one(pool, config, *rep)).into_iter().collect()
}

/// Writes sources and manifests; returns the manifest paths.
pub fn write_batch(programs: &[GeneratedProgram], dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    programs.iter().map(|p| Ok(write_program(p, dir)?.1)).collect()
}

/// Compiles every program, at most `jobs` at a time.
pub fn compile_batch(
    programs: &[GeneratedProgram],
    dir: &Path,
    compiler: &CompilerConfig,
    hardened: bool,
    jobs: usize,
) -> Vec<Result<PathBuf, CodegenError>> {
    #[cfg(feature = "parallel")]
    {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
            return pool.install(|| par::map(programs, |p| compile(p, dir, compiler, hardened)));
        }
    }
    let _ = jobs;
    par::map_sequential(programs, |p| compile(p, dir, compiler, hardened))
}

#[derive(Debug, Clone)]
pub struct LoadedManifest {
    pub path: PathBuf,
    pub name: String,
    pub manifest: Manifest,
}

/// Reads and validates every `*.manifest.json` in `dir`, sorted by name.
pub fn load_manifests(dir: &Path) -> Result<Vec<LoadedManifest>, HarnessError> {
    let mut out = Vec::new();
    for entry in walkdir::WalkDir::new(dir).max_depth(1).sort_by_file_name() {
        let entry = entry.map_err(|e| std::io::Error::other(e.to_string()))?;
        let file = entry.file_name().to_string_lossy().into_owned();
        let Some(name) = file.strip_suffix(".manifest.json") else { continue };
        let path = entry.path().to_path_buf();
        let bad = |source: OracleError| HarnessError::BadManifest { path: path.clone(), source };
        let manifest = Manifest::from_json(&std::fs::read_to_string(&path)?).map_err(|e| bad(e.into()))?;
        Oracle::new(&manifest).map_err(bad)?;
        out.push(LoadedManifest { name: name.to_string(), path, manifest });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub program: String,
    pub manifest: String,
    pub p: u32,
    pub m: u32,
    pub k: u32,
    pub schedule: String,
    pub trials: u32,
    pub bugs_found: u32,
    pub bug_rate: f64,
    /// Median over all trials; trials without a bug count as infinite.
    pub median_execs_to_bug: Option<u64>,
    /// Mean over the trials that found the bug.
    pub mean_execs_to_bug: Option<f64>,
    pub explosion_rate: f64,
    pub mean_paths: f64,
    pub mean_cycles: f64,
    pub mean_execs_per_cycle: f64,
}

pub const MATRIX_HEADER: [&str; 15] = [
    "program",
    "manifest",
    "p",
    "m",
    "k",
    "schedule",
    "trials",
    "bugs_found",
    "bug_rate",
    "median_execs_to_bug",
    "mean_execs_to_bug",
    "explosion_rate",
    "mean_paths",
    "mean_cycles",
    "mean_execs_per_cycle",
];

/// Median with missing values ordered last; `None` when the middle is missing.
pub fn median_with_misses(values: &[Option<u64>]) -> Option<u64> {
    if values.is_empty() {
        return None;
    }
    let mut v: Vec<u64> = values.iter().map(|x| x.unwrap_or(u64::MAX)).collect();
    v.sort_unstable();
    let mid = v[(v.len() - 1) / 2];
    (mid != u64::MAX).then_some(mid)
}

fn aggregate(lm: &LoadedManifest, schedule: &ScheduleParams, runs: &[CampaignMetrics]) -> CellRow {
    let n = runs.len() as f64;
    let hits: Vec<Option<u64>> = runs.iter().map(|r| r.bug_found_at_exec).collect();
    let found: Vec<u64> = hits.iter().flatten().copied().collect();
    let mean = |f: &dyn Fn(&CampaignMetrics) -> f64| runs.iter().map(f).sum::<f64>() / n;
    CellRow {
        program: lm.name.clone(),
        manifest: lm.path.to_string_lossy().into_owned(),
        p: lm.manifest.p,
        m: lm.manifest.m,
        k: lm.manifest.k,
        schedule: schedule.mode.name().to_string(),
        trials: runs.len() as u32,
        bugs_found: found.len() as u32,
        bug_rate: found.len() as f64 / n,
        median_execs_to_bug: median_with_misses(&hits),
        mean_execs_to_bug: (!found.is_empty()).then(|| found.iter().sum::<u64>() as f64 / found.len() as f64),
        explosion_rate: mean(&|r| f64::from(u8::from(r.cycle_explosion))),
        mean_paths: mean(&|r| r.paths_found as f64),
        mean_cycles: mean(&|r| r.cycles_completed as f64),
        mean_execs_per_cycle: mean(&|r| r.total_execs as f64 / (r.log.len().max(1)) as f64),
    }
}

/// Seed of trial `trial` on program `program`; shared across schedules so
/// that schedules are compared on the same random streams.
pub fn trial_seed(base: u64, program: usize, trial: u32) -> u64 {
    par::derive_seed(par::derive_seed(base, program as u64), u64::from(trial))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatrixReport {
    pub rows: Vec<CellRow>,
}

impl MatrixReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(MATRIX_HEADER).expect("in-memory write");
        for r in &self.rows {
            let opt = |v: Option<String>| v.unwrap_or_default();
            w.write_record([
                r.program.clone(),
                r.manifest.clone(),
                r.p.to_string(),
                r.m.to_string(),
                r.k.to_string(),
                r.schedule.clone(),
                r.trials.to_string(),
                r.bugs_found.to_string(),
                format!("{:.4}", r.bug_rate),
                opt(r.median_execs_to_bug.map(|v| v.to_string())),
                opt(r.mean_execs_to_bug.map(|v| format!("{v:.1}"))),
                format!("{:.4}", r.explosion_rate),
                format!("{:.2}", r.mean_paths),
                format!("{:.2}", r.mean_cycles),
                format!("{:.2}", r.mean_execs_per_cycle),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 csv")
    }
}

/// Runs every (program, schedule, trial) campaign over already loaded
/// manifests; one row per (program, schedule) cell.
pub fn run_matrix_on(plan: &ExperimentPlan, manifests: &[LoadedManifest]) -> Result<MatrixReport, HarnessError> {
    plan.validate()?;
    let oracles: Vec<Oracle> = manifests
        .iter()
        .map(|lm| Oracle::new(&lm.manifest).map_err(|source| HarnessError::BadManifest { path: lm.path.clone(), source }))
        .collect::<Result<_, _>>()?;
    let mut jobs = Vec::new();
    for pi in 0..manifests.len() {
        for si in 0..plan.schedules.len() {
            for t in 0..plan.trials {
                jobs.push((pi, si, t));
            }
        }
    }
    let runs = par::map(&jobs, |&(pi, si, t)| {
        let seed = trial_seed(plan.base_seed, pi, t);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        run_campaign_with(&oracles[pi], &plan.schedules[si], plan.budget, &plan.campaign, seed, &mut rng)
    });
    if plan.write_logs {
        let dir = plan.out_dir.join("logs");
        std::fs::create_dir_all(&dir)?;
        for (&(pi, si, t), m) in jobs.iter().zip(&runs) {
            let stem = format!("{}__{}__{t}", manifests[pi].name, plan.schedules[si].mode.name());
            std::fs::write(dir.join(format!("{stem}.csv")), m.log_csv())?;
            std::fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&m.summary())? + "\n")?;
        }
    }
    let per_cell = plan.trials as usize;
    let rows = runs
        .chunks(per_cell.max(1))
        .zip(jobs.chunks(per_cell.max(1)))
        .map(|(cell, ids)| {
            let (pi, si, _) = ids[0];
            aggregate(&manifests[pi], &plan.schedules[si], cell)
        })
        .collect();
    Ok(MatrixReport { rows })
}

/// Loads the manifests from `plan.out_dir` and runs the matrix.
pub fn run_matrix(plan: &ExperimentPlan) -> Result<MatrixReport, HarnessError> {
    let manifests = load_manifests(&plan.out_dir)?;
    run_matrix_on(plan, &manifests)
}

/// One plot-ready columnar data file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Series {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 csv")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReportSet {
    /// Executions-to-bug per program, one series per (schedule, p).
    pub bug_series: Vec<Series>,
    /// Executions per cycle and cycle counts, one series per schedule.
    pub speed_series: Vec<Series>,
}

impl ReportSet {
    pub fn is_empty(&self) -> bool {
        self.bug_series.is_empty() && self.speed_series.is_empty()
    }

    pub fn all(&self) -> impl Iterator<Item = &Series> {
        self.bug_series.iter().chain(&self.speed_series)
    }

    /// Writes `<name>.csv` per series; returns the paths.
    pub fn write(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        self.all()
            .map(|s| {
                let path = dir.join(format!("{}.csv", s.name));
                std::fs::write(&path, s.to_csv())?;
                Ok(path)
            })
            .collect()
    }
}

/// Splits a matrix CSV into figure series.
pub fn report(csv_text: &str) -> Result<ReportSet, HarnessError> {
    if csv_text.trim().is_empty() {
        return Ok(ReportSet::default());
    }
    let bad = |e: String| HarnessError::MalformedCsv(e);
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| header.iter().position(|h| h == name).ok_or_else(|| bad(format!("missing column `{name}`")));
    let (program, p, schedule) = (col("program")?, col("p")?, col("schedule")?);
    let (median, rate) = (col("median_execs_to_bug")?, col("bug_rate")?);
    let (speed, cycles) = (col("mean_execs_per_cycle")?, col("mean_cycles")?);

    let mut bugs: BTreeMap<(String, u32), Vec<Vec<String>>> = BTreeMap::new();
    let mut speeds: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let get = |c: usize| rec.get(c).map(str::to_string).ok_or_else(|| bad(format!("row {} is short", i + 1)));
        let pv: u32 = get(p)?.parse().map_err(|_| bad(format!("row {}: bad p", i + 1)))?;
        let sched = get(schedule)?;
        bugs.entry((sched.clone(), pv)).or_default().push(vec![get(program)?, get(median)?, get(rate)?]);
        speeds.entry(sched).or_default().push(vec![get(program)?, pv.to_string(), get(speed)?, get(cycles)?]);
    }
    let strings = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    Ok(ReportSet {
        bug_series: bugs
            .into_iter()
            .map(|((s, p), rows)| Series {
                name: format!("bugs_{s}_p{p}"),
                header: strings(&["program", "median_execs_to_bug", "bug_rate"]),
                rows,
            })
            .collect(),
        speed_series: speeds
            .into_iter()
            .map(|(s, rows)| Series {
                name: format!("speed_{s}"),
                header: strings(&["program", "p", "mean_execs_per_cycle", "mean_cycles"]),
                rows,
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzsim::Mode;
    use crate::oracle::{count_feasible_paths, evaluate, PathId};

    fn plan(corpus: Vec<CorpusEntry>) -> ExperimentPlan {
        ExperimentPlan {
            corpus,
            schedules: vec![ScheduleParams::new(Mode::AflConst), ScheduleParams::new(Mode::Fast)],
            budget: Budget::execs(20_000),
            trials: 2,
            base_seed: 9,
            out_dir: PathBuf::from("unused"),
            pool: PoolSource::Synthetic { count: 8, seed: 1 },
            campaign: CampaignOptions::default(),
            write_logs: false,
        }
    }

    fn loaded(programs: &[GeneratedProgram]) -> Vec<LoadedManifest> {
        programs
            .iter()
            .map(|p| LoadedManifest {
                path: PathBuf::from(format!("{}.manifest.json", p.program_name)),
                name: p.program_name.clone(),
                manifest: p.manifest.clone(),
            })
            .collect()
    }

    #[test]
    fn batch_accounting_matches_plan() {
        let pool = load_pool(&PoolSource::Synthetic { count: 8, seed: 1 }).unwrap();
        let corpus = vec![
            CorpusEntry { config: FeatureConfig::new(1, 10, 0, 0), repetitions: 3 },
            CorpusEntry { config: FeatureConfig::new(2, 20, 1, 0), repetitions: 2 },
            CorpusEntry { config: FeatureConfig::new(3, 8, 1, 2), repetitions: 0 },
        ];
        let programs = gen_batch(&plan(corpus), &pool).unwrap();
        assert_eq!(programs.len(), 5);
        let sum = programs.iter().fold((0, 0, 0), |(p, m, k), g| (p + g.manifest.p, m + g.manifest.m, k + g.manifest.k));
        assert_eq!(sum, (10 * 3 + 20 * 2, 2, 0));
        for g in &programs {
            assert_eq!(count_feasible_paths(&g.manifest), Ok(u64::from(g.manifest.p)));
            assert_eq!(evaluate(&g.manifest, &g.manifest.witness().unwrap()).unwrap().path_id, PathId::Bug);
        }
    }

    #[test]
    fn pool_exhaustion_reported() {
        let pool = load_pool(&PoolSource::Synthetic { count: 2, seed: 1 }).unwrap();
        let err = generate_one(&pool, &FeatureConfig::new(1, 5000, 0, 0), 0);
        assert!(matches!(err, Err(HarnessError::PoolExhausted { p: 5000, .. })));
        assert!(matches!(generate_one(&[], &FeatureConfig::new(1, 3, 0, 0), 0), Err(HarnessError::PoolExhausted { .. })));
    }

    #[test]
    fn matrix_rows_per_cell_and_deterministic() {
        let pool = load_pool(&PoolSource::Synthetic { count: 4, seed: 2 }).unwrap();
        let pl = plan(vec![CorpusEntry { config: FeatureConfig::new(5, 5, 0, 0), repetitions: 2 }]);
        let lm = loaded(&gen_batch(&pl, &pool).unwrap());
        let a = run_matrix_on(&pl, &lm).unwrap();
        assert_eq!(a.rows.len(), 2 * 2);
        assert_eq!(a.to_csv(), run_matrix_on(&pl, &lm).unwrap().to_csv());
        assert!(a.to_csv().starts_with(&MATRIX_HEADER.join(",")));
        let set = report(&a.to_csv()).unwrap();
        assert_eq!(set.bug_series.len(), 2);
        assert_eq!(set.bug_series.iter().map(|s| s.rows.len()).sum::<usize>(), a.rows.len());
        assert_eq!(set.speed_series.iter().map(|s| s.rows.len()).sum::<usize>(), a.rows.len());
    }

    #[test]
    fn empty_and_malformed_reports() {
        assert!(report("").unwrap().is_empty());
        assert!(report(&MATRIX_HEADER.join(",")).unwrap().is_empty());
        assert!(matches!(report("a,b\n1,2\n"), Err(HarnessError::MalformedCsv(_))));
    }

    #[test]
    fn medians_treat_misses_as_infinite() {
        assert_eq!(median_with_misses(&[Some(5), None, Some(1)]), Some(5));
        assert_eq!(median_with_misses(&[None, None, Some(1)]), None);
        assert_eq!(median_with_misses(&[Some(3), Some(1)]), Some(1));
        assert_eq!(median_with_misses(&[]), None);
    }

    #[test]
    fn plan_json_defaults() {
        let p = ExperimentPlan::from_json(
            r#"{"corpus":[{"config":{"seed":1,"p":10},"repetitions":2}],
                "schedules":[{"mode":"FAST"},{"mode":"FAST_PLUS","lower_l":8}],
                "budget":{"max_execs":1000},"out_dir":"out"}"#,
        )
        .unwrap();
        assert_eq!(p.trials, 1);
        assert_eq!(p.schedules[1].lower, 8);
        assert_eq!(p.schedules[1].alpha, 512);
        assert_eq!(p.corpus[0].config.magic_len.max, 3);
        assert!(ExperimentPlan::from_json(r#"{"budget":{"max_execs":1000},"out_dir":"o","trials":0}"#).is_err());
    }
}
